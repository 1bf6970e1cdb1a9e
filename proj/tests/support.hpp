#pragma once

// Shared helpers for the test binaries: random admissible Hamiltonians and
// an x-space quadrature of the NLS Hamiltonian.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "kamlab/hamiltonian.hpp"

namespace kamlab::testing {

// Random multiset of `n` modes drawn uniformly from `pool`.
inline MultiIndex random_multiset(std::mt19937_64& rng, const std::vector<Mode>& pool, int n) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<std::pair<Mode, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(pool[pick(rng)], 1);
  return MultiIndex::from_entries(e);
}

// Random admissible pair with |α| = |β| = half_degree over `pool`.
inline MonomialKey random_admissible_key(std::mt19937_64& rng, const std::vector<Mode>& pool,
                                         int half_degree, int cutoff) {
  for (;;) {
    const MultiIndex a = random_multiset(rng, pool, half_degree);
    const MultiIndex b = random_multiset(rng, pool, half_degree - 1);
    long p = 0;
    a.for_each([&](Mode j, int k) { p += long(j) * k; });
    b.for_each([&](Mode j, int k) { p -= long(j) * k; });
    if (std::abs(p) > cutoff) continue;
    bool in_pool = false;
    for (Mode j : pool) in_pool = in_pool || j == p;
    if (!in_pool) continue;
    return {a, b + MultiIndex::unit(static_cast<Mode>(p))};
  }
}

// Real Hamiltonian with `n_terms` random monomials (plus conjugates), degrees
// drawn from {2, 4, ..., max_degree}.
inline HamiltonianPoly random_hamiltonian(std::mt19937_64& rng, const ModeSet& modes, int n_terms,
                                          int max_degree, const std::vector<Mode>& pool, int cap = -1) {
  PolyBuilder b(modes, cap < 0 ? max_degree : cap);
  std::uniform_int_distribution<int> half(1, max_degree / 2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n_terms; ++i) {
    const MonomialKey k = random_admissible_key(rng, pool, half(rng), modes.cutoff());
    const Complex c{g(rng), k.is_kernel() ? 0.0 : g(rng)};
    b.add(k, c);
    if (!k.is_kernel()) b.add(k.conjugate(), std::conj(c));
  }
  return b.build(PruneRule{0.0, 0.0});
}

inline HamiltonianPoly random_hamiltonian(std::mt19937_64& rng, const ModeSet& modes, int n_terms,
                                          int max_degree) {
  return random_hamiltonian(rng, modes, n_terms, max_degree, modes.all());
}

// Trapezoidal quadrature of Σ(j²+V_j)|u_j|² + (1/2π)∫ F(|u(x)|²) dx with
// F(y) = Σ_d f^(d) y^{d+1}/(d+1), on n_grid points.
inline double nls_quadrature(const NonlinearityModel& f, std::span<const double> potential,
                             const ModeSet& modes, std::span<const Complex> u, int n_grid) {
  double quad = 0.0;
  for (Mode j : modes.all()) quad += (double(j) * j + potential[modes.slot(j)]) * std::norm(u[modes.slot(j)]);
  double integral = 0.0;
  for (int k = 0; k < n_grid; ++k) {
    const double x = 2.0 * std::numbers::pi * k / n_grid;
    Complex ux{};
    for (Mode j : modes.all()) ux += u[modes.slot(j)] * std::polar(1.0, j * x);
    const double y = std::norm(ux);
    double big_f = 0.0;
    double yp = y;
    for (std::size_t d = 1; d <= f.coeffs.size(); ++d) {
      yp *= y;
      big_f += f.coeffs[d - 1] * yp / double(d + 1);
    }
    integral += big_f;
  }
  return quad + integral / n_grid;
}

}  // namespace kamlab::testing
