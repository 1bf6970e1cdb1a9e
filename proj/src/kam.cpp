#include "kamlab/kam.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

namespace kamlab {

// ---------------------------------------------------------------------------
// Schedule

void KamSchedule::validate() const {
  if (!(r0 > 0.0)) throw DomainError("schedule.r0 must be positive");
  if (!(rho > 0.0)) throw DomainError("schedule.rho must be positive");
  if (!(delta > 0.0)) throw DomainError("schedule.delta must be positive");
  if (!(p0 >= 0.0)) throw DomainError("schedule.p0 must be non-negative");
  if (rho > r0 / 2.0) throw DomainError("schedule.rho must satisfy rho <= r0/2");
}

double KamSchedule::rho_n(int n) const { return rho / 6.0 * std::ldexp(1.0, -n); }

double KamSchedule::delta_n(int n) const {
  if (n == 0) return delta / 8.0;
  return 9.0 * delta / (4.0 * std::numbers::pi * std::numbers::pi * double(n) * n);
}

double KamSchedule::r_n(int n) const { return r0 - rho * (1.0 - std::ldexp(1.0, -n)); }

double KamSchedule::p_n(int n) const {
  double p = p0;
  for (int i = 0; i < n; ++i) p += 3.0 * delta_n(i);
  return p;
}

double KamSchedule::p_inf() const { return p0 + 1.5 * delta; }

// ---------------------------------------------------------------------------
// Norms and the correction operator

KamNorms kam_norms(const DegreeParts& parts, const NormParams& np, double gamma) {
  KamNorms k;
  k.zero_kernel = parts.zero_kernel.sup_norm();
  k.zero_range = weighted_norm(parts.zero_range, np);
  k.m2 = weighted_norm(parts.m2, np);
  k.m1 = weighted_norm(parts.m1, np);
  k.ge1 = weighted_norm(parts.ge1, np);
  k.eps = (k.zero_kernel + k.zero_range + k.m2 + k.m1) / gamma;
  k.theta = k.ge1 / gamma + k.eps;
  return k;
}

KamNorms kam_norms(const HamiltonianPoly& g, const TorusData& torus, const NormParams& np, double gamma) {
  return kam_norms(split_degrees(g, torus), np, gamma);
}

CorrectionOperator::CorrectionOperator(ModeSet modes, int degree_cap)
    : modes_(modes), columns_(modes.size(), HamiltonianPoly(modes, degree_cap)) {}

CorrectionOperator::CorrectionOperator(ModeSet modes, std::vector<HamiltonianPoly> columns)
    : modes_(std::move(modes)), columns_(std::move(columns)) {
  if (static_cast<int>(columns_.size()) != modes_.size()) {
    throw DomainError("CorrectionOperator: one column per mode expected");
  }
}

bool CorrectionOperator::is_zero() const {
  for (const auto& c : columns_)
    if (!c.empty()) return false;
  return true;
}

HamiltonianPoly CorrectionOperator::apply(const CounterTerm& h) const {
  if (columns_.empty()) return HamiltonianPoly(modes_, 2);
  PolyBuilder b(modes_, columns_.front().degree_cap());
  for (Mode j : modes_.all()) {
    const double v = h[j];
    if (v != 0.0) b.add(columns_[modes_.slot(j)], v);
  }
  return b.build(PruneRule{0.0, 0.0});
}

double CorrectionOperator::operator_bound(const NormParams& np) const {
  double s = 0.0;
  for (const auto& c : columns_) s += weighted_norm(c, np);
  return s;
}

// ---------------------------------------------------------------------------
// Lie transform

namespace {

HamiltonianPoly lie_series(const HamiltonianPoly& h, const HamiltonianPoly& s, int order_cap, const NormParams& np,
                           LieStats* stats, bool include_h) {
  if (s.constant() != Complex{}) throw PreconditionError("lie_transform: generator has a constant part");
  for (const Term& t : s.terms()) {
    if (t.key.is_kernel()) {
      throw PreconditionError("lie_transform: generator has a kernel monomial (" + t.key.alpha.to_string() + ", " +
                              t.key.beta.to_string() + ")");
    }
  }
  LieStats st;
  PolyBuilder sum(h.modes(), std::min(h.degree_cap(), s.degree_cap()));
  if (include_h) sum.add(h);
  HamiltonianPoly term = h;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= order_cap && !s.terms().empty(); ++k) {
    term = poisson_bracket(s, term) * Complex{1.0 / k};
    if (term.terms().empty()) break;
    const double nk = weighted_norm(term, np);
    st.term_norms.push_back(nk);
    if (k >= 2 && nk > 0.0 && nk >= prev) {
      throw DivergenceError("lie_transform: term " + std::to_string(k) + " has norm " + std::to_string(nk) +
                            " >= previous " + std::to_string(prev));
    }
    prev = nk;
    sum.add(term);
    st.terms_used = k;
    st.tail_estimate = nk;
  }
  if (stats) *stats = st;
  return sum.build(PruneRule{0.0, 0.0});
}

}  // namespace

HamiltonianPoly lie_transform(const HamiltonianPoly& h, const HamiltonianPoly& s, int order_cap, const NormParams& np,
                              LieStats* stats) {
  return lie_series(h, s, order_cap, np, stats, true);
}

HamiltonianPoly lie_increment(const HamiltonianPoly& h, const HamiltonianPoly& s, int order_cap, const NormParams& np,
                              LieStats* stats) {
  return lie_series(h, s, order_cap, np, stats, false);
}

// ---------------------------------------------------------------------------
// Counterterm

CountertermSolution solve_counterterm(const CountertermSystem& system) {
  const int n = system.modes.size();
  if (static_cast<int>(system.rhs.size()) != n || static_cast<int>(system.M.size()) != n * n) {
    throw DomainError("solve_counterterm: system size does not match the mode window");
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  double m_norm = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      a(i, j) += system.M[i * n + j];
      row += std::abs(system.M[i * n + j]);
    }
    m_norm = std::max(m_norm, row);
  }
  if (m_norm >= 1.0) {
    throw DivergenceError("solve_counterterm: ||M|| = " + std::to_string(m_norm) + " >= 1");
  }
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(system.rhs.data(), n);
  const Eigen::VectorXd x = a.partialPivLu().solve(b);
  CountertermSolution sol;
  sol.lambda_bar = CounterTerm(system.modes, std::vector<double>(x.data(), x.data() + n));
  sol.m_norm = m_norm;
  sol.warning = m_norm > 0.5;
  return sol;
}

// ---------------------------------------------------------------------------
// Step

KamState initial_state(const HamiltonianPoly& g0, const TorusData& torus, const KamSchedule& schedule,
                       const KamParams& params) {
  schedule.validate();
  params.dioph.validate();
  KamState st;
  st.G = g0.with_degree_cap(params.degree_cap);
  st.L = CorrectionOperator(torus.modes(), params.degree_cap);
  st.norms = kam_norms(st.G, torus, schedule.norm(0), params.dioph.gamma);
  st.theta0 = st.norms.theta;
  return st;
}

namespace {

HamiltonianPoly realified(const HamiltonianPoly& h, PruneRule rule) {
  PolyBuilder b(h.modes(), h.degree_cap());
  b.add(h);
  return b.build(rule, true);
}

// S^{(−2)} + S^{(−1)} + S^{(0,R)} for degree ≤ 0 data c, and the Π^{0,K}
// content that feeds the counterterm equation.
struct AffinePart {
  HamiltonianPoly S;
  CounterTerm kernel;
};

}  // namespace

KamState kam_step(const KamState& state, const FrequencyVector& omega, const TorusData& torus,
                  const KamSchedule& schedule, const KamParams& params, StepReport* report) {
  const int n = state.n;
  const ModeSet& modes = torus.modes();
  const int cap = params.degree_cap;
  const double gamma = params.dioph.gamma;
  const HomologicalParams hp{params.dioph, schedule.norm(n), params.enforce_dioph};

  StepReport rep;
  rep.n = n;
  rep.r_n = schedule.r_n(n);
  rep.p_n = schedule.p_n(n);
  rep.eps = state.norms.eps;
  rep.theta = state.norms.theta;
  rep.g_terms = state.G.size();
  rep.min_divisor = std::numeric_limits<double>::infinity();
  rep.smallness = state.norms.eps * std::pow(1.0 + state.norms.theta, 5);
  if (rep.smallness > params.smallness_limit) {
    rep.warnings.push_back("smallness: eps(1+theta)^5 = " + std::to_string(rep.smallness) + " exceeds " +
                           std::to_string(params.smallness_limit));
  }

  auto l_inv = [&](const HamiltonianPoly& g) {
    HomologicalSolution sol = solve_homological(g.with_constant(0.0), omega, hp, 0.0);
    rep.min_divisor = std::min(rep.min_divisor, sol.min_divisor);
    return sol.F;
  };

  const DegreeParts g = split_degrees(state.G, torus, params.prune);
  const HamiltonianPoly& gh = g.ge1;

  auto solve_affine = [&](const DegreeParts& c) {
    const HamiltonianPoly s2 = l_inv(c.m2);
    const HamiltonianPoly s1 = l_inv(split_degrees(poisson_bracket(s2, gh), torus, params.prune).m1 + c.m1);
    const DegreeParts p = split_degrees(poisson_bracket(s2 + s1, gh), torus, params.prune);
    const HamiltonianPoly s0 = l_inv(p.zero_range + c.zero_range);
    return AffinePart{s2 + s1 + s0, p.zero_kernel + c.zero_kernel};
  };

  const AffinePart hom = solve_affine(g);

  const int dim = modes.size();
  CountertermSystem sys{modes, std::vector<double>(dim * dim, 0.0), std::vector<double>(dim, 0.0)};
  for (int i = 0; i < dim; ++i) sys.rhs[i] = -hom.kernel.values()[i];
  std::vector<AffinePart> cols;
  if (!state.L.is_zero()) {
    cols.reserve(dim);
    for (Mode j : modes.all()) {
      const HamiltonianPoly& c = state.L.column(j);
      if (c.empty()) {
        cols.push_back({HamiltonianPoly(modes, cap), CounterTerm(modes)});
        continue;
      }
      cols.push_back(solve_affine(split_degrees(c, torus, params.prune)));
      const auto& k = cols.back().kernel.values();
      for (int i = 0; i < dim; ++i) sys.M[i * dim + modes.slot(j)] = k[i];
    }
  }
  const CountertermSolution cs = solve_counterterm(sys);
  rep.m_norm = cs.m_norm;
  rep.lambda_bar = cs.lambda_bar.sup_norm();
  if (cs.warning) rep.warnings.push_back("counterterm: ||M|| = " + std::to_string(cs.m_norm) + " > 1/2");

  PolyBuilder sb(modes, cap);
  sb.add(hom.S);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const double v = cs.lambda_bar.values()[i];
    if (v != 0.0) sb.add(cols[i].S, v);
  }
  const HamiltonianPoly S = sb.build(params.prune, true).with_constant(0.0);

  // K_j = (Id + L_n)B_j with B_j the unit counterterm at j
  const NormParams next = schedule.norm(n + 1);
  std::vector<HamiltonianPoly> K;
  K.reserve(dim);
  for (Mode j : modes.all()) {
    std::vector<double> e(dim, 0.0);
    e[modes.slot(j)] = 1.0;
    K.push_back(CounterTerm(modes, e).hamiltonian(torus, cap) + state.L.column(j));
  }

  // G_{n+1} = (e^S D − D) + e^S (G_n + Σ λ̄_j K_j), never forming D + small
  PolyBuilder xb(modes, cap);
  xb.add(state.G);
  for (int i = 0; i < dim; ++i) {
    const double v = cs.lambda_bar.values()[i];
    if (v != 0.0) xb.add(K[i], v);
  }
  LieStats ls;
  const HamiltonianPoly D = frequency_hamiltonian(omega, cap);
  const HamiltonianPoly moved = lie_transform(xb.build(PruneRule{0.0, 0.0}), S, params.order_cap, next, &ls);
  rep.lie_terms = ls.terms_used;

  KamState out;
  out.n = n + 1;
  out.G = realified(lie_increment(D, S, params.order_cap, next) + moved, params.prune);
  std::vector<HamiltonianPoly> new_cols;
  new_cols.reserve(dim);
  double l_step = 0.0;
  for (Mode j : modes.all()) {
    const int s = modes.slot(j);
    const HamiltonianPoly& c = state.L.column(j);
    const HamiltonianPoly b = K[s] - c;
    HamiltonianPoly col = lie_increment(b, S, params.order_cap, next);
    if (!c.empty()) col = col + lie_transform(c, S, params.order_cap, next);
    col = realified(col, params.prune);
    l_step += weighted_norm(col - c, next);
    new_cols.push_back(std::move(col));
  }
  out.L = CorrectionOperator(modes, std::move(new_cols));
  out.S_history = state.S_history;
  out.S_history.push_back(S);
  out.lambda_bar_history = state.lambda_bar_history;
  out.lambda_bar_history.push_back(cs.lambda_bar);
  out.norms = kam_norms(out.G, torus, next, gamma);
  out.theta0 = state.theta0;

  rep.s_norm = weighted_norm(S, next);
  rep.l_step_bound = l_step;
  if (report) *report = rep;
  return out;
}

PipelineResult run_kam(const HamiltonianPoly& g0, const FrequencyVector& omega, const TorusData& torus,
                       const KamSchedule& schedule, const KamParams& params, int n_steps) {
  if (n_steps < 0) throw DomainError("run_kam: n_steps must be non-negative");
  PipelineResult res;
  KamState st = initial_state(g0, torus, schedule, params);
  for (int k = 0; k < n_steps && st.norms.eps >= params.floor; ++k) {
    StepReport rep;
    st = kam_step(st, omega, torus, schedule, params, &rep);
    for (const auto& w : rep.warnings) res.warnings.push_back("step " + std::to_string(rep.n) + ": " + w);
    res.table.push_back(std::move(rep));
  }
  StepReport last;
  last.n = st.n;
  last.r_n = schedule.r_n(st.n);
  last.p_n = schedule.p_n(st.n);
  last.eps = st.norms.eps;
  last.theta = st.norms.theta;
  last.g_terms = st.G.size();
  last.min_divisor = std::numeric_limits<double>::quiet_NaN();
  last.smallness = st.norms.eps * std::pow(1.0 + st.norms.theta, 5);
  res.table.push_back(last);

  res.converged = st.norms.eps < params.floor;
  res.N = frequency_hamiltonian(omega, params.degree_cap) + st.G;
  res.G = st.G;
  res.S = st.S_history;
  res.lambda = CounterTerm(torus.modes());
  for (const auto& l : st.lambda_bar_history) res.lambda = res.lambda + l;

  res.c_fit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < res.table.size(); ++i) {
    const double a = res.table[i].eps;
    const double b = res.table[i + 1].eps;
    if (!(b < a)) res.decay_ok = false;
    if (a > 0.0 && a < 1.0 && b > 0.0) {
      res.decay_exponents.push_back(std::log(b) / std::log(a));
      res.c_fit = std::max(res.c_fit, std::log(b) - KamSchedule::chi * std::log(a));
    }
  }
  if (res.decay_exponents.empty()) res.c_fit = 0.0;
  return res;
}

// ---------------------------------------------------------------------------
// Flows and conjugacy

FieldVector hamiltonian_flow(const HamiltonianPoly& s, std::span<const Complex> u, double t, double tol) {
  namespace ode = boost::numeric::odeint;
  using State = std::vector<double>;
  const HamiltonianPoly gen = t < 0.0 ? -s : s;
  const double T = std::abs(t);
  const std::size_t n = u.size();
  State x(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x[2 * i] = u[i].real();
    x[2 * i + 1] = u[i].imag();
  }
  if (T == 0.0 || gen.terms().empty()) return FieldVector(u.begin(), u.end());
  FieldVector buf(n);
  auto rhs = [&](const State& y, State& dy, double) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = {y[2 * i], y[2 * i + 1]};
    const Evaluation ev = evaluate_and_field(gen, buf);
    for (std::size_t i = 0; i < n; ++i) {
      dy[2 * i] = ev.field[i].real();
      dy[2 * i + 1] = ev.field[i].imag();
    }
  };
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(tol, tol), rhs, x, 0.0, T, T / 64);
  FieldVector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {x[2 * i], x[2 * i + 1]};
  return out;
}

FieldVector conjugating_map(std::span<const HamiltonianPoly> S, std::span<const Complex> u, double tol) {
  FieldVector v(u.begin(), u.end());
  for (std::size_t i = S.size(); i-- > 0;) v = hamiltonian_flow(S[i], v, -1.0, tol);
  return v;
}

ConjugacyReport conjugacy_check(const HamiltonianPoly& h0_with_lambda, const PipelineResult& result, double radius,
                                double p, std::size_t n_points, std::uint64_t seed) {
  const ModeSet& modes = h0_with_lambda.modes();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ConjugacyReport rep;
  rep.points = n_points;
  rep.displacements.assign(result.S.size(), 0.0);
  for (std::size_t k = 0; k < n_points; ++k) {
    FieldVector u(modes.size());
    for (Mode j : modes.all()) {
      u[modes.slot(j)] = std::polar(radius * u01(rng) * std::pow(sobolev_bracket(j), -p), 2.0 * std::numbers::pi * u01(rng));
    }
    const FieldVector v = conjugating_map(result.S, u);
    const Complex lhs = evaluate(h0_with_lambda, v);
    const Complex rhs = evaluate(result.N, u);
    rep.max_abs_error = std::max(rep.max_abs_error, std::abs(lhs - rhs));
    rep.scale = std::max(rep.scale, std::abs(rhs));
    for (std::size_t i = 0; i < result.S.size(); ++i) {
      const FieldVector w = hamiltonian_flow(result.S[i], u, 1.0);
      double d = 0.0;
      for (Mode j : modes.all()) {
        d = std::max(d, std::abs(w[modes.slot(j)] - u[modes.slot(j)]) * std::pow(sobolev_bracket(j), p));
      }
      rep.displacements[i] = std::max(rep.displacements[i], d);
    }
  }
  rep.max_rel_error = rep.scale > 0.0 ? rep.max_abs_error / rep.scale : rep.max_abs_error;
  return rep;
}

// ---------------------------------------------------------------------------
// Frequency map

FrequencyMapResult solve_frequency_map(const CountertermMap& lambda, const ModeSet& modes, std::span<const double> nu,
                                       std::span<const double> W, const FrequencyMapOptions& options) {
  if (static_cast<int>(nu.size()) != modes.size() || static_cast<int>(W.size()) != modes.size()) {
    throw DomainError("solve_frequency_map: nu and W must be indexed by slot");
  }
  std::vector<double> w(modes.size());
  for (Mode j : modes.all()) {
    const int s = modes.slot(j);
    w[s] = modes.is_tangential(j) ? nu[s] : double(j) * j + W[s];
  }
  FrequencyMapResult res;
  std::optional<CounterTerm> prev_lambda;
  std::vector<double> prev_w;
  double prev_step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    const FrequencyVector omega(modes, w);
    CounterTerm lam = lambda(omega);
    std::vector<double> next = w;
    double step = 0.0;
    for (Mode j : modes.normal()) {
      const int s = modes.slot(j);
      next[s] = double(j) * j + W[s] - lam[j];
      step = std::max(step, std::abs(next[s] - w[s]));
    }
    if (prev_lambda) {
      double dw = 0.0;
      for (std::size_t s = 0; s < w.size(); ++s) dw = std::max(dw, std::abs(w[s] - prev_w[s]));
      if (dw > 0.0) {
        const double lip = (lam - *prev_lambda).sup_norm() / dw;
        res.lipschitz_estimate = std::max(res.lipschitz_estimate, lip);
        if (lip >= 0.5) {
          throw DivergenceError("solve_frequency_map: measured Lipschitz constant " + std::to_string(lip) +
                                " >= 1/2");
        }
      }
      if (step > options.tol && step >= prev_step) {
        throw DivergenceError("solve_frequency_map: increment " + std::to_string(step) + " did not shrink");
      }
    }
    res.residual_history.push_back(step);
    res.iterations = it;
    res.residual = step;
    prev_lambda = lam;
    prev_w = w;
    prev_step = step;
    w = next;
    if (step <= options.tol) {
      res.lambda = lam;
      break;
    }
    if (it == options.max_iterations) {
      throw DivergenceError("solve_frequency_map: no convergence in " + std::to_string(it) + " iterations");
    }
  }
  res.omega = FrequencyVector(modes, w);
  res.V.assign(modes.size(), 0.0);
  for (Mode j : modes.all()) {
    const int s = modes.slot(j);
    if (modes.is_tangential(j)) {
      res.V[s] = nu[s] + res.lambda[j] - double(j) * j;
    } else {
      res.V[s] = W[s];
      // Ω_j − j² − W_j = −λ_j; reading it off w would cancel against j²
      res.omega_shift = std::max(res.omega_shift, std::abs(res.lambda[j]));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Torus checks and trajectories

double perturbation_field_residual(const HamiltonianPoly& g, const TorusData& torus, std::size_t n_phase_samples,
                                   std::uint64_t seed) {
  const ModeSet& modes = torus.modes();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  const NormParams& np = torus.params();
  double worst = 0.0;
  std::vector<double> phases(modes.size());
  for (std::size_t k = 0; k < n_phase_samples; ++k) {
    for (double& p : phases) p = ph(rng);
    const Evaluation ev = evaluate_and_field(g, torus.point(phases));
    for (Mode j : modes.all()) {
      worst = std::max(worst, std::abs(ev.field[modes.slot(j)]) * std::pow(sobolev_bracket(j), np.p) / np.r);
    }
  }
  return worst;
}

double torus_field_residual(const HamiltonianPoly& h, const FrequencyVector& omega, const TorusData& torus,
                            std::size_t n_phase_samples, std::uint64_t seed) {
  return perturbation_field_residual(h - frequency_hamiltonian(omega, h.degree_cap()), torus, n_phase_samples, seed);
}

double torus_residual(const HamiltonianPoly& n, const FrequencyVector& omega, const TorusData& torus,
                      std::size_t n_phase_samples, std::uint64_t seed, double normal_form_tol) {
  const double defect = normal_form_defect(n, omega, torus);
  if (defect > normal_form_tol) {
    throw PreconditionError("torus_residual: not in normal form (defect " + std::to_string(defect) + ")");
  }
  return torus_field_residual(n, omega, torus, n_phase_samples, seed);
}

std::vector<Complex> sample_trajectory(const TorusData& torus, const FrequencyVector& omega,
                                       std::span<const double> phases, std::span<const double> times,
                                       std::span<const double> xs) {
  const ModeSet& modes = torus.modes();
  std::vector<Complex> out;
  out.reserve(times.size() * xs.size());
  for (double t : times) {
    for (double x : xs) {
      Complex u{};
      for (Mode j : modes.all()) {
        const double a = torus.action(j);
        if (a == 0.0) continue;
        const int s = modes.slot(j);
        u += std::polar(std::sqrt(a), omega[j] * t + (phases.empty() ? 0.0 : phases[s]) + j * x);
      }
      out.push_back(u);
    }
  }
  return out;
}

HolderDiagnostic holder_diagnostic(const TorusData& torus, const FrequencyVector& omega,
                                   std::span<const double> phases, double x, std::span<const double> hs,
                                   std::size_t n_t) {
  if (hs.size() < 2 || n_t == 0) throw DegenerateInputError("holder_diagnostic: need two step sizes and n_t > 0");
  HolderDiagnostic d;
  const double xs[] = {x};
  for (double h : hs) {
    double worst = 0.0;
    for (std::size_t k = 0; k < n_t; ++k) {
      const double t = 2.0 * std::numbers::pi * k / n_t;
      const double ts[] = {t, t + h};
      const auto u = sample_trajectory(torus, omega, phases, ts, xs);
      worst = std::max(worst, std::abs(u[1] - u[0]));
    }
    d.h.push_back(h);
    d.increment.push_back(worst);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    mx += std::log(d.h[i]);
    my += std::log(d.increment[i]);
  }
  mx /= hs.size();
  my /= hs.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    sxy += (std::log(d.h[i]) - mx) * (std::log(d.increment[i]) - my);
    sxx += (std::log(d.h[i]) - mx) * (std::log(d.h[i]) - mx);
  }
  d.exponent = sxy / sxx;
  return d;
}

}  // namespace kamlab
