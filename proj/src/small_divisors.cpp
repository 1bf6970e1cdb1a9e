#include "kamlab/small_divisors.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "kamlab/error.hpp"

namespace kamlab {

void DiophParams::validate() const {
  if (!(gamma > 0.0 && gamma <= 0.5)) throw DomainError("DiophParams: gamma must lie in (0, 1/2]");
  if (!(tau >= 1.5)) throw DomainError("DiophParams: tau must be >= 3/2");
}

double angle_bracket(double x, BracketConvention c) {
  return c == BracketConvention::Max ? std::max(1.0, std::abs(x)) : std::sqrt(1.0 + x * x);
}

SignedIndexVector Resonance::recombined() const {
  std::vector<std::pair<Mode, int>> e = k.entries();
  if (sigma1 != 0) e.emplace_back(j1, sigma1);
  if (sigma2 != 0) e.emplace_back(j2, sigma2);
  return SignedIndexVector(std::move(e));
}

namespace {

int log2_site(Mode j) { return std::countr_zero(static_cast<unsigned>(j)); }

// Π_{j∈S}(1 + ℓ_j²⟨log₂ j⟩²)^{−τ} without the γ.
double tangential_factor(const SignedIndexVector& l, const ModeSet& modes, const DiophParams& params) {
  double f = 1.0;
  for (const auto& [j, v] : l.entries()) {
    if (!modes.is_tangential(j)) continue;
    const double b = angle_bracket(log2_site(j), params.bracket);
    f *= std::pow(1.0 + double(v) * v * b * b, -params.tau);
  }
  return f;
}

bool passes(QuadFilter f, long d, int l1) {
  switch (f) {
    case QuadFilter::None:
      return true;
    case QuadFilter::Strict:
      return std::abs(d) < l1;
    case QuadFilter::Relaxed:
      return std::abs(d) <= 2L * l1;
  }
  return false;
}

// Visits every k over the tangential sites with |k| ≤ l_max (including k = 0).
template <class F>
void for_each_tangential(const std::vector<Mode>& sites, int l_max, F&& f) {
  std::vector<int> k(sites.size(), 0);
  std::vector<std::pair<Mode, int>> e;
  auto rec = [&](auto&& self, std::size_t i, int budget) -> void {
    if (i == sites.size()) {
      e.clear();
      for (std::size_t s = 0; s < sites.size(); ++s)
        if (k[s] != 0) e.emplace_back(sites[s], k[s]);
      f(SignedIndexVector(e));
      return;
    }
    for (int v = -budget; v <= budget; ++v) {
      k[i] = v;
      self(self, i + 1, budget - std::abs(v));
    }
    k[i] = 0;
  };
  rec(rec, 0, l_max);
}

}  // namespace

double dioph_weight(const SignedIndexVector& l, const ModeSet& modes, const DiophParams& params) {
  if (l.is_zero()) throw DomainError("dioph_weight: l = 0 is not a resonance vector");
  return params.gamma * tangential_factor(l, modes, params);
}

std::vector<Resonance> enumerate_resonant_indices(const ModeSet& modes, const ResonanceBudget& budget,
                                                  EnumerationStats* stats) {
  if (budget.max_normal < 0 || budget.max_normal > 2) {
    throw DomainError("ResonanceBudget: the normal-site cap must lie in [0, 2]");
  }
  EnumerationStats st;
  std::vector<Resonance> out;
  const std::vector<Mode>& normal = modes.normal();

  for_each_tangential(modes.tangential(), budget.l_max, [&](const SignedIndexVector& k) {
    ++st.k_visited;
    const long m = mass(k);
    const long p = momentum(k);
    const long d = quad_moment(k);
    const int k1 = k.l1();
    int completions = 0;

    auto emit = [&](int s1, Mode a, int s2, Mode b) {
      const int n_units = std::abs(s1) + std::abs(s2);
      const int l1 = k1 + n_units;  // normal sites never overlap tangential ones
      if (l1 == 0 || l1 > budget.l_max) return;
      const long dl = d + long(s1) * a * a + long(s2) * b * b;
      if (!passes(budget.filter, dl, l1)) return;
      Resonance r{{}, k, s1, a, s2, b};
      r.l = r.recombined();
      if (r.l.l1() != l1) return;  // cancelling pair, e.g. e_j − e_j
      if (l1 % 2 != 0 || l1 < 4) st.parity_ok = false;
      ++completions;
      out.push_back(std::move(r));
    };

    if (m == 0 && p == 0 && k1 > 0) emit(0, 0, 0, 0);
    if (budget.max_normal >= 1 && std::abs(m) == 1) {
      const int s = static_cast<int>(-m);
      const long j = -p * s;
      if (modes.is_normal(static_cast<Mode>(j)) && std::abs(j) <= modes.cutoff()) emit(s, Mode(j), 0, 0);
    }
    if (budget.max_normal >= 2) {
      if (std::abs(m) == 2) {
        const int s = static_cast<int>(-m / 2);
        const long sum = -p * s;  // j1 + j2
        for (Mode a : normal) {
          const long b = sum - a;
          if (b < a || std::abs(b) > modes.cutoff() || !modes.is_normal(Mode(b))) continue;
          emit(s, a, s, Mode(b));
        }
      } else if (m == 0 && p != 0) {
        // σ1 = −σ2 with j1 < j2: (+,−) needs j2 = j1 + p, (−,+) needs j2 = j1 − p.
        const int s1 = p > 0 ? 1 : -1;
        const long shift = std::abs(p);
        for (Mode a : normal) {
          const long b = a + shift;
          if (std::abs(b) > modes.cutoff() || !modes.is_normal(Mode(b))) continue;
          emit(s1, a, -s1, Mode(b));
        }
      }
    }
    if (completions > 0) {
      const double bound = 36.0 * (k1 + 2);
      st.worst_completion_ratio = std::max(st.worst_completion_ratio, completions / bound);
      st.max_completions = std::max(st.max_completions, completions);
      if (completions > bound) ++st.completion_violations;
    }
  });

  std::sort(out.begin(), out.end(), [](const Resonance& a, const Resonance& b) { return a.l < b.l; });
  st.count = out.size();
  if (stats) *stats = st;
  return out;
}

DcReport verify_dc(const FrequencyVector& omega, const DiophParams& params, std::span<const Resonance> resonances) {
  if (!omega.in_box()) throw DomainError("verify_dc: frequency vector outside the box |ω_j − j²| < 1/2");
  DcReport rep;
  const ModeSet& modes = omega.modes();
  for (const auto& r : resonances) {
    if (std::abs(quad_moment(r.l)) >= r.l.l1()) {
      ++rep.prefiltered;
      continue;
    }
    ++rep.checked;
    DcWitness w{r.l, std::abs(omega.dot(r.l)), dioph_weight(r.l, modes, params)};
    if (w.divisor < w.weight) {
      rep.ok = false;
      ++rep.violations;
    }
    if (!rep.worst || w.margin() < rep.worst->margin()) rep.worst = std::move(w);
  }
  return rep;
}

DcReport verify_dc(const FrequencyVector& omega, const DiophParams& params, const ResonanceBudget& budget) {
  ResonanceBudget b = budget;
  b.filter = QuadFilter::None;
  const auto res = enumerate_resonant_indices(omega.modes(), b);
  return verify_dc(omega, params, res);
}

// ---------------------------------------------------------------------------
// K₀

double k0_value(const MultiIndex& alpha, const MultiIndex& beta, Mode q, double delta, const FrequencyVector& omega,
                double gamma) {
  double log_prod = 0.0;
  (alpha + beta).for_each([&](Mode j, int e) { log_prod += e * std::log(sobolev_bracket(j)); });
  const double base = 2.0 * std::log(sobolev_bracket(q)) - log_prod;
  return std::exp(delta * base) * gamma / std::abs(omega.dot(alpha, beta));
}

std::vector<MonomialKey> k0_candidate_keys(const ModeSet& modes, const ResonanceBudget& budget, int max_common) {
  std::vector<MonomialKey> out;
  for (const auto& r : enumerate_resonant_indices(modes, budget)) {
    const MultiIndex a0 = r.l.positive_part();
    const MultiIndex b0 = r.l.negative_part();
    int normal_units = 0;
    for (const auto& [j, v] : r.l.entries())
      if (!modes.is_tangential(j)) normal_units += std::abs(v);
    out.push_back({a0, b0});
    if (max_common < 1) continue;
    for (Mode j : modes.all()) {
      if (!modes.is_tangential(j) && normal_units + 2 > budget.max_normal) continue;
      if (a0.total() + 1 > MultiIndex::kSlots || b0.total() + 1 > MultiIndex::kSlots) continue;
      const MultiIndex e = MultiIndex::unit(j);
      out.push_back({a0 + e, b0 + e});
    }
  }
  return out;
}

K0Audit k0_supremum(double delta, const DiophParams& params, const ResonanceBudget& budget,
                    const FrequencyVector& omega, int max_common) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("k0_supremum: delta must lie in (0, 1)");
  const ModeSet& modes = omega.modes();
  K0Audit audit;
  audit.delta = delta;
  std::vector<double> log_bracket(modes.size());
  for (Mode j : modes.all()) log_bracket[modes.slot(j)] = std::log(sobolev_bracket(j));

  for (const auto& key : k0_candidate_keys(modes, budget, max_common)) {
    const double divisor = std::abs(omega.dot(key.alpha, key.beta));
    if (divisor == 0.0) {
      throw PreconditionError("k0_supremum: exact resonance at " +
                              SignedIndexVector::difference(key.alpha, key.beta).to_string());
    }
    const MultiIndex ab = key.alpha + key.beta;
    double log_prod = 0.0;
    ab.for_each([&](Mode j, int e) { log_prod += e * log_bracket[modes.slot(j)]; });
    ab.for_each([&](Mode q, int) {
      ++audit.candidates;
      const double v = std::exp(delta * (2.0 * log_bracket[modes.slot(q)] - log_prod)) * params.gamma / divisor;
      if (audit.empty || v > audit.measured_sup) {
        audit.empty = false;
        audit.measured_sup = v;
        audit.witness = {key.alpha, key.beta, q, divisor};
      }
    });
  }
  return audit;
}

double k0_bound_exponent(double delta) {
  const double l = std::log(1.0 / delta);
  return l * l / delta;
}

K0Curve fit_k0_curve(std::span<const K0Audit> audits) {
  K0Curve curve;
  curve.c = 1.0;
  for (const auto& a : audits) {
    if (a.empty) continue;
    const double target = std::log(a.measured_sup);
    const double e = k0_bound_exponent(a.delta);
    auto g = [&](double c) { return std::log(c) + c * e - target; };
    if (g(curve.c) >= 0.0) continue;
    double lo = curve.c;
    double hi = curve.c * 2.0;
    while (g(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < 0.0 ? lo : hi) = mid;
    }
    curve.c = hi;
  }
  for (const auto& a : audits) curve.log_bound.push_back(std::log(curve.c) + curve.c * k0_bound_exponent(a.delta));
  return curve;
}

// ---------------------------------------------------------------------------
// Measure

NormalFrequencyMap NormalFrequencyMap::shifted_squares(const ModeSet& modes, std::vector<double> w) {
  if (static_cast<int>(w.size()) != modes.size()) throw DomainError("shifted_squares: one W_j per mode expected");
  std::vector<double> omega(modes.size());
  for (Mode j : modes.all()) omega[modes.slot(j)] = double(j) * j + w[modes.slot(j)];
  return {[omega](std::span<const double>) { return omega; }, false};
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double ph = double(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (ph + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half), successes == n ? 1.0 : std::min(1.0, centre + half)};
}

namespace {

struct ResonanceGroup {
  std::vector<std::pair<int, int>> k;             // (slot, k_j) over tangential sites
  double weight = 0.0;                            // identical for every completion of k
  std::vector<std::pair<double, std::size_t>> c;  // (Σ_normal ℓ_j Ω_j, resonance index), sorted
};

struct ShardResult {
  std::size_t excluded = 0;
  double best_margin = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  double best_divisor = 0.0;
  double inv_sum = 0.0;
  double inv_sq_sum = 0.0;
  std::size_t draws = 0;
};

constexpr std::size_t kShardSize = 1000;
constexpr std::size_t kMaxRejectionDraws = 100000000;

// x₊ⁿ − y₊ⁿ for x ≥ y without cancellation when both are positive.
double pow_diff(double x, double y, int n) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return std::pow(x, n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::pow(x, n - 1 - i) * std::pow(y, i);
  return (x - y) * s;
}

std::seed_seq shard_seed(std::uint64_t seed, std::size_t shard, std::uint32_t stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(shard), stream};
}

template <class F>
void run_shards(std::size_t n_shards, int workers, F&& run_shard) {
  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(n_shards)));
  if (n_workers == 1) {
    for (std::size_t s = 0; s < n_shards; ++s) run_shard(s);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t s = next++; s < n_shards; s = next++) run_shard(s);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

double box_sum_probability(std::span<const double> a, double lo, double hi) {
  const int n = static_cast<int>(a.size());
  if (hi <= lo) return 0.0;
  if (n == 0) return lo <= 0.0 && 0.0 <= hi ? 1.0 : 0.0;
  double norm = 1.0;
  for (int i = 0; i < n; ++i) norm *= a[i] * (i + 1);
  double s = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double b = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) b += a[i];
    s += (std::popcount(mask) % 2 ? -1.0 : 1.0) * pow_diff(hi - b, lo - b, n);
  }
  return std::clamp(s / norm, 0.0, 1.0);
}

MeasureReport measure_estimate(const ModeSet& modes, const DiophParams& params, const ResonanceBudget& budget,
                               std::size_t n_samples, std::uint64_t seed, const NormalFrequencyMap& omega_map,
                               int workers) {
  params.validate();
  if (n_samples == 0) throw DomainError("measure_estimate: n_samples must be positive");
  MeasureReport rep;
  rep.gamma = params.gamma;
  rep.tau = params.tau;
  rep.l_max = budget.l_max;
  rep.n_samples = n_samples;

  const auto res = enumerate_resonant_indices(modes, budget);
  rep.n_resonances = res.size();
  for (const auto& r : res) rep.analytic_sum += dioph_weight(r.l, modes, params);

  const auto& sites = modes.tangential();
  for_each_tangential(sites, budget.l_max, [&](const SignedIndexVector& k) {
    if (k.is_zero()) return;
    double f = 1.0;
    for (const auto& [j, v] : k.entries()) {
      const double b = angle_bracket(log2_site(j), params.bracket);
      f *= std::pow(1.0 + double(v) * v * b * b, -(params.tau - 0.5));
    }
    rep.analytic_bound += 72.0 * params.gamma * f;
  });

  std::vector<double> centre(modes.size(), 0.0);
  for (Mode j : sites) centre[modes.slot(j)] = double(j) * j;

  // Group by tangential part; the weight only depends on it.
  std::map<SignedIndexVector, std::size_t> group_of;
  std::vector<ResonanceGroup> groups;
  std::vector<std::size_t> group_index(res.size());
  std::vector<double> c_of(res.size());
  const std::vector<double> omega0 = omega_map.fn(centre);
  for (std::size_t i = 0; i < res.size(); ++i) {
    auto [it, inserted] = group_of.try_emplace(res[i].k, groups.size());
    if (inserted) {
      ResonanceGroup g;
      for (const auto& [j, v] : res[i].k.entries()) g.k.emplace_back(modes.slot(j), v);
      g.weight = dioph_weight(res[i].l, modes, params);
      groups.push_back(std::move(g));
    }
    double c = 0.0;
    if (res[i].sigma1 != 0) c += res[i].sigma1 * omega0[modes.slot(res[i].j1)];
    if (res[i].sigma2 != 0) c += res[i].sigma2 * omega0[modes.slot(res[i].j2)];
    groups[it->second].c.emplace_back(c, i);
    group_index[i] = it->second;
    c_of[i] = c;
  }
  for (auto& g : groups) std::sort(g.c.begin(), g.c.end());

  // Visits, for a fixed ν, the nearest completion on each side of −k·ν in every group.
  auto scan_fixed = [&](const std::vector<double>& nu, auto&& consider) {
    for (const auto& g : groups) {
      double t = 0.0;
      for (const auto& [slot, v] : g.k) t += v * nu[slot];
      const auto it = std::lower_bound(g.c.begin(), g.c.end(), std::pair<double, std::size_t>{-t, 0});
      if (it != g.c.end()) consider(it->second, std::abs(t + it->first), g.weight);
      if (it != g.c.begin()) consider(std::prev(it)->second, std::abs(t + std::prev(it)->first), g.weight);
    }
  };
  // Number of ℓ with |ω·ℓ| < w_ℓ at ν.
  auto count_fixed = [&](const std::vector<double>& nu) {
    std::size_t n = 0;
    for (const auto& g : groups) {
      double t = 0.0;
      for (const auto& [slot, v] : g.k) t += v * nu[slot];
      const auto lo = std::upper_bound(g.c.begin(), g.c.end(), std::pair<double, std::size_t>{-t - g.weight, SIZE_MAX});
      for (auto it = lo; it != g.c.end() && it->first < -t + g.weight; ++it) n += std::abs(t + it->first) < g.weight;
    }
    return n;
  };

  const std::size_t n_shards = (n_samples + kShardSize - 1) / kShardSize;
  std::vector<ShardResult> shards(n_shards);

  run_shards(n_shards, workers, [&](std::size_t s) {
    auto sseq = shard_seed(seed, s, 0x6b616dU);
    std::mt19937_64 rng(sseq);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    const std::size_t begin = s * kShardSize;
    const std::size_t end = std::min(n_samples, begin + kShardSize);
    ShardResult out;
    std::vector<double> nu = centre;
    for (std::size_t n = begin; n < end; ++n) {
      for (Mode j : sites) nu[modes.slot(j)] = centre[modes.slot(j)] + unif(rng);
      bool excluded = false;
      auto consider = [&](std::size_t idx, double divisor, double weight) {
        const double margin = divisor / weight;
        if (divisor < weight) excluded = true;
        if (margin < out.best_margin) {
          out.best_margin = margin;
          out.best_index = idx;
          out.best_divisor = divisor;
        }
      };
      if (!omega_map.depends_on_nu) {
        scan_fixed(nu, consider);
      } else {
        std::vector<double> omega = omega_map.fn(nu);
        for (Mode j : sites) omega[modes.slot(j)] = nu[modes.slot(j)];
        const FrequencyVector w(modes, omega);
        for (std::size_t i = 0; i < res.size(); ++i) {
          consider(i, std::abs(w.dot(res[i].l)), dioph_weight(res[i].l, modes, params));
        }
      }
      out.excluded += excluded;
    }
    shards[s] = out;
  });

  ShardResult best;
  for (const auto& s : shards) {
    rep.excluded += s.excluded;
    if (s.best_margin < best.best_margin) best = s;
  }
  rep.excluded_fraction = double(rep.excluded) / n_samples;
  std::tie(rep.ci_low, rep.ci_high) = wilson_interval(rep.excluded, n_samples);
  if (!res.empty() && std::isfinite(best.best_margin)) {
    rep.worst_witness = DcWitness{res[best.best_index].l, best.best_divisor,
                                  dioph_weight(res[best.best_index].l, modes, params)};
  }

  if (omega_map.depends_on_nu) return rep;

  // Importance-sampled union estimate. In offsets x_j = ν_j − j² ∈ (−½, ½) the
  // slab of ℓ is |k·x + c'| < w with c' = c + Σ_j k_j j².
  ImportanceEstimate est;
  est.n_samples = n_samples;
  std::vector<double> vol(res.size(), 0.0);
  std::vector<double> c_shift(res.size(), 0.0);
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& g = groups[group_index[i]];
    std::vector<double> a;
    double cs = c_of[i];
    double half_sum = 0.0;
    for (const auto& [slot, v] : g.k) {
      cs += v * centre[slot];
      a.push_back(std::abs(v));
      half_sum += 0.5 * std::abs(v);
    }
    c_shift[i] = cs;
    // k·x = a·y − Σa/2 in distribution (signs do not matter for uniform offsets)
    vol[i] = box_sum_probability(a, -cs - g.weight + half_sum, -cs + g.weight + half_sum);
    est.slab_volume_sum += vol[i];
  }
  rep.importance = est;
  if (est.slab_volume_sum == 0.0) return rep;

  std::vector<double> cdf(res.size());
  std::partial_sum(vol.begin(), vol.end(), cdf.begin());

  run_shards(n_shards, workers, [&](std::size_t s) {
    auto sseq = shard_seed(seed, s, 0x696d70U);
    std::mt19937_64 rng(sseq);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const std::size_t begin = s * kShardSize;
    const std::size_t end = std::min(n_samples, begin + kShardSize);
    ShardResult out;
    std::vector<double> nu = centre;
    for (std::size_t n = begin; n < end; ++n) {
      const double pick = u01(rng) * cdf.back();
      const std::size_t i = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), pick) - cdf.begin(),
                                                  res.size() - 1);
      const auto& g = groups[group_index[i]];
      // pivot on the largest |k_j|
      std::size_t piv = 0;
      for (std::size_t q = 1; q < g.k.size(); ++q)
        if (std::abs(g.k[q].second) > std::abs(g.k[piv].second)) piv = q;
      const double kp = g.k[piv].second;
      const double l_max = 2.0 * g.weight / std::abs(kp);
      for (;;) {
        if (++out.draws > kMaxRejectionDraws) throw Error("measure_estimate: rejection sampler stalled");
        double rest = c_shift[i];
        for (std::size_t q = 0; q < g.k.size(); ++q) {
          if (q == piv) continue;
          const double x = u01(rng) - 0.5;
          nu[g.k[q].first] = centre[g.k[q].first] + x;
          rest += g.k[q].second * x;
        }
        double lo = (-rest - g.weight) / kp;
        double hi = (-rest + g.weight) / kp;
        if (lo > hi) std::swap(lo, hi);
        lo = std::max(lo, -0.5);
        hi = std::min(hi, 0.5);
        if (hi <= lo || u01(rng) * l_max >= hi - lo) continue;
        nu[g.k[piv].first] = centre[g.k[piv].first] + lo + (hi - lo) * u01(rng);
        break;
      }
      // sites outside supp(k) are irrelevant for this slab but not for the others
      for (Mode j : sites) {
        bool in_k = false;
        for (const auto& [slot, v] : g.k) in_k = in_k || slot == modes.slot(j);
        if (!in_k) nu[modes.slot(j)] = centre[modes.slot(j)] + u01(rng) - 0.5;
      }
      const double inv = 1.0 / double(std::max<std::size_t>(1, count_fixed(nu)));
      out.inv_sum += inv;
      out.inv_sq_sum += inv * inv;
    }
    shards[s] = out;
  });

  double inv_sum = 0.0;
  double inv_sq_sum = 0.0;
  for (const auto& s : shards) {
    inv_sum += s.inv_sum;
    inv_sq_sum += s.inv_sq_sum;
    est.rejection_draws += s.draws;
  }
  const double mean = inv_sum / n_samples;
  const double var = std::max(0.0, inv_sq_sum / n_samples - mean * mean);
  est.fraction = est.slab_volume_sum * mean;
  est.std_error = est.slab_volume_sum * std::sqrt(var / n_samples);
  est.ci_low = std::max(0.0, est.fraction - 1.959963984540054 * est.std_error);
  est.ci_high = est.fraction + 1.959963984540054 * est.std_error;
  rep.importance = est;
  return rep;
}

// ---------------------------------------------------------------------------
// Auxiliary inequalities

double sum_over_product(std::span<const double> x, double a) {
  double s = 0.0;
  double log_p = 0.0;
  for (double v : x) {
    s += v;
    log_p += std::log(v);
  }
  return s * std::exp(-a * log_p);
}

AuxReport aux_lemma_validators(std::size_t trials, std::uint64_t seed) {
  AuxReport rep;
  rep.trials = trials;
  rep.worst_sum_product_slack = std::numeric_limits<double>::infinity();
  rep.worst_log_growth_value = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 12);

  auto random_x = [&] {
    const double spread = 12.0 * u01(rng);
    std::vector<double> x(len(rng));
    for (double& v : x) v = 2.0 * std::exp(spread * u01(rng));
    std::sort(x.begin(), x.end(), std::greater<>());
    return x;
  };
  auto holds = [](std::span<const double> x, double a, double* slack) {
    const double lhs = sum_over_product(x, a);
    const double rhs = std::pow(x[0], 1.0 - a) + 2.0 / (a * std::pow(x[0], a));
    if (slack) *slack = (rhs - lhs) / rhs;
    return lhs <= rhs * (1.0 + 1e-12);
  };

  for (std::size_t t = 0; t < trials; ++t) {
    double a = u01(rng);
    while (a <= 0.0) a = u01(rng);
    const auto x = random_x();
    double slack = 0.0;
    if (!holds(x, a, &slack)) {
      ++rep.sum_product_violations;
      rep.max_violating_a = std::max(rep.max_violating_a, a);
      rep.min_violating_a = std::min(rep.min_violating_a, a);
      if (rep.first_counterexample.empty()) {
        rep.first_counterexample.push_back(a);
        rep.first_counterexample.insert(rep.first_counterexample.end(), x.begin(), x.end());
      }
    }
    rep.worst_sum_product_slack = std::min(rep.worst_sum_product_slack, slack);

    const auto xh = random_x();
    if (!holds(xh, 0.5, nullptr)) ++rep.sum_product_half_violations;

    // δ log-uniform in [1e-12, e^{-3})
    const double delta = std::exp(-3.0 + (std::log(1e-12) + 3.0) * u01(rng));
    const double y0 = 4.0 / delta * std::log(1.0 / delta);
    const double y = u01(rng) < 0.1 ? y0 : y0 * (1.0 + std::exp(std::log(1e-6) + u01(rng) * std::log(1e9)));
    const double f = -delta * y + std::log1p(y * y);
    if (f > 0.0) ++rep.log_growth_violations;
    rep.worst_log_growth_value = std::max(rep.worst_log_growth_value, f);
  }
  return rep;
}

}  // namespace kamlab
