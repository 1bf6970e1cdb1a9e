#include "kamlab/hamiltonian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "kamlab/error.hpp"

namespace kamlab {

namespace {

constexpr Complex kI{0.0, 1.0};

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// α! = Π_j α_j!
double multi_factorial(const MultiIndex& a) {
  double f = 1.0;
  a.for_each([&](Mode, int e) { f *= factorial(e); });
  return f;
}

bool supported_on(const MultiIndex& a, const ModeSet& modes) {
  bool ok = true;
  a.for_each([&](Mode j, int) { ok = ok && modes.contains(j); });
  return ok;
}

}  // namespace

// ---------------------------------------------------------------------------
// HamiltonianPoly

HamiltonianPoly::HamiltonianPoly(ModeSet modes, int degree_cap)
    : modes_(std::move(modes)), degree_cap_(degree_cap) {
  if (degree_cap < 2) throw DomainError("HamiltonianPoly: degree cap must be >= 2");
  if (degree_cap > 2 * MultiIndex::kSlots) {
    throw DomainError("HamiltonianPoly: degree cap exceeds " + std::to_string(2 * MultiIndex::kSlots));
  }
}

Complex HamiltonianPoly::coefficient(const MultiIndex& alpha, const MultiIndex& beta) const {
  if (alpha.empty() && beta.empty()) return constant_;
  const MonomialKey key{alpha, beta};
  const auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                                   [](const Term& t, const MonomialKey& k) { return t.key < k; });
  return it != terms_.end() && it->key == key ? it->coeff : Complex{};
}

double HamiltonianPoly::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.coeff));
  return m;
}

double HamiltonianPoly::reality_defect() const {
  double d = std::abs(constant_.imag());
  for (const auto& t : terms_) {
    d = std::max(d, std::abs(t.coeff - std::conj(coefficient(t.key.beta, t.key.alpha))));
  }
  return d;
}

int HamiltonianPoly::max_degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.key.degree());
  return d;
}

HamiltonianPoly HamiltonianPoly::operator+(const HamiltonianPoly& other) const {
  PolyBuilder b(modes_, std::min(degree_cap_, other.degree_cap_));
  b.reserve(size() + other.size());
  b.add(*this);
  b.add(other);
  return b.build();
}

HamiltonianPoly HamiltonianPoly::operator-(const HamiltonianPoly& other) const {
  PolyBuilder b(modes_, std::min(degree_cap_, other.degree_cap_));
  b.reserve(size() + other.size());
  b.add(*this);
  b.add(other, Complex{-1.0});
  return b.build();
}

HamiltonianPoly HamiltonianPoly::operator*(Complex s) const {
  HamiltonianPoly out(modes_, degree_cap_);
  if (s == Complex{}) return out;
  out.terms_ = terms_;
  for (auto& t : out.terms_) t.coeff *= s;
  out.constant_ = constant_ * s;
  out.prune_eps_ = prune_eps_ * std::abs(s);
  return out;
}

HamiltonianPoly HamiltonianPoly::with_constant(Complex c) const {
  HamiltonianPoly out = *this;
  out.constant_ = c;
  return out;
}

HamiltonianPoly HamiltonianPoly::with_degree_cap(int cap) const {
  HamiltonianPoly out(modes_, cap);
  out.constant_ = constant_;
  out.prune_eps_ = prune_eps_;
  for (const auto& t : terms_)
    if (t.key.degree() <= cap) out.terms_.push_back(t);
  return out;
}

HamiltonianPoly HamiltonianPoly::filtered(const std::function<bool(const Term&)>& pred,
                                          bool keep_constant) const {
  HamiltonianPoly out(modes_, degree_cap_);
  out.prune_eps_ = prune_eps_;
  out.constant_ = keep_constant ? constant_ : Complex{};
  for (const auto& t : terms_)
    if (pred(t)) out.terms_.push_back(t);
  return out;
}

HamiltonianPoly HamiltonianPoly::mapped(const std::function<Complex(const Term&)>& f) const {
  HamiltonianPoly out(modes_, degree_cap_);
  out.prune_eps_ = prune_eps_;
  out.constant_ = constant_;
  out.terms_.reserve(terms_.size());
  for (const auto& t : terms_) {
    const Complex c = f(t);
    if (c != Complex{}) out.terms_.push_back({t.key, c});
  }
  return out;
}

// ---------------------------------------------------------------------------
// PolyBuilder

PolyBuilder::PolyBuilder(ModeSet modes, int degree_cap) : modes_(std::move(modes)), degree_cap_(degree_cap) {}

void PolyBuilder::add(const MonomialKey& key, Complex c) {
  if (!is_admissible_pair(key.alpha, key.beta)) {
    throw DomainError("non-admissible monomial " + key.alpha.to_string() + "/" + key.beta.to_string());
  }
  if (!supported_on(key.alpha, modes_) || !supported_on(key.beta, modes_)) {
    throw DomainError("monomial outside the mode window: " + key.alpha.to_string() + "/" + key.beta.to_string());
  }
  add_trusted(key, c);
}

void PolyBuilder::add_trusted(const MonomialKey& key, Complex c) {
  if (key.is_constant()) {
    constant_ += c;
    return;
  }
  if (key.degree() > degree_cap_) return;
  acc_[key] += c;
}

void PolyBuilder::add(const HamiltonianPoly& h, Complex scale) {
  constant_ += scale * h.constant();
  for (const auto& t : h.terms()) {
    if (t.key.degree() <= degree_cap_) acc_[t.key] += scale * t.coeff;
  }
}

HamiltonianPoly PolyBuilder::build(PruneRule rule, bool enforce_reality) {
  if (enforce_reality) {
    std::vector<MonomialKey> missing;
    for (const auto& [k, c] : acc_) {
      if (k.beta < k.alpha && !acc_.contains(k.conjugate())) missing.push_back(k.conjugate());
    }
    for (const auto& k : missing) acc_[k] = Complex{};
    for (auto& [k, c] : acc_) {
      if (k.alpha == k.beta) {
        c = Complex{c.real(), 0.0};
      } else if (k.alpha < k.beta) {
        auto it = acc_.find(k.conjugate());
        if (it == acc_.end()) {
          c *= 0.5;
          acc_[k.conjugate()] = std::conj(c);  // unreachable after the pass above
          continue;
        }
        const Complex v = 0.5 * (c + std::conj(it->second));
        c = v;
        it->second = std::conj(v);
      }
    }
    constant_ = Complex{constant_.real(), 0.0};
  }

  double max_abs = 0.0;
  for (const auto& [k, c] : acc_) max_abs = std::max(max_abs, std::abs(c));
  const double eps = std::max(rule.absolute, rule.relative * max_abs);

  HamiltonianPoly out(modes_, degree_cap_);
  out.prune_eps_ = eps;
  out.constant_ = constant_;
  out.terms_.reserve(acc_.size());
  dropped_mass_ = 0.0;
  for (const auto& [k, c] : acc_) {
    const double a = std::abs(c);
    if (a == 0.0) continue;
    if (a < eps) {
      dropped_mass_ += a;
      continue;
    }
    out.terms_.push_back({k, c});
  }
  std::sort(out.terms_.begin(), out.terms_.end(), [](const Term& x, const Term& y) { return x.key < y.key; });
  acc_.clear();
  constant_ = Complex{};
  return out;
}

// ---------------------------------------------------------------------------
// Norms, frequencies

double NormParams::weight(Mode j) const { return r * std::pow(sobolev_bracket(j), -p); }

FrequencyVector::FrequencyVector(ModeSet modes, std::vector<double> values)
    : modes_(std::move(modes)), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != modes_.size()) {
    throw DomainError("FrequencyVector: expected " + std::to_string(modes_.size()) + " entries");
  }
}

FrequencyVector FrequencyVector::integer_squares(const ModeSet& modes) {
  std::vector<double> v;
  for (Mode j : modes.all()) v.push_back(double(j) * j);
  return FrequencyVector(modes, std::move(v));
}

FrequencyVector FrequencyVector::with(Mode j, double value) const {
  FrequencyVector out = *this;
  out.values_[modes_.slot(j)] = value;
  return out;
}

double FrequencyVector::dot(const SignedIndexVector& l) const {
  double s = 0.0;
  for (const auto& [j, v] : l.entries()) s += values_[modes_.slot(j)] * v;
  return s;
}

double FrequencyVector::dot(const MultiIndex& alpha, const MultiIndex& beta) const {
  double s = 0.0;
  alpha.for_each([&](Mode j, int k) { s += values_[modes_.slot(j)] * k; });
  beta.for_each([&](Mode j, int k) { s -= values_[modes_.slot(j)] * k; });
  return s;
}

bool FrequencyVector::in_box() const {
  for (Mode j : modes_.all()) {
    if (!(std::abs(values_[modes_.slot(j)] - double(j) * j) < 0.5)) return false;
  }
  return true;
}

double FrequencyVector::sup_distance(const FrequencyVector& other) const {
  double d = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) d = std::max(d, std::abs(values_[i] - other.values_[i]));
  return d;
}

HamiltonianPoly frequency_hamiltonian(const FrequencyVector& omega, int degree_cap) {
  PolyBuilder b(omega.modes(), degree_cap);
  for (Mode j : omega.modes().all()) {
    if (omega[j] != 0.0) b.add_trusted({MultiIndex::unit(j), MultiIndex::unit(j)}, omega[j]);
  }
  return b.build(PruneRule{0.0, 0.0});
}

// ---------------------------------------------------------------------------
// NLS

HamiltonianPoly build_nls(const NonlinearityModel& model, std::span<const double> potential,
                          const ModeSet& modes, int degree_cap) {
  if (degree_cap < 4) throw DomainError("build_nls: degree_cap must be >= 4");
  if (degree_cap % 2 != 0) throw DomainError("build_nls: degree_cap must be even");
  if (static_cast<int>(potential.size()) != modes.size()) {
    throw DomainError("build_nls: potential must have one entry per mode");
  }
  for (double v : potential) {
    if (!(std::abs(v) <= 0.5)) throw DomainError("build_nls: potential outside [-1/2, 1/2]");
  }

  PolyBuilder b(modes, degree_cap);
  for (Mode j : modes.all()) {
    const double c = double(j) * j + potential[modes.slot(j)];
    if (c != 0.0) b.add_trusted({MultiIndex::unit(j), MultiIndex::unit(j)}, c);
  }

  const std::vector<Mode> all = modes.all();
  const int d_max = std::min<int>(static_cast<int>(model.coeffs.size()), (degree_cap - 2) / 2);
  for (int d = 1; d <= d_max; ++d) {
    const double fd = model.coeffs[d - 1];
    if (fd == 0.0) continue;
    const int n = d + 1;
    // Multisets of size n grouped by momentum.
    std::map<long, std::vector<MultiIndex>> by_momentum;
    std::vector<int> idx(n, 0);
    while (true) {
      std::vector<std::pair<Mode, int>> e;
      long p = 0;
      for (int k : idx) {
        e.emplace_back(all[k], 1);
        p += all[k];
      }
      by_momentum[p].push_back(MultiIndex::from_entries(e));
      int pos = n - 1;
      while (pos >= 0 && idx[pos] == static_cast<int>(all.size()) - 1) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int k = pos + 1; k < n; ++k) idx[k] = idx[pos];
    }
    const double nf = factorial(n);
    for (const auto& [p, group] : by_momentum) {
      std::vector<double> w;
      w.reserve(group.size());
      for (const auto& a : group) w.push_back(nf / multi_factorial(a));
      for (std::size_t i = 0; i < group.size(); ++i) {
        for (std::size_t k = 0; k < group.size(); ++k) {
          b.add_trusted({group[i], group[k]}, fd / n * w[i] * w[k]);
        }
      }
    }
  }
  return b.build(PruneRule{0.0, 0.0});
}

// ---------------------------------------------------------------------------
// Poisson bracket

namespace {

struct IndexEntry {
  std::uint32_t term;
  int exponent;
  int degree;
  MultiIndex reduced;  // the multi-index with one copy of the shared mode removed
};

// For each slot s: terms whose alpha (resp. beta) contains mode s, sorted by degree.
struct BracketIndex {
  std::vector<std::vector<IndexEntry>> by_alpha;
  std::vector<std::vector<IndexEntry>> by_beta;
};

BracketIndex make_index(const HamiltonianPoly& g) {
  const ModeSet& modes = g.modes();
  BracketIndex ix;
  ix.by_alpha.resize(modes.size());
  ix.by_beta.resize(modes.size());
  const auto terms = g.terms();
  for (std::uint32_t i = 0; i < terms.size(); ++i) {
    const auto& k = terms[i].key;
    const int deg = k.degree();
    k.alpha.for_each([&](Mode j, int e) { ix.by_alpha[modes.slot(j)].push_back({i, e, deg, k.alpha.remove(j)}); });
    k.beta.for_each([&](Mode j, int e) { ix.by_beta[modes.slot(j)].push_back({i, e, deg, k.beta.remove(j)}); });
  }
  auto by_degree = [](const IndexEntry& a, const IndexEntry& b) { return a.degree < b.degree; };
  for (auto& v : ix.by_alpha) std::stable_sort(v.begin(), v.end(), by_degree);
  for (auto& v : ix.by_beta) std::stable_sort(v.begin(), v.end(), by_degree);
  return ix;
}

}  // namespace

HamiltonianPoly poisson_bracket(const HamiltonianPoly& f, const HamiltonianPoly& g) {
  if (!(f.modes() == g.modes())) throw DomainError("poisson_bracket: incompatible mode sets");
  const int cap = std::min(f.degree_cap(), g.degree_cap());
  const ModeSet& modes = f.modes();
  PolyBuilder out(modes, cap);
  if (f.size() == 0 || g.size() == 0) return out.build();

  const BracketIndex ix = make_index(g);
  const auto gt = g.terms();
  for (const auto& tf : f.terms()) {
    const int df = tf.key.degree();
    const int max_dg = cap + 2 - df;
    if (max_dg < 2) continue;
    const Complex cf = tf.coeff;
    // + i ∂_{ū_j}F ∂_{u_j}G
    tf.key.beta.for_each([&](Mode j, int bf) {
      const MultiIndex beta_f = tf.key.beta.remove(j);
      for (const auto& e : ix.by_alpha[modes.slot(j)]) {
        if (e.degree > max_dg) break;
        const Term& tg = gt[e.term];
        const Complex c = kI * cf * tg.coeff * double(bf * e.exponent);
        out.add_trusted({tf.key.alpha + e.reduced, beta_f + tg.key.beta}, c);
      }
    });
    // − i ∂_{u_j}F ∂_{ū_j}G
    tf.key.alpha.for_each([&](Mode j, int af) {
      const MultiIndex alpha_f = tf.key.alpha.remove(j);
      for (const auto& e : ix.by_beta[modes.slot(j)]) {
        if (e.degree > max_dg) break;
        const Term& tg = gt[e.term];
        const Complex c = -kI * cf * tg.coeff * double(af * e.exponent);
        out.add_trusted({alpha_f + tg.key.alpha, tf.key.beta + e.reduced}, c);
      }
    });
  }
  return out.build(PruneRule{}, /*enforce_reality=*/false);
}

// ---------------------------------------------------------------------------
// Norms and evaluation

double weighted_norm(const HamiltonianPoly& h, const NormParams& params) {
  const ModeSet& modes = h.modes();
  std::vector<double> w(modes.size());
  std::vector<double> inv_w2(modes.size());
  for (Mode j : modes.all()) {
    w[modes.slot(j)] = params.weight(j);
    inv_w2[modes.slot(j)] = 1.0 / (w[modes.slot(j)] * w[modes.slot(j)]);
  }
  std::vector<double> sums(modes.size(), 0.0);
  std::array<std::pair<int, int>, 2 * MultiIndex::kSlots> support{};
  for (const auto& t : h.terms()) {
    const MultiIndex ab = t.key.alpha + t.key.beta;
    double weight = 1.0;
    int n = 0;
    ab.for_each([&](Mode j, int e) {
      const int s = modes.slot(j);
      weight *= std::pow(w[s], e);
      support[n++] = {s, e};
    });
    const double a = std::abs(t.coeff) * weight;
    for (int i = 0; i < n; ++i) sums[support[i].first] += a * support[i].second * inv_w2[support[i].first];
  }
  double m = 0.0;
  for (double s : sums) m = std::max(m, s);
  return 0.5 * m;
}

double lipschitz_norm(const std::function<HamiltonianPoly(const FrequencyVector&)>& family,
                      std::span<const FrequencyVector> samples, double gamma, const NormParams& params) {
  if (samples.size() < 2) throw DegenerateInputError("lipschitz_norm: need at least two frequency samples");
  std::vector<HamiltonianPoly> values;
  values.reserve(samples.size());
  double sup = 0.0;
  for (const auto& w : samples) {
    values.push_back(family(w));
    sup = std::max(sup, weighted_norm(values.back(), params));
  }
  double quotient = 0.0;
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      const double dist = samples[a].sup_distance(samples[b]);
      if (dist == 0.0) continue;
      quotient = std::max(quotient, weighted_norm(values[a] - values[b], params) / dist);
    }
  }
  return sup + gamma * quotient;
}

namespace {

Complex monomial_value(const MonomialKey& k, std::span<const Complex> u, const ModeSet& modes) {
  Complex v{1.0};
  k.alpha.for_each([&](Mode j, int e) {
    const Complex x = u[modes.slot(j)];
    for (int i = 0; i < e; ++i) v *= x;
  });
  k.beta.for_each([&](Mode j, int e) {
    const Complex x = std::conj(u[modes.slot(j)]);
    for (int i = 0; i < e; ++i) v *= x;
  });
  return v;
}

}  // namespace

Evaluation evaluate_and_field(const HamiltonianPoly& h, std::span<const Complex> u) {
  const ModeSet& modes = h.modes();
  if (static_cast<int>(u.size()) != modes.size()) throw DomainError("evaluate_and_field: wrong vector length");
  Evaluation out{h.constant(), FieldVector(modes.size())};
  for (const auto& t : h.terms()) {
    out.value += t.coeff * monomial_value(t.key, u, modes);
    t.key.beta.for_each([&](Mode j, int e) {
      const MonomialKey reduced{t.key.alpha, t.key.beta.remove(j)};
      out.field[modes.slot(j)] += -kI * t.coeff * double(e) * monomial_value(reduced, u, modes);
    });
  }
  return out;
}

Complex evaluate(const HamiltonianPoly& h, std::span<const Complex> u) {
  const ModeSet& modes = h.modes();
  if (static_cast<int>(u.size()) != modes.size()) throw DomainError("evaluate: wrong vector length");
  Complex v = h.constant();
  for (const auto& t : h.terms()) v += t.coeff * monomial_value(t.key, u, modes);
  return v;
}

double f_majorant(const NonlinearityModel& model) {
  double s = 0.0;
  double rd = 1.0;
  for (double c : model.coeffs) {
    rd *= model.radius;
    s += std::abs(c) * rd;
  }
  return s;
}

double smallness_parameter(const NonlinearityModel& model, double gamma, double r) {
  if (!(gamma > 0.0) || !(model.radius > 0.0)) throw DomainError("smallness_parameter: gamma and R must be positive");
  return f_majorant(model) / (gamma * model.radius) * r * r;
}

}  // namespace kamlab
