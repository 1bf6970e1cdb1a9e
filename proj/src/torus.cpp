#include "kamlab/torus.hpp"

#include <algorithm>
#include <cmath>

#include "kamlab/error.hpp"

namespace kamlab {

namespace {

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// Splits α into its tangential and normal parts.
std::pair<MultiIndex, MultiIndex> split_tangential(const MultiIndex& a, const ModeSet& modes) {
  std::pair<Mode, int> t[MultiIndex::kSlots];
  std::pair<Mode, int> n[MultiIndex::kSlots];
  int nt = 0;
  int nn = 0;
  a.for_each([&](Mode j, int e) {
    if (modes.is_tangential(j)) {
      t[nt++] = {j, e};
    } else {
      n[nn++] = {j, e};
    }
  });
  return {MultiIndex::from_entries({t, std::size_t(nt)}), MultiIndex::from_entries({n, std::size_t(nn)})};
}

int normal_count(const MultiIndex& a, const ModeSet& modes) {
  int n = 0;
  a.for_each([&](Mode j, int e) {
    if (!modes.is_tangential(j)) n += e;
  });
  return n;
}

// Calls f(k, weight) for every k ⪯ m, where weight = Π_j w(j, m_j, k_j).
template <class W, class F>
void for_each_sub_index(const MultiIndex& m, W&& w, F&& f) {
  const auto entries = m.entries();
  const std::size_t n = entries.size();
  std::vector<int> k(n, 0);
  std::vector<std::pair<Mode, int>> sub;
  for (;;) {
    double weight = 1.0;
    sub.clear();
    for (std::size_t i = 0; i < n; ++i) {
      weight *= w(entries[i].first, entries[i].second, k[i]);
      if (k[i] > 0) sub.emplace_back(entries[i].first, k[i]);
    }
    if (weight != 0.0) f(MultiIndex::from_entries(sub), weight);
    std::size_t pos = 0;
    while (pos < n && k[pos] == entries[pos].second) k[pos++] = 0;
    if (pos == n) break;
    ++k[pos];
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// TorusData

TorusData::TorusData(ModeSet modes, std::vector<double> actions, NormParams params)
    : modes_(std::move(modes)), actions_(std::move(actions)), params_(params) {
  if (static_cast<int>(actions_.size()) != modes_.size()) {
    throw DomainError("TorusData: expected one action per mode");
  }
  if (!(params_.r > 0.0) || !(params_.p > 1.0)) throw DomainError("TorusData: need r > 0 and p > 1");
  for (Mode j : modes_.all()) {
    const double a = actions_[modes_.slot(j)];
    if (!(a >= 0.0)) throw DomainError("TorusData: negative action at mode " + std::to_string(j));
    if (a != 0.0 && !modes_.is_tangential(j)) {
      throw DomainError("TorusData: nonzero action on normal mode " + std::to_string(j));
    }
    if (std::sqrt(a) * std::pow(sobolev_bracket(j), params_.p) > params_.r * (1.0 + 1e-12)) {
      throw DomainError("TorusData: sqrt(I) outside the radius-r ball at mode " + std::to_string(j));
    }
  }
}

TorusData TorusData::power_law(const ModeSet& modes, NormParams params, double fill, double exponent) {
  if (!(fill >= 0.0 && fill <= 1.0)) throw DomainError("TorusData::power_law: fill must lie in [0, 1]");
  if (!(exponent >= params.p)) throw DomainError("TorusData::power_law: exponent must be >= p");
  std::vector<double> a(modes.size(), 0.0);
  for (Mode j : modes.tangential()) {
    const double s = fill * params.r * std::pow(sobolev_bracket(j), -exponent);
    a[modes.slot(j)] = s * s;
  }
  return TorusData(modes, std::move(a), params);
}

FieldVector TorusData::point(std::span<const double> phases) const {
  FieldVector u(modes_.size());
  for (std::size_t s = 0; s < u.size(); ++s) {
    if (actions_[s] > 0.0) u[s] = std::polar(std::sqrt(actions_[s]), phases[s]);
  }
  return u;
}

// ---------------------------------------------------------------------------
// CenteredPoly

int centered_degree(const CenteredKey& key, const ModeSet& modes) {
  return 2 * key.delta.total() + normal_count(key.alpha, modes) + normal_count(key.beta, modes) - 2;
}

CenteredPoly::CenteredPoly(TorusData torus, int degree_cap) : torus_(std::move(torus)), degree_cap_(degree_cap) {}

Complex CenteredPoly::coefficient(const CenteredKey& key) const {
  if (key.is_constant()) return constant_;
  const auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                                   [](const CenteredTerm& t, const CenteredKey& k) { return t.key < k; });
  return it != terms_.end() && it->key == key ? it->coeff : Complex{};
}

double CenteredPoly::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.coeff));
  return m;
}

CenteredPoly CenteredPoly::filtered(const std::function<bool(const CenteredTerm&)>& pred, bool keep_constant) const {
  CenteredPoly out(torus_, degree_cap_);
  out.constant_ = keep_constant ? constant_ : Complex{};
  for (const auto& t : terms_)
    if (pred(t)) out.terms_.push_back(t);
  return out;
}

CenteredBuilder::CenteredBuilder(TorusData torus, int degree_cap)
    : torus_(std::move(torus)), degree_cap_(degree_cap) {}

void CenteredBuilder::add(const CenteredKey& key, Complex c) {
  if (key.is_constant()) {
    constant_ += c;
    return;
  }
  if (2 * key.delta.total() + key.alpha.total() + key.beta.total() > degree_cap_) return;
  acc_[key] += c;
}

CenteredPoly CenteredBuilder::build(PruneRule rule) {
  double max_abs = 0.0;
  for (const auto& [k, c] : acc_) max_abs = std::max(max_abs, std::abs(c));
  const double eps = std::max(rule.absolute, rule.relative * max_abs);
  CenteredPoly out(torus_, degree_cap_);
  out.constant_ = constant_;
  out.terms_.reserve(acc_.size());
  for (const auto& [k, c] : acc_) {
    const double a = std::abs(c);
    if (a == 0.0) continue;
    if (a < eps) {
      out.dropped_mass_ += a;
      continue;
    }
    out.terms_.push_back({k, c});
  }
  std::sort(out.terms_.begin(), out.terms_.end(),
            [](const CenteredTerm& x, const CenteredTerm& y) { return x.key < y.key; });
  acc_.clear();
  constant_ = Complex{};
  return out;
}

// ---------------------------------------------------------------------------
// Conversions

CenteredPoly to_centered(const HamiltonianPoly& h, const TorusData& torus, PruneRule rule) {
  if (!(h.modes() == torus.modes())) throw DomainError("to_centered: torus and Hamiltonian mode sets differ");
  const ModeSet& modes = h.modes();
  CenteredBuilder b(torus, h.degree_cap());
  b.add({}, h.constant());
  for (const auto& t : h.terms()) {
    const auto [at, an] = split_tangential(t.key.alpha, modes);
    const auto [bt, bn] = split_tangential(t.key.beta, modes);
    const MultiIndex m = MultiIndex::common(at, bt);
    const MultiIndex alpha = (at - m) + an;
    const MultiIndex beta = (bt - m) + bn;
    // |v_j|^{2m} = Σ_{δ≤m} C(m,δ) I^{m−δ} (|v_j|²−I_j)^δ
    for_each_sub_index(
        m, [&](Mode j, int mj, int dj) { return binomial(mj, dj) * std::pow(torus.action(j), mj - dj); },
        [&](const MultiIndex& delta, double w) { b.add({delta, alpha, beta}, t.coeff * w); });
  }
  return b.build(rule);
}

HamiltonianPoly to_plain(const CenteredPoly& c, PruneRule rule) {
  const TorusData& torus = c.torus();
  PolyBuilder b(torus.modes(), c.degree_cap());
  b.add_constant(c.constant());
  for (const auto& t : c.terms()) {
    // (|v_j|²−I_j)^δ = Σ_{k≤δ} C(δ,k)(−I_j)^{δ−k}|v_j|^{2k}
    for_each_sub_index(
        t.key.delta, [&](Mode j, int dj, int kj) { return binomial(dj, kj) * std::pow(-torus.action(j), dj - kj); },
        [&](const MultiIndex& k, double w) { b.add_trusted({t.key.alpha + k, t.key.beta + k}, t.coeff * w); });
  }
  return b.build(rule);
}

// ---------------------------------------------------------------------------
// CounterTerm

CounterTerm::CounterTerm(ModeSet modes) : modes_(std::move(modes)), lambda_(modes_.size(), 0.0) {}

CounterTerm::CounterTerm(ModeSet modes, std::vector<double> lambda)
    : modes_(std::move(modes)), lambda_(std::move(lambda)) {
  if (static_cast<int>(lambda_.size()) != modes_.size()) throw DomainError("CounterTerm: one λ per mode expected");
}

double CounterTerm::sup_norm() const {
  double m = 0.0;
  for (double x : lambda_) m = std::max(m, std::abs(x));
  return m;
}

CounterTerm CounterTerm::operator+(const CounterTerm& o) const {
  if (lambda_.empty()) return o;
  if (o.lambda_.empty()) return *this;
  CounterTerm out = *this;
  for (std::size_t i = 0; i < lambda_.size(); ++i) out.lambda_[i] += o.lambda_[i];
  return out;
}

CounterTerm CounterTerm::operator-(const CounterTerm& o) const {
  if (o.lambda_.empty()) return *this;
  CounterTerm out = lambda_.empty() ? CounterTerm(o.modes_) : *this;
  for (std::size_t i = 0; i < o.lambda_.size(); ++i) out.lambda_[i] -= o.lambda_[i];
  return out;
}

HamiltonianPoly CounterTerm::hamiltonian(const TorusData& torus, int degree_cap) const {
  PolyBuilder b(torus.modes(), degree_cap);
  for (Mode j : torus.modes().all()) {
    const double l = lambda_.empty() ? 0.0 : lambda_[modes_.slot(j)];
    if (l == 0.0) continue;
    b.add_trusted({MultiIndex::unit(j), MultiIndex::unit(j)}, l);
    if (torus.modes().is_tangential(j)) b.add_constant(-l * torus.action(j));
  }
  return b.build(PruneRule{0.0, 0.0});
}

CenteredPoly CounterTerm::centered(const TorusData& torus, int degree_cap) const {
  CenteredBuilder b(torus, degree_cap);
  for (Mode j : torus.modes().all()) {
    const double l = lambda_.empty() ? 0.0 : lambda_[modes_.slot(j)];
    if (l == 0.0) continue;
    if (torus.modes().is_tangential(j)) {
      b.add({MultiIndex::unit(j), {}, {}}, l);
    } else {
      b.add({{}, MultiIndex::unit(j), MultiIndex::unit(j)}, l);
    }
  }
  return b.build(PruneRule{0.0, 0.0});
}

// ---------------------------------------------------------------------------
// Projections

bool DegreeSelector::accepts(int degree) const {
  switch (kind) {
    case Kind::Exact:
      return degree == d;
    case Kind::AtMostZero:
      return degree <= 0;
    case Kind::AtLeastOne:
      return degree >= 1;
  }
  return false;
}

CenteredPoly project_degree(const CenteredPoly& c, DegreeSelector sel) {
  if (sel.kind == DegreeSelector::Kind::Exact && sel.d < -2) {
    throw DomainError("project_degree: degree " + std::to_string(sel.d) + " < -2");
  }
  const ModeSet& modes = c.modes();
  return c.filtered([&](const CenteredTerm& t) { return sel.accepts(centered_degree(t.key, modes)); }, false);
}

HamiltonianPoly project_kernel(const HamiltonianPoly& h, KernelPart part) {
  const bool want_kernel = part == KernelPart::Kernel;
  return h.filtered([&](const Term& t) { return t.key.is_kernel() == want_kernel; }, false);
}

CenteredPoly project_kernel(const CenteredPoly& c, KernelPart part) {
  const bool want_kernel = part == KernelPart::Kernel;
  return c.filtered([&](const CenteredTerm& t) { return t.key.is_kernel() == want_kernel; }, false);
}

CounterTerm extract_counterterm(const CenteredPoly& c) {
  const ModeSet& modes = c.modes();
  std::vector<double> lambda(modes.size(), 0.0);
  for (const auto& t : c.terms()) {
    if (!t.key.is_kernel() || centered_degree(t.key, modes) != 0) continue;
    // Degree-0 kernel keys: δ = e_j (j tangential) or a = b = e_j (j normal).
    const Mode j = t.key.delta.empty() ? t.key.alpha.entries()[0].first : t.key.delta.entries()[0].first;
    lambda[modes.slot(j)] += t.coeff.real();
  }
  return CounterTerm(modes, std::move(lambda));
}

DegreeParts split_degrees(const HamiltonianPoly& h, const TorusData& torus, PruneRule rule) {
  const CenteredPoly c = to_centered(h, torus, rule);
  const ModeSet& modes = h.modes();
  const int cap = h.degree_cap();
  CenteredBuilder m2(torus, cap), m1(torus, cap), zr(torus, cap), zk(torus, cap), ge1(torus, cap);
  for (const auto& t : c.terms()) {
    const int d = centered_degree(t.key, modes);
    if (d == -2) {
      m2.add(t.key, t.coeff);
    } else if (d == -1) {
      m1.add(t.key, t.coeff);
    } else if (d == 0) {
      (t.key.is_kernel() ? zk : zr).add(t.key, t.coeff);
    } else {
      ge1.add(t.key, t.coeff);
    }
  }
  const PruneRule exact{0.0, 0.0};
  return DegreeParts{c.constant(),
                     to_plain(m2.build(exact), exact),
                     to_plain(m1.build(exact), exact),
                     to_plain(zr.build(exact), exact),
                     extract_counterterm(zk.build(exact)),
                     to_plain(ge1.build(exact), exact)};
}

double normal_form_defect(const HamiltonianPoly& n, const FrequencyVector& omega, const TorusData& torus) {
  const HamiltonianPoly diff = n - frequency_hamiltonian(omega, n.degree_cap());
  const CenteredPoly low = project_degree(to_centered(diff, torus), DegreeSelector::at_most_zero());
  return weighted_norm(to_plain(low), torus.params());
}

bool is_normal_form(const HamiltonianPoly& n, const FrequencyVector& omega, const TorusData& torus, double tol) {
  return normal_form_defect(n, omega, torus) <= tol;
}

}  // namespace kamlab
