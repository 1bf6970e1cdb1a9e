#pragma once

// The counterterm KAM iteration: Lie transforms, the triangular homological
// system solved affinely in the counterterm, the n-step loop with its
// (r_n, p_n) schedule, the frequency-map fixed point, and torus checks.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kamlab/homological.hpp"
#include "kamlab/torus.hpp"

namespace kamlab {

/// ρ_n = (ρ/6)2^{−n}, δ₀ = δ/8, δ_n = 9δ/(4π²n²); r_{n+1} = r_n − 3ρ_n, p_{n+1} = p_n + 3δ_n.
struct KamSchedule {
  double r0 = 1.0;
  double rho = 0.5;
  double p0 = 1.5;
  double delta = 1.0;
  static constexpr double chi = 1.5;

  /// Throws DomainError unless r₀, ρ, δ > 0, p₀ ≥ 0 and ρ ≤ r₀/2.
  void validate() const;
  double rho_n(int n) const;
  double delta_n(int n) const;
  double r_n(int n) const;
  double p_n(int n) const;
  double r_inf() const { return r0 - rho; }
  /// p₀ + Σ 3δ_n = p₀ + 3δ/2.
  double p_inf() const;
  NormParams norm(int n) const { return {r_n(n), p_n(n)}; }
};

struct KamParams {
  DiophParams dioph;
  int degree_cap = 6;
  int order_cap = 8;
  double floor = 1e-13;
  PruneRule prune{1e-14, 0.0};
  bool enforce_dioph = true;
  /// Warn when ε_n(1+Θ_n)⁵ exceeds this.
  double smallness_limit = 1e-2;
};

/// The ε and Θ functionals of a Hamiltonian, with the pieces they are built from.
struct KamNorms {
  double zero_kernel = 0.0;  // ‖Π^{0,K}G‖_∞
  double zero_range = 0.0;
  double m2 = 0.0;
  double m1 = 0.0;
  double ge1 = 0.0;
  double eps = 0.0;    // γ⁻¹(zero_kernel + zero_range + m2 + m1)
  double theta = 0.0;  // γ⁻¹ ge1 + ε
};
KamNorms kam_norms(const DegreeParts& parts, const NormParams& np, double gamma);
KamNorms kam_norms(const HamiltonianPoly& g, const TorusData& torus, const NormParams& np, double gamma);

/// λ ↦ Σ_j λ_j c_j with one column per mode of the window.
class CorrectionOperator {
 public:
  CorrectionOperator() = default;
  CorrectionOperator(ModeSet modes, int degree_cap);
  CorrectionOperator(ModeSet modes, std::vector<HamiltonianPoly> columns);

  const ModeSet& modes() const { return modes_; }
  const HamiltonianPoly& column(Mode j) const { return columns_[modes_.slot(j)]; }
  std::span<const HamiltonianPoly> columns() const { return columns_; }
  bool is_zero() const;
  HamiltonianPoly apply(const CounterTerm& h) const;
  /// Σ_j ‖c_j‖, an upper bound for sup_{‖h‖_∞ ≤ 1} ‖L h‖.
  double operator_bound(const NormParams& np) const;

 private:
  ModeSet modes_;
  std::vector<HamiltonianPoly> columns_;
};

/// H_n = D(ω) + G_n + (Id + L_n)Λ_n with Λ_n the remaining free parameters.
struct KamState {
  int n = 0;
  HamiltonianPoly G;
  CorrectionOperator L;
  std::vector<HamiltonianPoly> S_history;
  std::vector<CounterTerm> lambda_bar_history;
  KamNorms norms;
  double theta0 = 0.0;
};

KamState initial_state(const HamiltonianPoly& g0, const TorusData& torus, const KamSchedule& schedule,
                       const KamParams& params);

struct LieStats {
  int terms_used = 0;
  std::vector<double> term_norms;
  /// Norm of the last nonzero term added.
  double tail_estimate = 0.0;
};

/// Σ_{h ≤ order_cap} ad_S^h H / h!, stopping at the first vanishing term.
/// Throws PreconditionError when S has kernel monomials or a constant, and
/// DivergenceError when a term (h ≥ 2) is not smaller than its predecessor.
HamiltonianPoly lie_transform(const HamiltonianPoly& h, const HamiltonianPoly& s, int order_cap,
                              const NormParams& np = {}, LieStats* stats = nullptr);

/// e^{{S,·}}H − H, summed without forming H + (small).
HamiltonianPoly lie_increment(const HamiltonianPoly& h, const HamiltonianPoly& s, int order_cap,
                              const NormParams& np = {}, LieStats* stats = nullptr);

/// (Id + M)λ̄ = rhs on the mode-indexed λ space; M is row-major.
struct CountertermSystem {
  ModeSet modes;
  std::vector<double> M;
  std::vector<double> rhs;
};

struct CountertermSolution {
  CounterTerm lambda_bar;
  double m_norm = 0.0;  // ‖M‖_{∞→∞}
  bool warning = false;  // 1/2 < ‖M‖ < 1
};

/// Dense solve; throws DivergenceError when ‖M‖_{∞→∞} ≥ 1.
CountertermSolution solve_counterterm(const CountertermSystem& system);

struct StepReport {
  int n = 0;
  double r_n = 0.0;
  double p_n = 0.0;
  double eps = 0.0;
  double theta = 0.0;
  double lambda_bar = 0.0;  // ‖Λ̄_n‖_∞
  double min_divisor = 0.0;
  double m_norm = 0.0;
  double s_norm = 0.0;  // ‖S_n‖ at (r_{n+1}, p_{n+1})
  double l_step_bound = 0.0;  // bound on ‖(L_{n+1} − L_n)h‖ for ‖h‖_∞ ≤ 1
  double smallness = 0.0;  // ε_n(1+Θ_n)⁵
  int lie_terms = 0;
  std::size_t g_terms = 0;
  std::vector<std::string> warnings;
};

/// One step of the iteration. Homological rejections propagate as
/// NonDiophantineError carrying the offending ℓ.
KamState kam_step(const KamState& state, const FrequencyVector& omega, const TorusData& torus,
                  const KamSchedule& schedule, const KamParams& params, StepReport* report = nullptr);

struct PipelineResult {
  HamiltonianPoly N;            // D(ω) + G_final
  HamiltonianPoly G;            // G_final, kept apart to avoid the cancellation in N − D(ω)
  std::vector<HamiltonianPoly> S;  // S_0, S_1, ...
  CounterTerm lambda;           // Σ Λ̄_i
  std::vector<StepReport> table;  // one row per state, the last without a step
  bool converged = false;       // ε fell below the floor
  /// log ε_{n+1} / log ε_n per step above the floor.
  std::vector<double> decay_exponents;
  /// max_n (log ε_{n+1} − χ log ε_n).
  double c_fit = 0.0;
  bool decay_ok = true;
  std::vector<std::string> warnings;
};

/// Iterates until n_steps or ε_n < floor. G₀ = H₀ − D(ω) without counterterms.
PipelineResult run_kam(const HamiltonianPoly& g0, const FrequencyVector& omega, const TorusData& torus,
                       const KamSchedule& schedule, const KamParams& params, int n_steps);

/// Time-t flow of u̇_j = −i ∂S/∂ū_j (dopri5, adaptive).
FieldVector hamiltonian_flow(const HamiltonianPoly& s, std::span<const Complex> u, double t, double tol = 1e-13);

/// Ψ(u) = Φ_{−S_0} ∘ … ∘ Φ_{−S_{n−1}}(u) by numerical integration, so that
/// (D + G₀ + Λ) ∘ Ψ = N.
FieldVector conjugating_map(std::span<const HamiltonianPoly> S, std::span<const Complex> u, double tol = 1e-13);

struct ConjugacyReport {
  std::size_t points = 0;
  double max_abs_error = 0.0;
  double scale = 0.0;  // max over points of |N(u)|
  double max_rel_error = 0.0;  // max_abs_error / scale
  /// Per S_i, sup over points of ‖Φ_{S_i}(u) − u‖ in the sup-weighted p-norm.
  std::vector<double> displacements;
};

/// Compares (D + G₀ + Λ)∘Ψ with N at random points u with
/// |u_j| ≤ (radius) ⟨⟨j⟩⟩^{−p}.
ConjugacyReport conjugacy_check(const HamiltonianPoly& h0_with_lambda, const PipelineResult& result, double radius,
                                double p, std::size_t n_points, std::uint64_t seed);

/// Maps a frequency vector to the total counterterm of a KAM run.
using CountertermMap = std::function<CounterTerm(const FrequencyVector&)>;

struct FrequencyMapOptions {
  double tol = 1e-12;
  int max_iterations = 50;
};

struct FrequencyMapResult {
  FrequencyVector omega;     // (ν, Ω(ν))
  std::vector<double> V;     // by slot
  CounterTerm lambda;
  int iterations = 0;
  double residual = 0.0;     // last sup |Ω_{k+1} − Ω_k|
  double lipschitz_estimate = 0.0;
  double omega_shift = 0.0;  // sup_{j∈S^c} |Ω_j − j² − W_j|
  std::vector<double> residual_history;
};

/// Fixed point Ω_j = j² + W_j − λ_j(ν, Ω) on the normal sites, then
/// V_j = ν_j + λ_j − j² on S and V_j = W_j on S^c. nu and W are indexed by
/// slot (entries off their sites are ignored). Throws DivergenceError when
/// the increments stop shrinking or the measured Lipschitz constant reaches 1/2.
FrequencyMapResult solve_frequency_map(const CountertermMap& lambda, const ModeSet& modes, std::span<const double> nu,
                                       std::span<const double> W, const FrequencyMapOptions& options = {});

/// sup over random phases of sup_j |X_{H−D(ω)}(u)_j| ⟨⟨j⟩⟩^p / r on T_I, with
/// (r, p) the torus parameters. No precondition.
double torus_field_residual(const HamiltonianPoly& h, const FrequencyVector& omega, const TorusData& torus,
                            std::size_t n_phase_samples, std::uint64_t seed);
/// The same quantity for a perturbation G = H − D(ω) given directly.
double perturbation_field_residual(const HamiltonianPoly& g, const TorusData& torus, std::size_t n_phase_samples,
                                   std::uint64_t seed);
/// Same, requiring normal_form_defect(N) ≤ normal_form_tol (else PreconditionError).
double torus_residual(const HamiltonianPoly& n, const FrequencyVector& omega, const TorusData& torus,
                      std::size_t n_phase_samples, std::uint64_t seed, double normal_form_tol = 1e-8);

/// u(t, x) = Σ_j √I_j e^{i(ω_j t + φ_j + j x)}, row-major over (times, xs); phases by slot.
std::vector<Complex> sample_trajectory(const TorusData& torus, const FrequencyVector& omega,
                                       std::span<const double> phases, std::span<const double> times,
                                       std::span<const double> xs);

struct HolderDiagnostic {
  std::vector<double> h;
  std::vector<double> increment;  // max_t |u(t+h, x) − u(t, x)|
  double exponent = 0.0;          // least-squares slope of log increment against log h
};

/// Increments of t ↦ u(t, x) over n_t points of [0, 2π) for each h.
HolderDiagnostic holder_diagnostic(const TorusData& torus, const FrequencyVector& omega,
                                   std::span<const double> phases, double x, std::span<const double> hs,
                                   std::size_t n_t);

}  // namespace kamlab
