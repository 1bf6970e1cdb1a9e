#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

#include "kamlab/homological.hpp"

namespace kamlab::lab {

namespace {

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  Report& rep;

  void log(const std::string& s) const {
    if (opt.verbose) std::cerr << "[" << rep.command << "] " << s << "\n";
  }
};

json by_mode(const ModeSet& modes, std::span<const double> v, bool tangential_only = false) {
  json j = json::object();
  for (Mode m : modes.all()) {
    if (tangential_only && !modes.is_tangential(m)) continue;
    j[std::to_string(m)] = v[modes.slot(m)];
  }
  return j;
}

json witness_json(const DcWitness& w) {
  return {{"l", w.l.to_string()}, {"divisor", w.divisor}, {"weight", w.weight}, {"margin", w.margin()}};
}

Scenario scenario(Context& c) {
  Scenario sc = make_scenario(scenario_spec(c.cfg), kam_params(c.cfg));
  for (const auto& w : sc.warnings) c.rep.warnings.push_back(w);
  c.log("scenario ready: eps0 = " + format_number(sc.eps0) + ", " + std::to_string(sc.g0.size()) + " terms, " +
        std::to_string(sc.reseeds) + " redraws of nu");
  return sc;
}

json scenario_json(const Scenario& sc) {
  return {{"eps0", sc.eps0},
          {"g0_terms", sc.g0.size()},
          {"nonlinearity_coeffs", sc.f.coeffs},
          {"nu_redraws", sc.reseeds},
          {"omega", by_mode(sc.modes, sc.omega.values())},
          {"actions", by_mode(sc.modes, sc.torus.actions(), true)},
          {"torus_r", sc.torus.params().r},
          {"torus_p", sc.torus.params().p}};
}

// ---------------------------------------------------------------------------

void build_nls_cmd(Context& c) {
  const Scenario sc = scenario(c);
  const ModeSet& modes = sc.modes;
  const std::vector<double> zero(modes.size(), 0.0);
  const HamiltonianPoly h = build_nls(sc.f, zero, modes, c.cfg.degree_cap);
  c.rep.results = scenario_json(sc);
  c.rep.results["terms"] = h.size();
  c.rep.results["max_degree"] = h.max_degree();
  c.rep.results["reality_defect"] = h.reality_defect();

  c.rep.check("reality", h.reality_defect() == 0.0, "H_{ab} = conj(H_{ba}) for every stored pair");

  // mass and momentum commute with H
  PolyBuilder mb(modes, 2), pb(modes, 2);
  for (Mode j : modes.all()) {
    mb.add(MonomialKey{MultiIndex::unit(j), MultiIndex::unit(j)}, 1.0);
    if (j != 0) pb.add(MonomialKey{MultiIndex::unit(j), MultiIndex::unit(j)}, double(j));
  }
  const double scale = h.max_abs_coefficient();
  const double mass_br = poisson_bracket(h, mb.build()).max_abs_coefficient();
  const double mom_br = poisson_bracket(h, pb.build()).max_abs_coefficient();
  c.rep.results["mass_bracket"] = mass_br;
  c.rep.results["momentum_bracket"] = mom_br;
  c.rep.check("mass conserved", mass_br <= 1e-14 * scale, format_number(mass_br));
  c.rep.check("momentum conserved", mom_br <= 1e-14 * scale, format_number(mom_br));

  std::mt19937_64 rng(c.cfg.seed);
  std::normal_distribution<double> g(0.0, 0.1);
  double worst_imag = 0.0;
  for (int k = 0; k < 20; ++k) {
    FieldVector u(modes.size());
    for (auto& z : u) z = {g(rng), g(rng)};
    const Complex v = evaluate(h, u);
    worst_imag = std::max(worst_imag, std::abs(v.imag()) / std::max(1e-300, std::abs(v)));
  }
  c.rep.results["worst_relative_imaginary_part"] = worst_imag;
  c.rep.check("real values", worst_imag <= 1e-12, format_number(worst_imag));

  CsvTable t{"nls_terms", {"alpha", "beta", "re", "im"}, {}};
  for (const Term& term : h.terms()) {
    t.rows.push_back({term.key.alpha.to_string(), term.key.beta.to_string(), term.coeff.real(), term.coeff.imag()});
  }
  c.rep.tables.push_back(std::move(t));
}

void dioph_audit_cmd(Context& c) {
  const ModeSet modes(c.cfg.h_max, c.cfg.cutoff);
  const DiophParams dp = dioph_params(c.cfg, c.cfg.gamma);
  FrequencyVector omega = FrequencyVector::integer_squares(modes);
  if (c.cfg.dioph_omega == "scenario") {
    const Scenario sc = scenario(c);
    omega = sc.omega;
  }
  EnumerationStats strict_stats;
  enumerate_resonant_indices(modes, {c.cfg.l_max, 2, QuadFilter::Strict}, &strict_stats);
  EnumerationStats all_stats;
  const auto res = enumerate_resonant_indices(modes, {c.cfg.l_max, 2, QuadFilter::None}, &all_stats);
  c.log(std::to_string(res.size()) + " resonance candidates");
  const DcReport dc = verify_dc(omega, dp, res);

  json r;
  r["omega_source"] = c.cfg.dioph_omega;
  r["omega"] = by_mode(modes, omega.values());
  r["checked"] = dc.checked;
  r["prefiltered"] = dc.prefiltered;
  r["violations"] = dc.violations;
  r["ok"] = dc.ok;
  r["worst"] = dc.worst ? witness_json(*dc.worst) : json(nullptr);
  r["enumeration"] = {{"count", strict_stats.count},
                      {"k_visited", strict_stats.k_visited},
                      {"parity_ok", strict_stats.parity_ok},
                      {"worst_completion_ratio", strict_stats.worst_completion_ratio},
                      {"completion_violations", strict_stats.completion_violations},
                      {"max_completions", strict_stats.max_completions},
                      {"unfiltered_count", all_stats.count}};
  c.rep.results = r;
  c.rep.check("parity", strict_stats.parity_ok && all_stats.parity_ok, "every enumerated l has even |l| >= 4");
  c.rep.check("completion count", strict_stats.completion_violations == 0,
              "worst ratio " + format_number(strict_stats.worst_completion_ratio));
  if (c.cfg.dioph_omega == "scenario") {
    c.rep.check("diophantine", dc.ok, std::to_string(dc.violations) + " violations");
  }

  struct Row {
    double margin, divisor, weight;
    std::string l;
  };
  std::vector<Row> rows;
  for (const auto& rs : res) {
    const double w = dioph_weight(rs.l, modes, dp);
    const double d = std::abs(omega.dot(rs.l));
    rows.push_back({d / w, d, w, rs.l.to_string()});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.margin != b.margin ? a.margin < b.margin : a.l < b.l;
  });
  CsvTable t{"dioph_margins", {"l", "divisor", "weight", "margin"}, {}};
  for (std::size_t i = 0; i < std::min<std::size_t>(rows.size(), 100); ++i) {
    t.rows.push_back({rows[i].l, rows[i].divisor, rows[i].weight, rows[i].margin});
  }
  c.rep.tables.push_back(std::move(t));
}

void k0_audit_cmd(Context& c) {
  const Scenario sc = scenario(c);
  const DiophParams dp = dioph_params(c.cfg, c.cfg.gamma);
  const ResonanceBudget budget{c.cfg.l_max, 2, QuadFilter::Relaxed};
  std::vector<double> deltas = c.cfg.k0_deltas;
  std::sort(deltas.begin(), deltas.end());
  std::vector<K0Audit> audits;
  for (double d : deltas) {
    audits.push_back(k0_supremum(d, dp, budget, sc.omega, c.cfg.k0_max_common));
    c.log("delta " + format_number(d) + ": " + format_number(audits.back().measured_sup));
  }
  const K0Curve all = fit_k0_curve(audits);
  json r;
  r["omega"] = by_mode(sc.modes, sc.omega.values());
  r["c_hat"] = all.c;
  // smallest c with log(γK₀) ≤ c·ln²(1/δ)/δ at every δ, without the c ≥ 1 floor
  double c_tight = 0.0;
  for (const auto& a : audits) {
    if (!a.empty) c_tight = std::max(c_tight, std::log(a.measured_sup) / k0_bound_exponent(a.delta));
  }
  r["c_tight"] = c_tight;
  json rows = json::array();
  CsvTable t{"k0", {"delta", "gamma_k0", "log_gamma_k0", "log_bound", "candidates", "alpha", "beta", "q", "divisor"}, {}};
  bool monotone = true;
  for (std::size_t i = 0; i < audits.size(); ++i) {
    const K0Audit& a = audits[i];
    if (i > 0 && !a.empty && !audits[i - 1].empty) monotone = monotone && a.measured_sup <= audits[i - 1].measured_sup;
    rows.push_back({{"delta", a.delta},
                    {"gamma_k0", a.measured_sup},
                    {"log_bound", all.log_bound[i]},
                    {"candidates", a.candidates},
                    {"witness",
                     {{"alpha", a.witness.alpha.to_string()},
                      {"beta", a.witness.beta.to_string()},
                      {"q", a.witness.q},
                      {"divisor", a.witness.divisor}}}});
    t.rows.push_back({a.delta, a.measured_sup, std::log(a.measured_sup), all.log_bound[i], a.candidates,
                      a.witness.alpha.to_string(), a.witness.beta.to_string(), a.witness.q, a.witness.divisor});
  }
  r["audits"] = rows;
  c.rep.check("non-increasing in delta", monotone);

  // fit without the smallest δ and check the prediction there
  if (audits.size() >= 2) {
    const K0Curve held = fit_k0_curve(std::span<const K0Audit>(audits).subspan(1));
    const double predicted = std::log(held.c) + held.c * k0_bound_exponent(audits[0].delta);
    const double measured = std::log(audits[0].measured_sup);
    r["held_out"] = {{"delta", audits[0].delta}, {"c_hat", held.c}, {"log_bound", predicted}, {"log_measured", measured}};
    c.rep.check("held-out delta dominated", measured <= predicted,
                "log measured " + format_number(measured) + " vs bound " + format_number(predicted));
  }
  c.rep.results = r;
  c.rep.tables.push_back(std::move(t));
}

void measure_cmd(Context& c) {
  const ModeSet modes(c.cfg.h_max, c.cfg.cutoff);
  const NormalFrequencyMap map = NormalFrequencyMap::shifted_squares(modes, *c.cfg.W);
  const ResonanceBudget budget{c.cfg.l_max, 2, QuadFilter::Strict};
  CsvTable t{"measure",
             {"gamma", "n_samples", "excluded", "fraction", "ci_low", "ci_high", "importance", "importance_se",
              "c_meas"},
             {}};
  json rows = json::array();
  double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
  for (double g : c.cfg.measure_gammas) {
    const MeasureReport m =
        measure_estimate(modes, dioph_params(c.cfg, g), budget, c.cfg.n_samples, c.cfg.seed, map, c.opt.workers);
    const double est = m.importance ? m.importance->fraction : m.excluded_fraction;
    const double cm = est / g;
    cmin = std::min(cmin, cm);
    cmax = std::max(cmax, cm);
    json row{{"gamma", g},
             {"n_resonances", m.n_resonances},
             {"n_samples", m.n_samples},
             {"excluded", m.excluded},
             {"fraction", m.excluded_fraction},
             {"ci_low", m.ci_low},
             {"ci_high", m.ci_high},
             {"analytic_sum", m.analytic_sum},
             {"analytic_bound", m.analytic_bound},
             {"c_meas", cm},
             {"worst_witness", m.worst_witness ? witness_json(*m.worst_witness) : json(nullptr)}};
    if (m.importance) {
      row["importance"] = {{"fraction", m.importance->fraction},
                           {"std_error", m.importance->std_error},
                           {"ci_low", m.importance->ci_low},
                           {"ci_high", m.importance->ci_high},
                           {"slab_volume_sum", m.importance->slab_volume_sum},
                           {"n_samples", m.importance->n_samples}};
    }
    rows.push_back(row);
    t.rows.push_back({g, m.n_samples, m.excluded, m.excluded_fraction, m.ci_low, m.ci_high,
                      m.importance ? json(m.importance->fraction) : json(nullptr),
                      m.importance ? json(m.importance->std_error) : json(nullptr), cm});
    c.log("gamma " + format_number(g) + ": excluded " + format_number(est));
  }
  const double spread = cmax > 0.0 ? cmax / cmin - 1.0 : 0.0;
  c.rep.results = {{"rows", rows}, {"c_meas_min", cmin}, {"c_meas_max", cmax}, {"c_meas_spread", spread}};
  c.rep.check("excluded fraction linear in gamma", cmax > 0.0 && spread <= 0.25,
              "C_meas in [" + format_number(cmin) + ", " + format_number(cmax) + "]");
  c.rep.tables.push_back(std::move(t));
}

struct NormalFormRun {
  Scenario sc;
  FrequencyVector omega;
  PipelineResult result;
  std::optional<FrequencyMapResult> fmap;
  double pre_residual = 0.0;
  double post_residual = 0.0;
};

NormalFormRun normal_form_run(Context& c, bool frequency_map) {
  NormalFormRun nf{scenario(c), {}, {}, {}, 0.0, 0.0};
  const KamParams kp = kam_params(c.cfg);
  const KamSchedule& sch = c.cfg.schedule;
  nf.omega = nf.sc.omega;
  if (frequency_map) {
    nf.fmap = solve_frequency_map(kam_counterterm_map(nf.sc, sch, kp, c.cfg.n_steps), nf.sc.modes, nf.sc.nu,
                                  nf.sc.W);
    nf.omega = nf.fmap->omega;
    c.log("frequency map: " + std::to_string(nf.fmap->iterations) + " iterations, shift " +
          format_number(nf.fmap->omega_shift));
  }
  nf.result = run_kam(nf.sc.g0, nf.omega, nf.sc.torus, sch, kp, c.cfg.n_steps);
  for (const auto& w : nf.result.warnings) c.rep.warnings.push_back(w);
  const auto phases = static_cast<std::size_t>(c.cfg.residual_phases);
  nf.pre_residual = perturbation_field_residual(nf.sc.g0, nf.sc.torus, phases, c.cfg.seed);
  nf.post_residual = perturbation_field_residual(nf.result.G, nf.sc.torus, phases, c.cfg.seed);
  return nf;
}

void residual_checks(Context& c, const NormalFormRun& nf, json& r) {
  const double defect = normal_form_defect(nf.result.N, nf.omega, nf.sc.torus);
  const double ratio = nf.pre_residual > 0.0 ? nf.post_residual / nf.pre_residual : 0.0;
  r["normal_form_defect"] = defect;
  r["residual_pre"] = nf.pre_residual;
  r["residual_post"] = nf.post_residual;
  r["residual_ratio"] = ratio;
  c.rep.check("normal form", defect <= 1e-8, "defect " + format_number(defect));
  c.rep.check("torus residual", nf.post_residual <= 1e-10 * nf.pre_residual, "ratio " + format_number(ratio));
}

void normal_form_cmd(Context& c) {
  const NormalFormRun nf = normal_form_run(c, c.cfg.frequency_map);
  const PipelineResult& res = nf.result;
  const KamSchedule& sch = c.cfg.schedule;
  const double gamma = c.cfg.gamma;
  json r = scenario_json(nf.sc);
  r["final_omega"] = by_mode(nf.sc.modes, nf.omega.values());
  r["converged"] = res.converged;
  r["steps"] = res.S.size();
  r["decay_exponents"] = res.decay_exponents;
  r["c_fit"] = res.c_fit;
  r["lambda"] = by_mode(nf.sc.modes, res.lambda.values());

  CsvTable t{"convergence", {"n", "r_n", "p_n", "eps_n", "theta_n", "lam_n", "min_div"}, {}};
  json table = json::array();
  const double theta0 = res.table.empty() ? 0.0 : res.table.front().theta;
  double k_hat = 0.0, eps_sum = 0.0;
  for (const StepReport& row : res.table) {
    t.rows.push_back({row.n, row.r_n, row.p_n, row.eps, row.theta, row.lambda_bar, row.min_divisor});
    table.push_back({{"n", row.n},
                     {"eps", row.eps},
                     {"theta", row.theta},
                     {"lambda_bar", row.lambda_bar},
                     {"min_divisor", row.min_divisor},
                     {"m_norm", row.m_norm},
                     {"s_norm", row.s_norm},
                     {"l_step_bound", row.l_step_bound},
                     {"smallness", row.smallness},
                     {"lie_terms", row.lie_terms},
                     {"g_terms", row.g_terms}});
    if (row.n < static_cast<int>(res.S.size())) {
      eps_sum += row.eps;
      if (row.eps > 0.0) k_hat = std::max(k_hat, row.lambda_bar / (gamma * row.eps * std::pow(1 + theta0, 2)));
    }
  }
  r["table"] = table;
  r["k_hat"] = k_hat;
  c.rep.tables.push_back(std::move(t));

  bool decay = res.decay_ok;
  for (double e : res.decay_exponents) decay = decay && e >= 1.4;
  c.rep.check("super-geometric decay", decay && (res.S.empty() || !res.decay_exponents.empty()),
              "exponents >= 1.4 per step");
  c.rep.check("converged", res.converged, "eps below kam.floor within run.n_steps");

  if (nf.fmap) {
    const double eps0 = nf.sc.eps0;
    const double c_hat = eps0 > 0.0 ? nf.fmap->omega_shift / (gamma * eps0) : 0.0;
    // the shift is read at the last iterate, the bound at the final run; they
    // differ by at most the last fixed-point increment
    const double c_cross =
        eps0 > 0.0 ? (k_hat * gamma * std::pow(1 + theta0, 2) * eps_sum + nf.fmap->residual) / (gamma * eps0) : 0.0;
    r["frequency_map"] = {{"iterations", nf.fmap->iterations},
                          {"residual", nf.fmap->residual},
                          {"residual_history", nf.fmap->residual_history},
                          {"lipschitz_estimate", nf.fmap->lipschitz_estimate},
                          {"omega_shift", nf.fmap->omega_shift},
                          {"V", by_mode(nf.sc.modes, nf.fmap->V)},
                          {"c_hat", c_hat},
                          {"c_hat_bound", c_cross}};
    c.rep.check("frequency shift bound", c_hat <= c_cross * (1 + 1e-9),
                "C_hat " + format_number(c_hat) + " <= (K_hat gamma (1+Theta0)^2 sum eps + residual)/(gamma eps0) = " +
                    format_number(c_cross));
  }

  if (!res.S.empty()) {
    const int cap = c.cfg.degree_cap;
    const HamiltonianPoly h0 =
        frequency_hamiltonian(nf.omega, cap) + nf.sc.g0 + res.lambda.hamiltonian(nf.sc.torus, cap);
    const int nfin = static_cast<int>(res.S.size());
    const ConjugacyReport cr = conjugacy_check(h0, res, sch.r_n(nfin) / 2, sch.p_n(nfin),
                                               static_cast<std::size_t>(c.cfg.conjugacy_points), c.cfg.seed);
    r["conjugacy"] = {{"points", cr.points},
                      {"max_abs_error", cr.max_abs_error},
                      {"scale", cr.scale},
                      {"max_rel_error", cr.max_rel_error},
                      {"displacements", cr.displacements}};
    c.rep.check("conjugacy", cr.max_abs_error <= 1e-8 * cr.scale, "relative " + format_number(cr.max_rel_error));
  }
  residual_checks(c, nf, r);
  c.rep.results = r;
}

void verify_torus_cmd(Context& c) {
  json r;
  r["target"] = c.cfg.verify_target;
  if (c.cfg.verify_target == "frequency") {
    const Scenario sc = scenario(c);
    const HamiltonianPoly d = frequency_hamiltonian(sc.omega, c.cfg.degree_cap);
    const double res = torus_residual(d, sc.omega, sc.torus, c.cfg.residual_phases, c.cfg.seed);
    r["residual"] = res;
    c.rep.check("residual vanishes", res == 0.0, format_number(res));
  } else {
    const NormalFormRun nf = normal_form_run(c, false);
    r["steps"] = nf.result.S.size();
    residual_checks(c, nf, r);
  }
  c.rep.results = r;
}

void trajectory_cmd(Context& c) {
  const Scenario sc = scenario(c);
  const ModeSet& modes = sc.modes;
  std::mt19937_64 rng(c.cfg.seed);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  std::vector<double> phases(modes.size(), 0.0);
  for (Mode j : modes.tangential()) phases[modes.slot(j)] = ph(rng);
  std::vector<double> ts, xs;
  for (int k = 0; k < c.cfg.trajectory_n_t; ++k) ts.push_back(c.cfg.trajectory_t_max * k / (c.cfg.trajectory_n_t - 1));
  for (int k = 0; k < c.cfg.trajectory_n_x; ++k) xs.push_back(2.0 * std::numbers::pi * k / c.cfg.trajectory_n_x);
  const auto u = sample_trajectory(sc.torus, sc.omega, phases, ts, xs);

  CsvTable t{"trajectory", {"t", "x", "re", "im"}, {}};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const Complex z = u[i * xs.size() + k];
      t.rows.push_back({ts[i], xs[k], z.real(), z.imag()});
    }
  }
  c.rep.tables.push_back(std::move(t));

  double mass = 0.0;
  for (double a : sc.torus.actions()) mass += a;
  json r = scenario_json(sc);
  r["phases"] = by_mode(modes, phases, true);
  r["mass"] = mass;
  // the grid resolves every difference of tangential modes, so Parseval is exact
  const int spread = modes.tangential().back() - modes.tangential().front();
  if (c.cfg.trajectory_n_x > spread) {
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      double m = 0.0;
      for (std::size_t k = 0; k < xs.size(); ++k) m += std::norm(u[i * xs.size() + k]);
      worst = std::max(worst, std::abs(m / xs.size() - mass));
    }
    r["mass_defect"] = worst;
    c.rep.check("mass conserved along the orbit", worst <= 1e-12 * std::max(mass, 1e-300), format_number(worst));
  }

  std::vector<double> hs;
  for (int k = 0; k <= 12; ++k) hs.push_back(std::pow(2.0, -1.0 - 0.5 * k));
  const HolderDiagnostic hd = holder_diagnostic(sc.torus, sc.omega, phases, 0.0, hs, 64);
  r["holder"] = {{"h", hd.h}, {"increment", hd.increment}, {"exponent", hd.exponent}};
  c.rep.check("hoelder exponent in (0, 1]", hd.exponent > 0.0 && hd.exponent <= 1.0 + 1e-9,
              format_number(hd.exponent));
  c.rep.results = r;
}

using Handler = void (*)(Context&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> h{
      {"build-nls", build_nls_cmd},   {"dioph-audit", dioph_audit_cmd},     {"k0-audit", k0_audit_cmd},
      {"measure", measure_cmd},       {"normal-form", normal_form_cmd},     {"verify-torus", verify_torus_cmd},
      {"trajectory", trajectory_cmd}};
  return h;
}

json error_json(const std::exception& e) {
  json j{{"message", e.what()}};
  if (const auto* nd = dynamic_cast<const NonDiophantineError*>(&e)) {
    j["type"] = "NonDiophantineError";
    j["l"] = nd->index().to_string();
    j["divisor"] = nd->divisor();
    j["weight"] = nd->weight();
  } else if (dynamic_cast<const ConfigError*>(&e)) {
    j["type"] = "ConfigError";
  } else if (dynamic_cast<const DomainError*>(&e)) {
    j["type"] = "DomainError";
  } else if (dynamic_cast<const DegenerateInputError*>(&e)) {
    j["type"] = "DegenerateInputError";
  } else if (dynamic_cast<const PreconditionError*>(&e)) {
    j["type"] = "PreconditionError";
  } else if (dynamic_cast<const DivergenceError*>(&e)) {
    j["type"] = "DivergenceError";
  } else {
    j["type"] = "Error";
  }
  return j;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : handlers()) n.push_back(k);
    return n;
  }();
  return names;
}

Report run_command(const std::string& command, const ExperimentConfig& cfg, const RunOptions& options) {
  Handler handler = nullptr;
  for (const auto& [k, v] : handlers()) {
    if (k == command) handler = v;
  }
  if (!handler) throw ConfigError("command", "unknown command '" + command + "'");
  ExperimentConfig resolved = cfg;
  if (!resolved.W) resolve(resolved);
  Report rep;
  rep.command = command;
  rep.config = to_json(resolved);
  rep.warnings = resolved.warnings;
  Context ctx{resolved, options, rep};
  try {
    handler(ctx);
  } catch (const std::exception& e) {
    rep.error = error_json(e);
  }
  return rep;
}

}  // namespace kamlab::lab
