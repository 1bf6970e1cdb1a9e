#include "config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace kamlab::lab {

namespace {

// Reads the fields of one JSON object and remembers which keys were used.
class Section {
 public:
  Section(const json& doc, const std::string& name) : path_(name) {
    if (!doc.contains(name) || doc.at(name).is_null()) return;
    obj_ = &doc.at(name);
    if (!obj_->is_object()) throw ConfigError(name, "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    const json* v = find(key);
    if (v) out = convert<T>(*v, path_ + "." + key);
  }
  void get(const char* key, std::optional<double>& out) {
    const json* v = find(key);
    if (v && !v->is_null()) out = convert<double>(*v, path_ + "." + key);
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [k, v] : obj_->items()) {
      if (!seen_.count(k)) throw ConfigError(path_ + "." + k, "unknown field");
    }
  }

  template <class T>
  static T convert(const json& v, const std::string& field) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(field, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(field, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(field, "expected a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw ConfigError(field, "expected a non-negative integer");
      }
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
      const auto x = v.get<long long>();
      if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(field, "integer out of range");
      return static_cast<int>(x);
    } else {
      if (!v.is_array()) throw ConfigError(field, "expected an array of numbers");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<double>(v[i], field + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return nullptr;
    return &obj_->at(key);
  }

  const json* obj_ = nullptr;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

void validate(ExperimentConfig& c) {
  require(c.h_max >= 0 && c.h_max <= 4, "modes.h_max", "must lie in [0, 4]");
  require(c.cutoff >= (1 << c.h_max), "modes.cutoff", "must be >= 2^h_max");
  require(c.cutoff <= MultiIndex::kMaxAbsMode, "modes.cutoff", "must be <= " + std::to_string(MultiIndex::kMaxAbsMode));

  const KamSchedule& s = c.schedule;
  require(s.r0 > 0.0, "schedule.r0", "must be positive");
  require(s.rho > 0.0, "schedule.rho", "must be positive");
  require(s.rho <= s.r0 / 2.0, "schedule.rho", "must satisfy rho <= r0/2");
  require(s.p0 >= 0.0, "schedule.p0", "must be non-negative");
  require(s.delta > 0.0, "schedule.delta", "must be positive");

  const double r_max = s.r0 / (2.0 * std::sqrt(2.0));
  if (c.torus_r) require(*c.torus_r > 0.0 && *c.torus_r <= r_max * (1 + 1e-12), "torus.r", "must lie in (0, r0/(2 sqrt 2)]");
  const double p = c.torus_p.value_or(s.p_inf());
  require(p > 1.0, "torus.p", "must be > 1");
  require(c.profile == "flat" || c.profile == "power-law", "torus.profile", "must be \"flat\" or \"power-law\"");
  if (c.exponent) require(*c.exponent >= p, "torus.exponent", "must be >= torus.p");
  require(c.fill >= 0.0 && c.fill <= 1.0, "torus.fill", "must lie in [0, 1]");

  require(!c.coeffs.empty(), "nonlinearity.coeffs", "must not be empty");
  require(c.radius > 0.0, "nonlinearity.radius", "must be positive");
  require(std::isfinite(c.eps0), "nonlinearity.eps0", "must be finite");
  require(c.eps0 <= c.smallness_limit, "nonlinearity.eps0",
          "exceeds kam.smallness_limit; the iteration is not expected to converge");

  require(c.gamma > 0.0 && c.gamma <= 0.5, "dioph.gamma", "must lie in (0, 1/2]");
  require(c.tau >= 1.5, "dioph.tau", "must be >= 3/2");
  require(c.l_max >= 4 && c.l_max <= 12, "dioph.l_max", "must lie in [4, 12]");
  require(c.bracket == "max" || c.bracket == "sqrt", "dioph.bracket", "must be \"max\" or \"sqrt\"");

  require(c.degree_cap >= 4 && c.degree_cap <= 10 && c.degree_cap % 2 == 0, "kam.degree_cap",
          "must be even and lie in [4, 10]");
  require(c.order_cap >= 1, "kam.order_cap", "must be >= 1");
  require(c.floor > 0.0, "kam.floor", "must be positive");
  require(c.prune >= 0.0, "kam.prune", "must be non-negative");
  require(c.smallness_limit > 0.0, "kam.smallness_limit", "must be positive");

  require(c.n_steps >= 0, "run.n_steps", "must be non-negative");
  require(c.n_samples >= 1, "run.n_samples", "must be >= 1");
  require(c.conjugacy_points >= 1, "run.conjugacy_points", "must be >= 1");
  require(c.residual_phases >= 1, "run.residual_phases", "must be >= 1");

  require(!c.measure_gammas.empty(), "measure.gammas", "must not be empty");
  for (double g : c.measure_gammas) require(g > 0.0 && g <= 0.5, "measure.gammas", "entries must lie in (0, 1/2]");
  require(c.k0_deltas.size() >= 1, "k0.deltas", "must not be empty");
  for (double d : c.k0_deltas) require(d > 0.0 && d <= 1.0, "k0.deltas", "entries must lie in (0, 1]");
  require(c.k0_max_common >= 0 && c.k0_max_common <= 2, "k0.max_common", "must lie in [0, 2]");
  require(c.dioph_omega == "scenario" || c.dioph_omega == "squares", "dioph_audit.omega",
          "must be \"scenario\" or \"squares\"");
  require(c.verify_target == "normal-form" || c.verify_target == "frequency", "verify.target",
          "must be \"normal-form\" or \"frequency\"");
  require(c.trajectory_t_max > 0.0, "trajectory.t_max", "must be positive");
  require(c.trajectory_n_t >= 2, "trajectory.n_t", "must be >= 2");
  require(c.trajectory_n_x >= 1, "trajectory.n_x", "must be >= 1");
  require(!c.out_dir.empty(), "output.dir", "must not be empty");

  c.warnings.clear();
  if (c.W) {
    const int m = c.cutoff;
    require(static_cast<int>(c.W->size()) == 2 * m + 1, "W", "must list W_j for j = -M..M");
    const ModeSet modes(c.h_max, c.cutoff);
    for (Mode j : modes.normal()) {
      const double w = (*c.W)[j + m];
      require(std::abs(w) <= 0.25, "W[" + std::to_string(j) + "]", "outside [-1/4, 1/4]");
    }
    if ((*c.W)[m] == 0.0) c.warnings.push_back("W_0 = 0: torus existence needs W_0 != 0");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
  static const std::set<std::string> sections{"modes",    "torus", "nonlinearity", "W",           "dioph",
                                              "schedule", "kam",   "run",          "measure",     "k0",
                                              "dioph_audit", "verify", "trajectory", "output"};
  for (const auto& [k, v] : doc.items()) {
    if (!sections.count(k)) throw ConfigError(k, "unknown field");
  }
  ExperimentConfig c;
  {
    Section s(doc, "modes");
    s.get("h_max", c.h_max);
    s.get("cutoff", c.cutoff);
    s.finish();
  }
  {
    Section s(doc, "torus");
    s.get("r", c.torus_r);
    s.get("p", c.torus_p);
    s.get("profile", c.profile);
    s.get("exponent", c.exponent);
    s.get("fill", c.fill);
    s.finish();
  }
  {
    Section s(doc, "nonlinearity");
    s.get("coeffs", c.coeffs);
    s.get("radius", c.radius);
    s.get("eps0", c.eps0);
    s.finish();
  }
  if (doc.contains("W") && !doc.at("W").is_null()) c.W = Section::convert<std::vector<double>>(doc.at("W"), "W");
  {
    Section s(doc, "dioph");
    s.get("gamma", c.gamma);
    s.get("tau", c.tau);
    s.get("l_max", c.l_max);
    s.get("bracket", c.bracket);
    s.finish();
  }
  {
    Section s(doc, "schedule");
    s.get("r0", c.schedule.r0);
    s.get("rho", c.schedule.rho);
    s.get("p0", c.schedule.p0);
    s.get("delta", c.schedule.delta);
    s.finish();
  }
  {
    Section s(doc, "kam");
    s.get("degree_cap", c.degree_cap);
    s.get("order_cap", c.order_cap);
    s.get("floor", c.floor);
    s.get("prune", c.prune);
    s.get("smallness_limit", c.smallness_limit);
    s.finish();
  }
  {
    Section s(doc, "run");
    s.get("n_steps", c.n_steps);
    s.get("seed", c.seed);
    s.get("n_samples", c.n_samples);
    s.get("frequency_map", c.frequency_map);
    s.get("conjugacy_points", c.conjugacy_points);
    s.get("residual_phases", c.residual_phases);
    s.finish();
  }
  {
    Section s(doc, "measure");
    s.get("gammas", c.measure_gammas);
    s.finish();
  }
  {
    Section s(doc, "k0");
    s.get("deltas", c.k0_deltas);
    s.get("max_common", c.k0_max_common);
    s.finish();
  }
  {
    Section s(doc, "dioph_audit");
    s.get("omega", c.dioph_omega);
    s.finish();
  }
  {
    Section s(doc, "verify");
    s.get("target", c.verify_target);
    s.finish();
  }
  {
    Section s(doc, "trajectory");
    s.get("t_max", c.trajectory_t_max);
    s.get("n_t", c.trajectory_n_t);
    s.get("n_x", c.trajectory_n_x);
    s.finish();
  }
  {
    Section s(doc, "output");
    s.get("dir", c.out_dir);
    s.finish();
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

void resolve(ExperimentConfig& cfg) {
  if (!cfg.W) {
    // a stream of its own, so ν draws do not shift when W is given explicitly
    std::mt19937_64 rng(cfg.seed ^ 0x5750u);
    std::uniform_real_distribution<double> u(-0.25, 0.25);
    const ModeSet modes(cfg.h_max, cfg.cutoff);
    std::vector<double> w(modes.size(), 0.0);
    for (Mode j : modes.normal()) w[modes.slot(j)] = u(rng);
    cfg.W = w;
  }
  validate(cfg);
}

json to_json(const ExperimentConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["modes"] = {{"h_max", c.h_max}, {"cutoff", c.cutoff}};
  j["torus"] = {{"r", opt(c.torus_r)},
                {"p", opt(c.torus_p)},
                {"profile", c.profile},
                {"exponent", opt(c.exponent)},
                {"fill", c.fill}};
  j["nonlinearity"] = {{"coeffs", c.coeffs}, {"radius", c.radius}, {"eps0", c.eps0}};
  j["W"] = c.W ? json(*c.W) : json(nullptr);
  j["dioph"] = {{"gamma", c.gamma}, {"tau", c.tau}, {"l_max", c.l_max}, {"bracket", c.bracket}};
  j["schedule"] = {{"r0", c.schedule.r0}, {"rho", c.schedule.rho}, {"p0", c.schedule.p0}, {"delta", c.schedule.delta}};
  j["kam"] = {{"degree_cap", c.degree_cap},
              {"order_cap", c.order_cap},
              {"floor", c.floor},
              {"prune", c.prune},
              {"smallness_limit", c.smallness_limit}};
  j["run"] = {{"n_steps", c.n_steps},
              {"seed", c.seed},
              {"n_samples", c.n_samples},
              {"frequency_map", c.frequency_map},
              {"conjugacy_points", c.conjugacy_points},
              {"residual_phases", c.residual_phases}};
  j["measure"] = {{"gammas", c.measure_gammas}};
  j["k0"] = {{"deltas", c.k0_deltas}, {"max_common", c.k0_max_common}};
  j["dioph_audit"] = {{"omega", c.dioph_omega}};
  j["verify"] = {{"target", c.verify_target}};
  j["trajectory"] = {{"t_max", c.trajectory_t_max}, {"n_t", c.trajectory_n_t}, {"n_x", c.trajectory_n_x}};
  j["output"] = {{"dir", c.out_dir}};
  return j;
}

DiophParams dioph_params(const ExperimentConfig& c, double gamma) {
  return {gamma, c.tau, c.bracket == "sqrt" ? BracketConvention::Sqrt : BracketConvention::Max};
}

KamParams kam_params(const ExperimentConfig& c) {
  KamParams kp;
  kp.dioph = dioph_params(c, c.gamma);
  kp.degree_cap = c.degree_cap;
  kp.order_cap = c.order_cap;
  kp.floor = c.floor;
  kp.prune = PruneRule{c.prune, 0.0};
  kp.smallness_limit = c.smallness_limit;
  return kp;
}

ScenarioSpec scenario_spec(const ExperimentConfig& c) {
  ScenarioSpec s;
  s.h_max = c.h_max;
  s.cutoff = c.cutoff;
  s.schedule = c.schedule;
  s.torus_r = c.torus_r.value_or(0.0);
  s.torus_p = c.torus_p.value_or(0.0);
  s.fill = c.fill;
  s.profile = c.profile == "flat" ? ActionProfile::Flat : ActionProfile::PowerLaw;
  s.exponent = c.exponent.value_or(0.0);
  s.f = NonlinearityModel{c.coeffs, c.radius};
  s.eps0 = c.eps0;
  s.dioph = dioph_params(c, c.gamma);
  s.l_max = c.l_max;
  if (c.W) s.W = *c.W;
  s.seed = c.seed;
  return s;
}

}  // namespace kamlab::lab
