#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lab/commands.hpp"

using namespace kamlab;
using namespace kamlab::lab;

namespace {

std::string field_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("kamlab_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config defaults and validation") {
  const ExperimentConfig c = parse_config(json::object());
  CHECK(c.h_max == 4);
  CHECK(c.cutoff == 16);
  CHECK(c.warnings.empty());
  CHECK_FALSE(c.W);

  CHECK(field_of({{"schedule", {{"r0", 1.0}, {"rho", 0.6}}}}) == "schedule.rho");
  CHECK(field_of({{"schedule", {{"r0", 1.0}, {"rho", 0.5}}}}).empty());
  CHECK(field_of({{"modes", {{"h_max", "four"}}}}) == "modes.h_max");
  CHECK(field_of({{"modes", {{"hmax", 4}}}}) == "modes.hmax");
  CHECK(field_of({{"bogus", 1}}) == "bogus");
  CHECK(field_of({{"dioph", {{"gamma", 0.7}}}}) == "dioph.gamma");
  CHECK(field_of({{"torus", {{"r", 0.5}}}}) == "torus.r");
  CHECK(field_of({{"nonlinearity", {{"eps0", 0.5}}}}) == "nonlinearity.eps0");
  CHECK(field_of({{"kam", {{"degree_cap", 7}}}}) == "kam.degree_cap");

  std::vector<double> w(33, 0.1);
  w[16 + 3] = 0.3;
  CHECK(field_of({{"W", w}}) == "W[3]");
  w[16 + 3] = 0.1;
  w[16 + 1] = 0.9;  // tangential entries are ignored
  CHECK(field_of({{"W", w}}).empty());
  w[16] = 0.0;
  const ExperimentConfig z = parse_config({{"W", w}});
  REQUIRE(z.warnings.size() == 1);
  CHECK(z.warnings[0].find("W_0") != std::string::npos);
  CHECK(field_of({{"W", std::vector<double>(5, 0.0)}}) == "W");
}

TEST_CASE("config round trip") {
  ExperimentConfig c = parse_config({{"run", {{"seed", 42}}}, {"torus", {{"fill", 0.25}}}});
  resolve(c);
  REQUIRE(c.W);
  const json j = to_json(c);
  ExperimentConfig back = parse_config(j);
  CHECK(dump_json(to_json(back)) == dump_json(j));
  // W is drawn from the seed
  ExperimentConfig d = parse_config({{"run", {{"seed", 42}}}});
  resolve(d);
  CHECK(*d.W == *c.W);
  d = parse_config({{"run", {{"seed", 43}}}});
  resolve(d);
  CHECK(*d.W != *c.W);
}

TEST_CASE("report emission") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(std::nan("")) == "null");

  Report empty;
  empty.command = "empty";
  const json parsed = json::parse(dump_json(empty.document()));
  CHECK(parsed["status"] == "passed");
  CHECK(parsed["results"].empty());

  Report r;
  r.command = "demo";
  r.results = {{"zeta", 1.5}, {"alpha", {3, 2, 1}}};
  r.check("a", true);
  r.tables.push_back({"convergence", {"n", "r_n", "p_n", "eps_n", "theta_n", "lam_n", "min_div"}, {}});
  r.tables.back().rows.push_back({0, 1.0, 1.5, 1e-4, 2e-4, 1e-10, std::numeric_limits<double>::infinity()});
  const auto dir = scratch("emit");
  emit_report(r, dir);
  const std::string a = slurp(dir / "demo.json");
  emit_report(r, dir);
  CHECK(slurp(dir / "demo.json") == a);
  CHECK(a.find("\"alpha\"") < a.find("\"zeta\""));
  const std::string csv = slurp(dir / "convergence.csv");
  CHECK(csv.rfind("n,r_n,p_n,eps_n,theta_n,lam_n,min_div\n", 0) == 0);
  CHECK(csv.find("0,1,1.5,0.0001") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("commands") {
  const RunOptions opt{2, false};
  SUBCASE("unknown command") {
    CHECK_THROWS_AS(run_command("fly", parse_config(json::object()), opt), ConfigError);
  }
  SUBCASE("dioph audit at integer squares") {
    const Report r = run_command("dioph-audit", parse_config({{"dioph_audit", {{"omega", "squares"}}}}), opt);
    CHECK(r.ok());
    CHECK(r.results["ok"] == false);
    CHECK(r.results["violations"].get<std::size_t>() > 0);
    REQUIRE(r.results["worst"].is_object());
    CHECK(r.results["worst"]["divisor"].get<double>() == 0.0);
    CHECK(r.config["W"].is_array());
  }
  SUBCASE("verify torus on D") {
    const Report r = run_command("verify-torus", parse_config({{"verify", {{"target", "frequency"}}}}), opt);
    CHECK(r.ok());
    CHECK(r.results["residual"].get<double>() == 0.0);
  }
  SUBCASE("normal form") {
    const ExperimentConfig c = parse_config({{"run", {{"n_steps", 4}, {"frequency_map", false}, {"conjugacy_points", 2}}}});
    const Report r = run_command("normal-form", c, opt);
    CHECK(r.ok());
    REQUIRE(r.tables.size() == 1);
    CHECK(r.tables[0].name == "convergence");
    CHECK(r.tables[0].rows.size() >= 2);
    const Report again = run_command("normal-form", c, opt);
    CHECK(dump_json(again.document()) == dump_json(r.document()));
  }
  SUBCASE("module errors are reported") {
    const Report r = run_command("build-nls", parse_config({{"nonlinearity", {{"coeffs", {0.0}}}}}), opt);
    CHECK_FALSE(r.ok());
    REQUIRE(r.error);
    CHECK((*r.error)["type"] == "DegenerateInputError");
    CHECK(r.document()["status"] == "error");
  }
}
