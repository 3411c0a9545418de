#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eulergel/config.hpp"
#include "eulergel/errors.hpp"
#include "eulergel/expression.hpp"
#include "eulergel/runner.hpp"
#include "eulergel/snapshot.hpp"
#include "helpers.hpp"

using namespace eulergel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("eulergel_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string config_key_error(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

const char* kSmall = R"yaml(
domain: {dim: 2}
spaces: {velocity_degree: 4, content_degree: 4}
initial:
  velocity: ["0.05*sin(pi*x)^2*sin(2*pi*y)", "0"]
  content: "0.5 + 0.05*x"
time: {end: 0.005, dt: 1.0e-3}
output: {snapshot_every: 2, lattice: 9}
)yaml";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("expressions") {
  CHECK(Expression::parse("1 + 2*3")(0.0) == 7.0);
  CHECK(Expression::parse("2^3^2")(0.0) == 512.0);
  CHECK(Expression::parse("-2^2")(0.0) == -4.0);
  CHECK(Expression::parse("sin(pi*x)*exp(-t)")(1.0, 0.5) == doctest::Approx(std::exp(-1.0)));
  CHECK(Expression::parse("max(x, y) + min(1, z) + pow(2, 3)")(0.0, 0.2, 0.7, 3.0) ==
        doctest::Approx(9.7));
  CHECK(Expression::parse("1.5e-3")(0.0) == 1.5e-3);
  CHECK(Expression::parse("3*pi").is_constant());
  CHECK_FALSE(Expression::parse("x + 1").is_constant());
  CHECK(Expression::parse("y")(0.0, Vec{1.0}) == 0.0);
  CHECK_THROWS_AS(Expression::parse("sin(x"), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("foo(1)"), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("1 +"), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("w"), ExpressionError);
}

TEST_CASE("config defaults and parsing") {
  const Config c = parse_config(kSmall);
  CHECK(c.scenario.box.dim == 2);
  CHECK(c.scenario.degree_v == 4);
  CHECK(c.scenario.dt == 1e-3);
  CHECK(c.output.snapshot_every == 2);
  CHECK(c.scenario.material.dissipation.nu == 1e-3);
  CHECK(c.scenario.initial.content(Vec{1.0, 0.0}) == doctest::Approx(0.55));
  CHECK_FALSE(c.scenario.loads.gravity);
  bool has_nu = false;
  for (const auto& [k, v] : c.resolved) has_nu = has_nu || (k == "material.nu" && v == "0.001");
  CHECK(has_nu);

  const Config o = parse_config(kSmall, {{"time.dt", "5e-4"}, {"spaces.velocity_degree", "6"}});
  CHECK(o.scenario.dt == 5e-4);
  CHECK(o.scenario.degree_v == 6);
}

TEST_CASE("config validation names the offending key") {
  CHECK(config_key_error("material: {nu: -1}") == "material.nu");
  CHECK(config_key_error("initial: {content: \"1.5\"}") == "initial.content");
  CHECK(config_key_error("material: {viscosity: 1}") == "material.viscosity");
  CHECK(config_key_error("bogus: {a: 1}") == "bogus");
  CHECK(config_key_error("material: {p: 1.5}") == "material.p");
  CHECK(config_key_error("regularization: {epsilon: 0}") == "regularization.epsilon");
  CHECK(config_key_error("loads: {gravity: [\"0\"]}") == "loads.gravity");
  CHECK(config_key_error("initial: {velocity: [\"sin(\", \"0\"]}") == "initial.velocity");
  CHECK(config_key_error("time: {dt: abc}") == "time.dt");
  CHECK(config_key_error("domain: {dim: 4}") == "domain.dim");
  CHECK(config_key_error("initial: {deformation: [[1, 0], [0, -1]]}") == "initial.deformation");
  CHECK(config_key_error("domain: [1, 2]") == "domain");
  CHECK_THROWS_AS(load_config("/nonexistent/file.yaml"), IoError);

  CHECK(sweep_keys("degree").size() == 2);
  CHECK_THROWS_AS(sweep_keys("gravity"), ConfigError);
}

TEST_CASE("snapshots") {
  Box box;
  box.dim = 2;
  box.upper = {2.0, 1.0, 1.0};
  const QuadGrid grid = QuadGrid::for_degree(box, 4);
  const auto nn = static_cast<Eigen::Index>(grid.size());
  const fs::path dir = scratch("snap");

  const Snapshot zero = sample_nodal(grid, "z", {Eigen::VectorXd::Zero(nn)}, 0.0, 5);
  write_snapshot((dir / "zero.dat").string(), zero);
  std::ifstream in(dir / "zero.dat");
  std::string l1, l2, l3, l4, l5, l6, l7;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  std::getline(in, l4);
  std::getline(in, l5);
  std::getline(in, l6);
  std::getline(in, l7);
  CHECK(l1 == "# field z");
  CHECK(l2 == "dims 5 5");
  CHECK(l3 == "lower 0 0");
  CHECK(l4 == "upper 2 1");
  CHECK(l5 == "time 0");
  CHECK(l6 == "components 1");
  CHECK(l7 == "0");

  const Snapshot flat = sample_nodal(grid, "rho", {Eigen::VectorXd::Constant(nn, 1.25)}, 0.5, 7);
  for (double v : flat.values) CHECK(v == 1.25);

  // Smooth two-component field: sample, write, read back bitwise.
  Eigen::VectorXd a(nn), b(nn);
  for (Eigen::Index n = 0; n < nn; ++n) {
    const Vec& x = grid.points()[static_cast<std::size_t>(n)];
    a(n) = std::sin(x[0]) * x[1];
    b(n) = 1.0 / 3.0 + x[0] * x[0];
  }
  const Snapshot s = sample_nodal(grid, "v", {a, b}, 0.123456789012, 9);
  CHECK(s.at(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(s.at(s.points() - 1, 0) == doctest::Approx(std::sin(2.0)).epsilon(1e-4));
  const std::string path = (dir / snapshot_filename("v", 3)).string();
  CHECK(path.substr(path.size() - 8) == "v_t3.dat");
  write_snapshot(path, s);
  const Snapshot r = read_snapshot(path);
  CHECK(r.field == "v");
  CHECK(r.dims == s.dims);
  CHECK(r.components == 2);
  CHECK(r.time == s.time);
  CHECK(r.values == s.values);

  CHECK_THROWS_AS(read_snapshot((dir / "missing.dat").string()), IoError);
  write_file(dir / "bad.dat", "# field x\ndims 2\nlower 0\nupper 1\ntime 0\ncomponents 1\n1\n");
  CHECK_THROWS_AS(read_snapshot((dir / "bad.dat").string()), IoError);
}

TEST_CASE("run writes ledger, snapshots and manifest") {
  const fs::path dir = scratch("run");
  const fs::path cfg = write_file(dir / "small.yaml", kSmall);
  RunOptions opt;
  opt.output_dir = (dir / "out").string();
  std::ostringstream log;
  const RunSummary s = run_scenario(cfg.string(), opt, log);
  CHECK(s.exit_code == exit_ok);
  CHECK(s.steps == 5);
  CHECK(fs::exists(dir / "out" / "ledger.csv"));
  CHECK(fs::exists(dir / "out" / "steps.csv"));
  CHECK(fs::exists(dir / "out" / "z_t2.dat"));
  CHECK(fs::exists(dir / "out" / "mu_t5.dat"));
  CHECK(fs::exists(dir / "out" / "final_state.json"));
  std::ifstream mf(dir / "out" / "manifest.json");
  const auto m = nlohmann::json::parse(mf);
  CHECK(m["status"] == "completed");
  CHECK(m["resolved_config"]["material.nu"] == "0.001");
  CHECK(m["summary"]["steps"] == 5);
  CHECK(m.contains("start_time"));
  CHECK(m.contains("code_version"));

  // Determinism: same input, bitwise identical ledger.
  RunOptions again = opt;
  again.output_dir = (dir / "again").string();
  run_scenario(cfg.string(), again, log);
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir / "out" / "ledger.csv") == slurp(dir / "again" / "ledger.csv"));

  RunOptions until = opt;
  until.output_dir = (dir / "until").string();
  until.until = 0.002;
  until.snapshot_every = 0;
  const RunSummary u = run_scenario(cfg.string(), until, log);
  CHECK(u.steps == 2);
  CHECK_FALSE(fs::exists(dir / "until" / "z_t0.dat"));
  CHECK(fs::exists(dir / "until" / "z_t2.dat"));
}

TEST_CASE("normal traction is reported") {
  const fs::path dir = scratch("traction");
  const fs::path cfg = write_file(dir / "t.yaml", std::string(kSmall) + "loads: {traction: [\"0.2\", \"0\"]}\n");
  RunOptions opt;
  opt.output_dir = (dir / "out").string();
  opt.until = 0.002;
  std::ostringstream log;
  const RunSummary s = run_scenario(cfg.string(), opt, log);
  CHECK(s.exit_code == exit_ok);
  CHECK(s.traction_normal_violation == doctest::Approx(0.2));
  CHECK(log.str().find("warning: traction has a normal component") != std::string::npos);
}

TEST_CASE("failed runs still leave a manifest") {
  const fs::path dir = scratch("fail");
  const fs::path bad = write_file(dir / "bad.yaml", "material: {nu: -1}\n");
  std::ostringstream log;
  RunOptions opt;
  opt.output_dir = (dir / "out").string();
  const RunSummary s = run_scenario(bad.string(), opt, log);
  CHECK(s.exit_code == exit_config_error);
  CHECK(s.message.find("material.nu") != std::string::npos);
  std::ifstream mf(dir / "out" / "manifest.json");
  const auto m = nlohmann::json::parse(mf);
  CHECK(m["status"] == "config_error");

  RunOptions missing = opt;
  missing.output_dir = (dir / "missing").string();
  CHECK(run_scenario((dir / "nope.yaml").string(), missing, log).exit_code == exit_io_error);
  CHECK(fs::exists(dir / "missing" / "manifest.json"));
}

TEST_CASE("sweep and material check") {
  const fs::path dir = scratch("sweep");
  const fs::path cfg = write_file(dir / "small.yaml", kSmall);
  std::ostringstream log;
  CHECK(run_sweep(cfg.string(), "epsilon", {"0.05", "0.025"}, (dir / "out").string(), log) == exit_ok);
  CHECK(fs::exists(dir / "out" / "epsilon_0.05" / "ledger.csv"));
  CHECK(fs::exists(dir / "out" / "epsilon_0.025" / "manifest.json"));
  CHECK(fs::exists(dir / "out" / "sweep.csv"));
  std::ifstream mf(dir / "out" / "manifest.json");
  const auto m = nlohmann::json::parse(mf);
  CHECK(m["runs"][1]["ledger_delta_vs_first"] == 0.0);
  CHECK(run_sweep(cfg.string(), "gravity", {"1"}, (dir / "bad").string(), log) == exit_config_error);

  std::ostringstream out;
  CHECK(check_material(cfg.string(), out) == 0);
  CHECK(out.str().find("all checks passed") != std::string::npos);
  const fs::path weak = write_file(dir / "weak.yaml", "material: {eta0: 0}\n");
  std::ostringstream out2;
  CHECK(check_material(weak.string(), out2) == 1);
  CHECK(out2.str().find("FAIL  dissipation_bounds") != std::string::npos);
}

}
