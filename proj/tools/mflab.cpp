#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mflab/error.hpp"
#include "mflab/harness.hpp"
#include "mflab/lions.hpp"
#include "mflab/mollifier.hpp"

using namespace mflab;
using nlohmann::json;

namespace {

struct RunArgs {
  std::string config_file;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  std::vector<std::string> sets;
  bool assert_checks = false;
};

void add_run_flags(CLI::App* c, RunArgs& a) {
  c->add_option("--config", a.config_file, "JSON config {id, params, seed, out}");
  c->add_option("--seed", a.seed, "64-bit seed")->each([&a](const std::string&) { a.seed_given = true; });
  c->add_option("--out", a.out, "output directory for <id>.csv and <id>.json");
  c->add_option("--set", a.sets, "dot-path override, e.g. --set N=[4,8,16]");
  c->add_flag("--assert", a.assert_checks, "exit 4 when an acceptance check fails");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config", "cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error("config", path + " is not valid JSON");
  return j;
}

int run_experiment(const std::string& id, const RunArgs& a) {
  ExperimentConfig c;
  if (!a.config_file.empty()) c = ExperimentConfig::from_json(read_json_file(a.config_file));
  if (!id.empty()) c.id = id;
  if (c.id.empty()) throw Error("config", "no experiment id given");
  if (a.seed_given) c.seed = a.seed;
  if (!a.out.empty()) c.out_dir = a.out;
  for (const auto& s : a.sets) apply_set(c.params, s);

  auto t = run(c);
  t.write_csv(std::cout);
  std::cerr << json{{"summary", t.summary}, {"provenance", t.provenance}}.dump(2) << '\n';
  if (a.assert_checks && t.summary.contains("checks")) {
    for (const auto& [name, ok] : t.summary["checks"].items())
      if (!ok.get<bool>()) {
        std::cerr << "check failed: " << name << '\n';
        return 4;
      }
  }
  return 0;
}

DistributionSpec parse_distribution(const std::string& s) {
  if (s == "gaussian") return DistributionSpec::gaussian(0.0, 1.0);
  if (s == "uniform") return DistributionSpec::uniform(0.0, 1.0);
  if (s == "dirac") return DistributionSpec::dirac(0.0);
  throw Error("config", "unknown distribution '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean field game master equation lab"};
  app.require_subcommand(1);

  RunArgs ra;
  std::string id;
  auto* run_cmd = app.add_subcommand("run", "run a registered experiment");
  run_cmd->add_option("id", id, "experiment id (see `mflab list`)");
  add_run_flags(run_cmd, ra);

  bool list_json = false;
  auto* list_cmd = app.add_subcommand("list", "list registered experiments");
  list_cmd->add_flag("--json", list_json, "print ids, descriptions and default parameters as JSON");

  std::string csv, xcol, ycol;
  auto* fit_cmd = app.add_subcommand("fit", "log-log least squares of two CSV columns");
  fit_cmd->add_option("csv", csv)->required();
  fit_cmd->add_option("xcol", xcol)->required();
  fit_cmd->add_option("ycol", ycol)->required();

  std::string dist = "gaussian", func = "abs-deviation";
  int atoms = 16, mc = 256;
  std::vector<int> ns = {4, 8, 16};
  std::uint64_t mseed = 0;
  auto* moll_cmd = app.add_subcommand("mollify", "mollify a measure functional for several n");
  moll_cmd->add_option("--dist", dist, "gaussian | uniform | dirac");
  moll_cmd->add_option("--atoms", atoms, "quantile atoms of the measure");
  moll_cmd->add_option("--functional", func, "mean | second-moment | abs-deviation");
  moll_cmd->add_option("--n", ns, "lattice fineness values")->delimiter(',');
  moll_cmd->add_option("--mc", mc, "Monte Carlo draws of the simplex perturbation");
  moll_cmd->add_option("--seed", mseed);

  std::string problem_file;
  std::vector<double> dx = {-1.0, 1.0}, datoms = {-0.4, 0.1, 0.6};
  double x_tilde = 0.6;
  std::uint64_t dseed = 0;
  auto* der_cmd = app.add_subcommand("derivative-check", "tangent representation of d_mu V against finite differences");
  der_cmd->add_option("--problem", problem_file, "MFG problem JSON (quadratic or mean-linear coupling)");
  der_cmd->add_option("--x", dx, "states x")->delimiter(',');
  der_cmd->add_option("--atoms", datoms, "atoms of the equal-weight measure")->delimiter(',');
  der_cmd->add_option("--x-tilde", x_tilde, "direction point; matching an atom enables the fd oracle");
  der_cmd->add_option("--seed", dseed);

  RunArgs nr, ch, er;
  auto* nash_cmd = app.add_subcommand("nash-rate", "shortcut for `run nash.rate`");
  add_run_flags(nash_cmd, nr);
  auto* chaos_cmd = app.add_subcommand("chaos", "shortcut for `run nash.chaos`");
  add_run_flags(chaos_cmd, ch);
  auto* emp_cmd = app.add_subcommand("empirical-rate", "shortcut for `run nash.empirical-rate`");
  add_run_flags(emp_cmd, er);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return run_experiment(id, ra);
    if (*nash_cmd) return run_experiment("nash.rate", nr);
    if (*chaos_cmd) return run_experiment("nash.chaos", ch);
    if (*emp_cmd) return run_experiment("nash.empirical-rate", er);
    if (*list_cmd) {
      if (list_json) {
        json out = json::array();
        for (const auto& d : registry_list())
          out.push_back({{"id", d.id}, {"description", d.description}, {"defaults", d.defaults}});
        std::cout << out.dump(2) << '\n';
        return 0;
      }
      for (const auto& d : registry_list()) std::cout << d.id << "\t" << d.description << '\n';
      return 0;
    }
    if (*fit_cmd) {
      std::ifstream in(csv);
      if (!in) throw Error("config", "cannot open " + csv);
      auto f = fit_rate(ResultTable::read_csv(in), xcol, ycol);
      std::cout << json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}}.dump() << '\n';
      return 0;
    }
    if (*moll_cmd) {
      ScalarMeasureFunctional U;
      Functional kind;
      if (func == "mean") kind = Functional::Mean;
      else if (func == "second-moment") kind = Functional::SecondMoment;
      else if (func == "abs-deviation") kind = Functional::AbsDeviation;
      else throw Error("config", "unknown functional '" + func + "'");
      U.eval = [kind](const EmpiricalMeasure& m) { return functional(m, kind); };
      auto mu = quantize(parse_distribution(dist), atoms);
      ResultTable t;
      t.columns = {"n", "value", "std_error", "exact"};
      for (int n : ns) {
        MollifierParams p;
        p.n = n;
        p.mc_samples = mc;
        p.seed = mseed;
        auto v = mollify_stats(U, mu, p);
        t.add_row({double(n), v.value, v.std_error, U.eval(mu)});
      }
      t.write_csv(std::cout);
      return 0;
    }
    if (*der_cmd) {
      json pj = problem_file.empty() ? json{{"coupling", {{"kind", "quadratic"}}}, {"T", 0.1}}
                                     : read_json_file(problem_file);
      ValueFunction V(problem_from_json(pj), 1, dseed);
      auto mu = EmpiricalMeasure::uniform(datoms);
      ResultTable t;
      t.columns = {"x", "value", "oracle", "rel_err"};
      for (double x : dx) {
        auto r = lions_derivative_rep(V, x, mu, x_tilde);
        t.add_row({x, r.value, r.oracle, r.rel_err});
      }
      t.write_csv(std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "mflab: " << e.what() << '\n';
    return exit_code(e);
  }
  return 0;
}
