#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mflab/mfg.hpp"

namespace mflab {

// {"hamiltonian": {"kind": "quadratic", "constant": 0},
//  "coupling": {"kind": "mean-linear", "params": {"g": "logistic", "c": 1}},
//  "T": 1, "grid": {"x_min": -8, "x_max": 8, "nx": 801},
//  "particles": {"count": 20000, "dt": 0.01}}
// Every key is optional. Couplings: zero, mean-linear (g: zero | logistic),
// quadratic, abs-deviation.
MfgProblem problem_from_json(const nlohmann::json& j);
const nlohmann::json& problem_defaults();

// Columns of doubles plus a JSON summary and a provenance block.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();

  void add_row(std::vector<double> r);
  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;

  // comma separated, '.' decimal, header line, LF endings; 17 significant
  // digits so a reload is bitwise exact
  void write_csv(std::ostream& os) const;
  static ResultTable read_csv(std::istream& is);
};

struct ExperimentConfig {
  std::string id;
  nlohmann::json params = nlohmann::json::object();  // overrides of the defaults
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: nothing written

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

using ExperimentFn = std::function<ResultTable(const nlohmann::json& params, std::uint64_t seed)>;

struct ExperimentDescriptor {
  std::string id;
  std::string description;
  nlohmann::json defaults;  // also the schema: keys and value types
  ExperimentFn fn;
};

const std::vector<ExperimentDescriptor>& registry_list();
// throws "experiment" for an unknown id
const ExperimentDescriptor& find_experiment(const std::string& id);

// Merges overrides into defaults. Unknown keys and type changes throw
// "config" naming the offending dot path.
nlohmann::json resolve_params(const nlohmann::json& defaults, const nlohmann::json& overrides);

// "a.b.c=value"; value parsed as JSON when possible, else kept as a string.
void apply_set(nlohmann::json& params, const std::string& assignment);

// FNV-1a of the canonical dump of {id, params, seed}, hex encoded
std::string config_hash(const std::string& id, const nlohmann::json& params, std::uint64_t seed);

// Resolves, runs, stamps provenance and writes <out>/<id>.csv and .json.
ResultTable run(const ExperimentConfig& config);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
// throws "config" with fewer than 4 rows, "log-domain" on nonpositive values
LogLogFit fit_rate(const ResultTable& table, const std::string& x_col, const std::string& y_col);

// 2 for input errors, 3 for numerical failures
int exit_code(const std::exception& e);

const char* version();

}  // namespace mflab
