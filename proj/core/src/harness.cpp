#include "mflab/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mflab/error.hpp"
#include "mflab/nash.hpp"

namespace mflab {

namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

bool same_kind(const nlohmann::json& a, const nlohmann::json& b) {
  if (a.is_number() && b.is_number()) {
    // integers stay integers; a float default accepts either
    return a.is_number_float() || !b.is_number_float();
  }
  return a.type() == b.type();
}

void merge(nlohmann::json& into, const nlohmann::json& over, const std::string& path) {
  if (!over.is_object()) throw Error("config", "overrides at '" + path + "' must be an object");
  for (auto it = over.begin(); it != over.end(); ++it) {
    const std::string p = join_path(path, it.key());
    if (!into.contains(it.key())) throw Error("config", "unknown parameter '" + p + "'");
    auto& slot = into[it.key()];
    if (slot.is_object()) {
      merge(slot, it.value(), p);
      continue;
    }
    if (!same_kind(slot, it.value()))
      throw Error("config", "parameter '" + p + "' expects " + std::string(slot.type_name()) +
                                ", got " + it.value().type_name());
    if (slot.is_array() && !slot.empty()) {
      for (const auto& v : it.value())
        if (!same_kind(slot.front(), v))
          throw Error("config", "parameter '" + p + "' has an element of the wrong type");
    }
    slot = it.value();
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void ResultTable::add_row(std::vector<double> r) {
  if (r.size() != columns.size()) throw Error("config", "row width differs from the header");
  rows.push_back(std::move(r));
}

std::size_t ResultTable::column_index(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == name) return k;
  throw Error("config", "no column '" + name + "'");
}

std::vector<double> ResultTable::column(const std::string& name) const {
  const auto k = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

void ResultTable::write_csv(std::ostream& os) const {
  for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << format_double(r[k]);
    os << '\n';
  }
}

ResultTable ResultTable::read_csv(std::istream& is) {
  ResultTable t;
  std::string line;
  if (!std::getline(is, line)) throw Error("config", "empty csv");
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) t.columns.push_back(c);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) {
      try {
        r.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw Error("config", "bad csv cell '" + c + "'");
      }
    }
    t.add_row(std::move(r));
  }
  return t;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("config", "config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "id" && it.key() != "params" && it.key() != "seed" && it.key() != "out")
      throw Error("config", "unknown config key '" + it.key() + "'");
  ExperimentConfig c;
  try {
    if (j.contains("id")) c.id = j.at("id").get<std::string>();
    if (j.contains("params")) c.params = j.at("params");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("config", e.what());
  }
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"id", id}, {"params", params}, {"seed", seed}, {"out", out_dir}};
}

const ExperimentDescriptor& find_experiment(const std::string& id) {
  for (const auto& d : registry_list())
    if (d.id == id) return d;
  throw Error("experiment", "unknown experiment '" + id + "'");
}

nlohmann::json resolve_params(const nlohmann::json& defaults, const nlohmann::json& overrides) {
  nlohmann::json out = defaults;
  if (!overrides.is_null()) merge(out, overrides, "");
  return out;
}

void apply_set(nlohmann::json& params, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw Error("config", "--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  nlohmann::json* node = &params;
  std::stringstream ks(key);
  std::vector<std::string> parts;
  for (std::string p; std::getline(ks, p, '.');) parts.push_back(p);
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    auto& next = (*node)[parts[k]];
    if (next.is_null()) next = nlohmann::json::object();
    if (!next.is_object()) throw Error("config", "'" + parts[k] + "' in '" + key + "' is not an object");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

std::string config_hash(const std::string& id, const nlohmann::json& params, std::uint64_t seed) {
  // nlohmann::json objects are key-sorted, so dump() is canonical
  const std::string s = nlohmann::json{{"id", id}, {"params", params}, {"seed", seed}}.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

ResultTable run(const ExperimentConfig& config) {
  const auto& d = find_experiment(config.id);
  const auto params = resolve_params(d.defaults, config.params);
  const auto start = std::chrono::steady_clock::now();
  ResultTable t = d.fn(params, config.seed);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.provenance = {{"id", config.id},
                  {"seed", config.seed},
                  {"params", params},
                  {"config_hash", config_hash(config.id, params, config.seed)},
                  {"version", version()},
                  {"wall_time_s", wall}};
  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const fs::path base = fs::path(config.out_dir) / config.id;
    std::ofstream csv(base.string() + ".csv", std::ios::binary);
    t.write_csv(csv);
    std::ofstream js(base.string() + ".json", std::ios::binary);
    js << nlohmann::json{{"provenance", t.provenance}, {"columns", t.columns}, {"summary", t.summary}}.dump(2)
       << '\n';
    if (!csv || !js) throw Error("config", "could not write results under " + config.out_dir);
  }
  return t;
}

LogLogFit fit_rate(const ResultTable& table, const std::string& x_col, const std::string& y_col) {
  RateFit r;
  r.N = table.column(x_col);
  r.stat = table.column(y_col);
  if (r.N.size() < 4) throw Error("config", "a rate fit needs at least 4 rows");
  fit_loglog(r);
  return {r.slope, r.intercept, r.r2};
}

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->numerical() ? 3 : 2;
  return 2;
}

const char* version() { return "0.1.0"; }

const nlohmann::json& problem_defaults() {
  static const nlohmann::json kDefaults = {
      {"hamiltonian", {{"kind", "quadratic"}, {"constant", 0.0}}},
      {"coupling", {{"kind", "zero"}, {"params", {{"g", "zero"}, {"c", 0.0}}}}},
      {"T", 1.0},
      {"grid", {{"x_min", -8.0}, {"x_max", 8.0}, {"nx", 801}}},
      {"particles", {{"count", 20000}, {"dt", 0.01}}}};
  return kDefaults;
}

MfgProblem problem_from_json(const nlohmann::json& j) {
  const auto c = resolve_params(problem_defaults(), j);
  MfgProblem p;
  if (c["hamiltonian"]["kind"] != "quadratic")
    throw Error("config", "hamiltonian.kind: only 'quadratic' is available from config");
  p.H = HamiltonianSpec::quadratic(c["hamiltonian"]["constant"]);
  const std::string kind = c["coupling"]["kind"];
  const auto& cp = c["coupling"]["params"];
  if (kind == "zero") {
    p.coupling = CouplingSpec::zero();
  } else if (kind == "mean-linear") {
    const std::string g = cp["g"];
    if (g == "zero") {
      auto z = [](double) { return 0.0; };
      p.coupling = CouplingSpec::mean_linear(z, z, cp["c"]);
    } else if (g == "logistic") {
      p.coupling = CouplingSpec::mean_linear(
          [](double x) { return 1.0 / (1.0 + std::exp(x)); },
          [](double x) { return -std::exp(x) / ((1.0 + std::exp(x)) * (1.0 + std::exp(x))); }, cp["c"]);
    } else {
      throw Error("config", "coupling.params.g: unknown profile '" + g + "'");
    }
  } else if (kind == "quadratic") {
    p.coupling = CouplingSpec::quadratic();
  } else if (kind == "abs-deviation") {
    p.coupling = CouplingSpec::abs_deviation();
  } else {
    throw Error("config", "coupling.kind: unknown coupling '" + kind + "'");
  }
  p.T = c["T"];
  p.grid.x_min = c["grid"]["x_min"];
  p.grid.x_max = c["grid"]["x_max"];
  p.grid.nx = c["grid"]["nx"];
  p.particles.particles = c["particles"]["count"];
  p.particles.dt = c["particles"]["dt"];
  p.validate();
  return p;
}

}  // namespace mflab
