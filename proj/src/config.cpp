#include "sgloc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace sgloc {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parseDouble(std::string_view s) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

const ConfigValue* find(const KeyValueFile& kv, const std::string& key) {
  const auto it = kv.values.find(key);
  return it == kv.values.end() ? nullptr : &it->second;
}

[[noreturn]] void typeError(const KeyValueFile& kv, const std::string& key, const char* expected) {
  std::string where;
  if (const auto it = kv.lines.find(key); it != kv.lines.end()) where = " (line " + std::to_string(it->second) + ")";
  throw Error("config key '" + key + "'" + where + ": expected " + expected);
}

void requirePositive(const std::string& key, double v) {
  if (!(v > 0) || !std::isfinite(v)) throw Error("config key '" + key + "' must be positive");
}

ClassTable parseClassMap(const std::string& text) {
  // "10:car,71:trunk,80:pole"; class ids follow first appearance.
  ClassTable table;
  table.names.clear();
  table.from_label.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string_view entry = trim(item);
    if (entry.empty()) continue;
    const auto colon = entry.find(':');
    if (colon == std::string_view::npos) throw Error("config key 'class_map': entry '" + std::string(entry) + "' lacks ':'");
    const auto label = parseDouble(trim(entry.substr(0, colon)));
    const std::string name(trim(entry.substr(colon + 1)));
    if (!label || *label < 0 || *label > 65535 || std::floor(*label) != *label || name.empty()) {
      throw Error("config key 'class_map': bad entry '" + std::string(entry) + "'");
    }
    ClassId id;
    if (auto existing = table.idOf(name)) {
      id = *existing;
    } else {
      id = static_cast<ClassId>(table.names.size());
      table.names.push_back(name);
    }
    table.from_label[static_cast<std::uint16_t>(*label)] = id;
  }
  if (table.names.empty()) throw Error("config key 'class_map': no classes");
  return table;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

KeyValueFile parseKeyValues(std::string_view text) {
  KeyValueFile kv;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view raw = trim(line.substr(eq + 1));
    if (key.empty()) throw Error("config line " + std::to_string(line_no) + ": empty key");
    if (kv.values.count(key)) throw Error("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");

    ConfigValue value;
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
      value = std::string(raw.substr(1, raw.size() - 2));
    } else if (raw == "true") {
      value = true;
    } else if (raw == "false") {
      value = false;
    } else if (auto d = parseDouble(raw)) {
      value = *d;
    } else {
      value = std::string(raw);
    }
    kv.values.emplace(key, std::move(value));
    kv.lines.emplace(key, line_no);
  }
  return kv;
}

double getNumber(const KeyValueFile& kv, const std::string& key, double fallback) {
  const ConfigValue* v = find(kv, key);
  if (!v) return fallback;
  if (const double* d = std::get_if<double>(v)) return *d;
  typeError(kv, key, "a number");
}

std::int64_t getInteger(const KeyValueFile& kv, const std::string& key, std::int64_t fallback) {
  const ConfigValue* v = find(kv, key);
  if (!v) return fallback;
  const double* d = std::get_if<double>(v);
  if (!d || std::floor(*d) != *d || std::abs(*d) > 9.0e15) typeError(kv, key, "an integer");
  return static_cast<std::int64_t>(*d);
}

bool getBool(const KeyValueFile& kv, const std::string& key, bool fallback) {
  const ConfigValue* v = find(kv, key);
  if (!v) return fallback;
  if (const bool* b = std::get_if<bool>(v)) return *b;
  typeError(kv, key, "true or false");
}

std::string getString(const KeyValueFile& kv, const std::string& key, const std::string& fallback) {
  const ConfigValue* v = find(kv, key);
  if (!v) return fallback;
  if (const std::string* s = std::get_if<std::string>(v)) return *s;
  typeError(kv, key, "a string");
}

void RunConfig::validate() const {
  if (classes.names.empty()) throw Error("config key 'class_map': no classes");
  for (std::size_t c = 0; c < classes.names.size(); ++c) {
    requirePositive("cluster_tolerance." + classes.names[c], clustering.toleranceFor(static_cast<ClassId>(c)));
  }
  requirePositive("cluster_default_tolerance", clustering.default_tolerance);
  if (clustering.min_points < 3) throw Error("config key 'min_cluster_points' must be at least 3");
  if (clustering.max_points == 0) throw Error("config key 'max_points' must be positive");
  if (triangulation.k_neighbors < 2) throw Error("config key 'k_neighbors' must be at least 2");
  requirePositive("min_side", triangulation.min_side);
  requirePositive("max_side", triangulation.max_side);
  if (triangulation.max_side < triangulation.min_side) throw Error("config key 'max_side' must be >= min_side");
  requirePositive("min_area", triangulation.min_area);
  requirePositive("side_quantum", retrieval.quantum);
  requirePositive("wasserstein_threshold", retrieval.shape_threshold);
  requirePositive("epsilon", consistency.epsilon);
  requirePositive("tls_truncation", gnc.truncation);
  if (!(gnc.mu_factor > 1)) throw Error("config key 'gnc_mu_factor' must be greater than 1");
  if (gnc.max_iterations < 1) throw Error("config key 'gnc_max_iterations' must be positive");
  requirePositive("gnc_cost_tolerance", gnc.cost_tolerance);
  requirePositive("degeneracy_threshold", gnc.degeneracy_threshold);
  requirePositive("clique_time_budget", clique_time_budget);
  requirePositive("success_max_trans", success_max_trans);
  requirePositive("success_max_rot", success_max_rot);
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "class_map = ";
  for (const auto& [label, id] : classes.from_label) os << label << ':' << classes.names[id] << ',';
  os << '\n';
  for (std::size_t c = 0; c < classes.names.size(); ++c) {
    os << "cluster_tolerance." << classes.names[c] << " = " << clustering.toleranceFor(static_cast<ClassId>(c)) << '\n';
  }
  os << "cluster_default_tolerance = " << clustering.default_tolerance << '\n'
     << "min_cluster_points = " << clustering.min_points << '\n'
     << "max_points = " << clustering.max_points << '\n'
     << "k_neighbors = " << triangulation.k_neighbors << '\n'
     << "min_side = " << triangulation.min_side << '\n'
     << "max_side = " << triangulation.max_side << '\n'
     << "min_area = " << triangulation.min_area << '\n'
     << "side_quantum = " << retrieval.quantum << '\n'
     << "wasserstein_threshold = " << retrieval.shape_threshold << '\n'
     << "semantic = " << (retrieval.semantic ? "true" : "false") << '\n'
     << "consistency_metric = " << (consistency.metric == ConsistencyMetric::Euclidean ? "euclidean" : "wasserstein") << '\n'
     << "epsilon = " << consistency.epsilon << '\n'
     << "tls_truncation = " << gnc.truncation << '\n'
     << "gnc_mu_factor = " << gnc.mu_factor << '\n'
     << "gnc_max_iterations = " << gnc.max_iterations << '\n'
     << "gnc_cost_tolerance = " << gnc.cost_tolerance << '\n'
     << "degeneracy_threshold = " << gnc.degeneracy_threshold << '\n'
     << "clique_time_budget = " << clique_time_budget << '\n'
     << "success_max_trans = " << success_max_trans << '\n'
     << "success_max_rot = " << success_max_rot << '\n';
  return os.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

RunConfig parseConfig(std::string_view text, std::vector<std::string>* warnings) {
  const KeyValueFile kv = parseKeyValues(text);
  RunConfig cfg;
  std::set<std::string> used;
  const auto use = [&](const std::string& key) {
    used.insert(key);
    return key;
  };

  if (kv.values.count("class_map")) {
    cfg.classes = parseClassMap(getString(kv, use("class_map"), ""));
  }
  const ClassTable defaults;
  cfg.clustering.default_tolerance = getNumber(kv, use("cluster_default_tolerance"), cfg.clustering.default_tolerance);
  std::vector<double> tolerance(cfg.classes.names.size());
  for (std::size_t c = 0; c < tolerance.size(); ++c) {
    // Built-in per-class defaults follow the class name, not its position.
    double fallback = cfg.clustering.default_tolerance;
    if (auto d = defaults.idOf(cfg.classes.names[c])) fallback = ClusterParams{}.toleranceFor(*d);
    tolerance[c] = getNumber(kv, use("cluster_tolerance." + cfg.classes.names[c]), fallback);
  }
  cfg.clustering.tolerance = tolerance;
  const auto min_points = getInteger(kv, use("min_cluster_points"), static_cast<std::int64_t>(cfg.clustering.min_points));
  const auto max_points = getInteger(kv, use("max_points"), static_cast<std::int64_t>(cfg.clustering.max_points));
  if (min_points < 0) throw Error("config key 'min_cluster_points' must be at least 3");
  if (max_points <= 0) throw Error("config key 'max_points' must be positive");
  cfg.clustering.min_points = static_cast<std::size_t>(min_points);
  cfg.clustering.max_points = static_cast<std::size_t>(max_points);

  cfg.triangulation.k_neighbors = static_cast<int>(getInteger(kv, use("k_neighbors"), cfg.triangulation.k_neighbors));
  cfg.triangulation.min_side = getNumber(kv, use("min_side"), cfg.triangulation.min_side);
  cfg.triangulation.max_side = getNumber(kv, use("max_side"), cfg.triangulation.max_side);
  cfg.triangulation.min_area = getNumber(kv, use("min_area"), cfg.triangulation.min_area);
  cfg.retrieval.quantum = getNumber(kv, use("side_quantum"), cfg.retrieval.quantum);
  cfg.retrieval.shape_threshold = getNumber(kv, use("wasserstein_threshold"), cfg.retrieval.shape_threshold);
  cfg.retrieval.semantic = getBool(kv, use("semantic"), cfg.retrieval.semantic);

  const std::string metric = getString(kv, use("consistency_metric"), "euclidean");
  if (metric == "euclidean") {
    cfg.consistency.metric = ConsistencyMetric::Euclidean;
  } else if (metric == "wasserstein") {
    cfg.consistency.metric = ConsistencyMetric::Wasserstein;
  } else {
    throw Error("config key 'consistency_metric': expected euclidean or wasserstein");
  }
  cfg.consistency.epsilon = getNumber(kv, use("epsilon"), cfg.consistency.epsilon);

  cfg.gnc.truncation = getNumber(kv, use("tls_truncation"), cfg.gnc.truncation);
  cfg.gnc.mu_factor = getNumber(kv, use("gnc_mu_factor"), cfg.gnc.mu_factor);
  cfg.gnc.max_iterations = static_cast<int>(getInteger(kv, use("gnc_max_iterations"), cfg.gnc.max_iterations));
  cfg.gnc.cost_tolerance = getNumber(kv, use("gnc_cost_tolerance"), cfg.gnc.cost_tolerance);
  cfg.gnc.degeneracy_threshold = getNumber(kv, use("degeneracy_threshold"), cfg.gnc.degeneracy_threshold);
  cfg.clique_time_budget = getNumber(kv, use("clique_time_budget"), cfg.clique_time_budget);
  cfg.success_max_trans = getNumber(kv, use("success_max_trans"), cfg.success_max_trans);
  cfg.success_max_rot = getNumber(kv, use("success_max_rot"), cfg.success_max_rot);

  for (const auto& [key, value] : kv.values) {
    if (!used.count(key) && warnings) {
      warnings->push_back("unknown config key '" + key + "' (line " + std::to_string(kv.lines.at(key)) + ") ignored");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig loadConfig(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseConfig(ss.str(), warnings);
}

}  // namespace sgloc
