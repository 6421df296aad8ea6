#ifndef SGLOC_CONFIG_HPP
#define SGLOC_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sgloc/clustering.hpp"
#include "sgloc/pruning.hpp"
#include "sgloc/registration.hpp"
#include "sgloc/scene_graph.hpp"

namespace sgloc {

/// Everything a localization run needs. Defaults are the documented defaults;
/// see README for the key names.
struct RunConfig {
  ClassTable classes;
  ClusterParams clustering;
  TriangulationParams triangulation;
  RetrievalParams retrieval;
  ConsistencyParams consistency;
  GncParams gnc;
  double clique_time_budget = 10.0;  // s
  double success_max_trans = 5.0;    // m
  double success_max_rot = 10.0;     // deg

  /// Throws Error naming the offending key.
  void validate() const;

  /// Stable "key = value" listing of every setting, used for the map header hash.
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// One parsed "key = value" file.
using ConfigValue = std::variant<bool, double, std::string>;

struct KeyValueFile {
  std::map<std::string, ConfigValue> values;
  std::map<std::string, int> lines;
};

/// Flat key-value syntax: one `key = value` per line, `#` starts a comment,
/// values are numbers, true/false, or strings (optionally double quoted).
KeyValueFile parseKeyValues(std::string_view text);

/// Typed accessors that throw Error naming the key on a type mismatch.
double getNumber(const KeyValueFile& kv, const std::string& key, double fallback);
std::int64_t getInteger(const KeyValueFile& kv, const std::string& key, std::int64_t fallback);
bool getBool(const KeyValueFile& kv, const std::string& key, bool fallback);
std::string getString(const KeyValueFile& kv, const std::string& key, const std::string& fallback);

/// Unknown keys are reported in `warnings` (and never fail the load).
RunConfig parseConfig(std::string_view text, std::vector<std::string>* warnings = nullptr);
RunConfig loadConfig(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace sgloc

#endif  // SGLOC_CONFIG_HPP
