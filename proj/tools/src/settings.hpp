#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace lmlab::cli {

enum class ParamType { integer, real, text, flag, count_list, real_list };

struct ParamSpec {
  std::string name;  // flag name without dashes; also the config key
  ParamType type;
  nlohmann::json fallback;
  std::string help;
};

/// Resolved parameter values with their provenance: "flag", "config" or "default".
/// Precedence is flag > config file > built-in default.
class Settings {
 public:
  Settings(const std::vector<ParamSpec>& specs, const std::map<std::string, std::string>& flags,
           const nlohmann::json& config);

  std::uint64_t seed() const;
  std::int64_t integer(const std::string& name) const;
  std::size_t count(const std::string& name) const;  // integer >= 0
  double real(const std::string& name) const;
  const std::string& text(const std::string& name) const;
  bool flag(const std::string& name) const;
  std::vector<std::size_t> counts(const std::string& name) const;
  std::vector<double> reals(const std::string& name) const;

  /// {"name": {"value": v, "source": s}, ...} in declaration order.
  nlohmann::ordered_json manifest() const;

 private:
  struct Entry {
    ParamType type;
    nlohmann::json value;
    std::string source;
  };
  const Entry& at(const std::string& name) const;

  std::vector<std::string> order_;
  std::map<std::string, Entry> entries_;
};

/// Parses "1,2,3" style lists.
std::vector<std::string> split_list(const std::string& s);

}  // namespace lmlab::cli
