#include "settings.hpp"

#include <charconv>

#include "lmlab/error.hpp"
#include "lmlab/matrix_io.hpp"

namespace lmlab::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

nlohmann::json parse_integer(const std::string& name, const std::string& raw) {
  const auto s = trim(raw);
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw ValidationError("--" + name + ": expected an integer, got '" + raw + "'");
  }
  return v;
}

nlohmann::json parse_real(const std::string& name, const std::string& raw) {
  try {
    return parse_double(trim(raw));
  } catch (const Error&) {
    throw ValidationError("--" + name + ": expected a number, got '" + raw + "'");
  }
}

nlohmann::json from_text(const std::string& name, ParamType type, const std::string& raw) {
  switch (type) {
    case ParamType::integer:
      return parse_integer(name, raw);
    case ParamType::real:
      return parse_real(name, raw);
    case ParamType::text:
      return raw;
    case ParamType::flag:
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw ValidationError("--" + name + ": expected true or false, got '" + raw + "'");
    case ParamType::count_list:
    case ParamType::real_list: {
      auto out = nlohmann::json::array();
      for (const auto& item : split_list(raw)) {
        out.push_back(type == ParamType::count_list ? parse_integer(name, item)
                                                    : parse_real(name, item));
      }
      return out;
    }
  }
  return raw;
}

nlohmann::json from_config(const std::string& name, ParamType type, const nlohmann::json& v) {
  if (v.is_string() && type != ParamType::text) return from_text(name, type, v.get<std::string>());
  const auto bad = [&] {
    return ValidationError("config key '" + name + "' has the wrong type: " + v.dump());
  };
  switch (type) {
    case ParamType::integer:
      if (!v.is_number_integer()) throw bad();
      return v;
    case ParamType::real:
      if (!v.is_number()) throw bad();
      return v.get<double>();
    case ParamType::text:
      if (!v.is_string()) throw bad();
      return v;
    case ParamType::flag:
      if (!v.is_boolean()) throw bad();
      return v;
    case ParamType::count_list:
    case ParamType::real_list: {
      if (!v.is_array()) throw bad();
      auto out = nlohmann::json::array();
      for (const auto& x : v) {
        if (type == ParamType::count_list && !x.is_number_integer()) throw bad();
        if (type == ParamType::real_list && !x.is_number()) throw bad();
        out.push_back(type == ParamType::real_list ? nlohmann::json(x.get<double>()) : x);
      }
      return out;
    }
  }
  return v;
}

}  // namespace

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string::npos ? std::string::npos
                                                                       : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Settings::Settings(const std::vector<ParamSpec>& specs,
                   const std::map<std::string, std::string>& flags, const nlohmann::json& config) {
  if (!config.is_null() && !config.is_object()) {
    throw ValidationError("config file must hold a JSON object");
  }
  for (const auto& [key, _] : config.items()) {
    bool known = false;
    for (const auto& s : specs) known = known || s.name == key;
    if (!known) throw ValidationError("config key '" + key + "' is not a parameter of this command");
  }
  for (const auto& s : specs) {
    Entry e{s.type, s.fallback, "default"};
    if (auto f = flags.find(s.name); f != flags.end()) {
      e.value = from_text(s.name, s.type, f->second);
      e.source = "flag";
    } else if (config.is_object() && config.contains(s.name)) {
      e.value = from_config(s.name, s.type, config.at(s.name));
      e.source = "config";
    }
    order_.push_back(s.name);
    entries_[s.name] = std::move(e);
  }
}

const Settings::Entry& Settings::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("internal: unknown parameter " + name);
  return it->second;
}

std::uint64_t Settings::seed() const {
  const auto v = integer("seed");
  if (v < 0) throw ValidationError("--seed must be >= 0");
  return static_cast<std::uint64_t>(v);
}

std::int64_t Settings::integer(const std::string& name) const {
  return at(name).value.get<std::int64_t>();
}

std::size_t Settings::count(const std::string& name) const {
  const auto v = integer(name);
  if (v < 0) throw ValidationError("--" + name + " must be >= 0");
  return static_cast<std::size_t>(v);
}

double Settings::real(const std::string& name) const { return at(name).value.get<double>(); }

const std::string& Settings::text(const std::string& name) const {
  return at(name).value.get_ref<const std::string&>();
}

bool Settings::flag(const std::string& name) const { return at(name).value.get<bool>(); }

std::vector<std::size_t> Settings::counts(const std::string& name) const {
  std::vector<std::size_t> out;
  for (const auto& v : at(name).value) {
    if (v.get<std::int64_t>() < 0) throw ValidationError("--" + name + " entries must be >= 0");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

std::vector<double> Settings::reals(const std::string& name) const {
  return at(name).value.get<std::vector<double>>();
}

nlohmann::ordered_json Settings::manifest() const {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& name : order_) {
    const auto& e = entries_.at(name);
    out[name] = {{"value", e.value}, {"source", e.source}};
  }
  return out;
}

}  // namespace lmlab::cli
