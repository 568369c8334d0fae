#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "settings.hpp"

namespace lmlab::cli {

/// Everything a subcommand needs: resolved settings, an output directory and a
/// record of the files it wrote (listed in the manifest).
class RunContext {
 public:
  RunContext(Settings settings, std::filesystem::path out_dir, std::ostream& out)
      : settings_(std::move(settings)), out_dir_(std::move(out_dir)), out_(out) {}

  const Settings& settings() const { return settings_; }
  std::ostream& out() { return out_; }

  /// Opens out_dir/name for writing (binary, truncating) and records it.
  std::ofstream artifact(const std::string& name);
  void write_json(const std::string& name, const nlohmann::ordered_json& j);
  std::filesystem::path path(const std::string& name) const { return out_dir_ / name; }
  /// Records a file written by other means (e.g. a library save function).
  void record(const std::string& name) { artifacts_.push_back(name); }

  const std::vector<std::string>& artifacts() const { return artifacts_; }

 private:
  Settings settings_;
  std::filesystem::path out_dir_;
  std::ostream& out_;
  std::vector<std::string> artifacts_;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;  // without the common seed/out/config
  std::function<int(RunContext&)> body;  // returns the exit status
};

const std::vector<Command>& commands();

}  // namespace lmlab::cli
