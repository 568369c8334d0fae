#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "lmlab/error.hpp"
#include "lmlab/rng.hpp"

namespace lmlab::cli {
namespace {

struct Bound {
  const Command* command = nullptr;
  CLI::App* app = nullptr;
  std::vector<ParamSpec> params;
  std::map<std::string, std::string> raw;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
};

std::vector<ParamSpec> with_common(const Command& c) {
  std::vector<ParamSpec> p{{"seed", ParamType::integer, 0, "random seed"},
                           {"out", ParamType::text, "lmlab-out", "output directory"}};
  p.insert(p.end(), c.params.begin(), c.params.end());
  return p;
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("--config: cannot read '" + path + "'");
  auto j = nlohmann::json::parse(is, nullptr, false);
  if (j.is_discarded()) throw ValidationError("--config: '" + path + "' is not valid JSON");
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Small, seeded experiments on the mechanics of language models.", "lmlab"};
  app.require_subcommand(1);
  std::string config_path;

  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& c : commands()) {
    auto b = std::make_unique<Bound>();
    b->command = &c;
    b->app = app.add_subcommand(c.name, c.help);
    b->params = with_common(c);
    b->app->add_option("--config", config_path, "JSON file of parameter values");
    for (const auto& p : b->params) {
      if (p.type == ParamType::flag) {
        b->options[p.name] = b->app->add_flag("--" + p.name, b->flags[p.name], p.help);
      } else {
        const auto shown = p.fallback.is_string() ? p.fallback.get<std::string>() : p.fallback.dump();
        b->options[p.name] =
            b->app->add_option("--" + p.name, b->raw[p.name], p.help + " [" + shown + "]");
      }
    }
    bound.push_back(std::move(b));
  }

  if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
    bool known = false;
    for (const auto& c : commands()) known = known || c.name == args[0];
    if (!known) {
      err << "lmlab: unknown subcommand '" << args[0] << "'\n\n" << app.help();
      return kExitUsage;
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Bound* chosen = nullptr;
  for (const auto& b : bound)
    if (b->app->parsed()) chosen = b.get();

  try {
    std::map<std::string, std::string> given;
    for (const auto& p : chosen->params) {
      if (chosen->options.at(p.name)->count() == 0) continue;
      given[p.name] = p.type == ParamType::flag ? (chosen->flags.at(p.name) ? "true" : "false")
                                                : chosen->raw.at(p.name);
    }
    const auto config = config_path.empty() ? nlohmann::json() : load_config(config_path);
    Settings settings(chosen->params, given, config);
    settings.seed();  // validates

    const std::filesystem::path out_dir = settings.text("out");
    std::filesystem::create_directories(out_dir);
    RunContext ctx(settings, out_dir, out);
    const int status = chosen->command->body(ctx);

    auto artifacts = ctx.artifacts();
    std::sort(artifacts.begin(), artifacts.end());
    nlohmann::ordered_json manifest;
    manifest["tool"] = "lmlab";
    manifest["version"] = "0.1.0";
    manifest["subcommand"] = chosen->command->name;
    manifest["rng"] = Rng::kAlgorithm;
    manifest["config"] = config_path.empty() ? nlohmann::ordered_json(nullptr)
                                             : nlohmann::ordered_json(config_path);
    manifest["parameters"] = settings.manifest();
    manifest["artifacts"] = artifacts;
    manifest["exit_status"] = status;
    std::ofstream os(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    os << manifest.dump(2) << '\n';
    return status;
  } catch (const Error& e) {
    err << "lmlab " << chosen->command->name << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "lmlab " << chosen->command->name << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "lmlab " << chosen->command->name << ": " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace lmlab::cli
