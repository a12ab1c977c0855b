// crystalflow: command-line front end for the scenario harness.
//
//   crystalflow <scenario> --config FILE [--seed S] [--out DIR]
//   crystalflow pde run --config FILE [--out DIR]
//   crystalflow meso run --config FILE
//   crystalflow statmech table --config FILE
//   crystalflow spectral audit --traj DIR --s1 V --s2 V [--s V] [--out DIR]
//   crystalflow spectral threshold --s V
//
// Exit codes: 0 ok, 1 internal error, 2 invalid configuration or input,
// 3 file-system error, 4 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "crystalflow/errors.hpp"
#include "crystalflow/harness.hpp"
#include "crystalflow/io.hpp"
#include "crystalflow/spectral.hpp"

namespace cf = crystalflow;
namespace hn = crystalflow::harness;

namespace {

struct ScenarioArgs {
  std::string action;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_scenario(CLI::App& app, const std::string& name, const std::string& action_hint, ScenarioArgs& args) {
  auto* sub = app.add_subcommand(name, "run the " + name + " scenario");
  sub->add_option("action", args.action, "optional action word (" + action_hint + ")");
  sub->add_option("--config", args.config, "JSON run configuration")->required();
  sub->add_option("--seed", args.seed, "override the configured seed");
  sub->add_option("--out", args.out, "override the configured output directory");
}

int run_scenario(const std::string& name, const std::string& action_hint, const ScenarioArgs& args) {
  if (!args.action.empty() && args.action != action_hint)
    throw cf::ConfigInvalid("unknown action \"" + args.action + "\" for " + name);
  auto doc = nlohmann::json::parse(cf::io::read_file(args.config), nullptr, false);
  if (doc.is_discarded()) throw cf::ConfigInvalid(args.config + ": not valid JSON");
  if (doc.is_object() && !doc.contains("scenario")) doc["scenario"] = name;
  auto cfg = hn::parse_config(doc);
  if (hn::to_string(cfg.scenario) != name)
    throw cf::ConfigInvalid("config scenario \"" + std::string(hn::to_string(cfg.scenario)) + "\" does not match \"" + name + "\"");
  if (args.seed) cfg.seed = *args.seed;
  if (!args.out.empty()) cfg.out_dir = args.out;
  const auto outcome = hn::run(cfg, std::cerr);
  std::cout << outcome.summary.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crystal surface relaxation: lattice KMC, mesoscale ODE and continuum PDE"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hn::version()));

  struct Entry {
    std::string name;
    std::string action;
    ScenarioArgs args;
  };
  std::vector<Entry> entries = {{"kmc", "run", {}},          {"meso", "run", {}},
                                {"pde", "run", {}},          {"h_equation", "run", {}},
                                {"compare", "run", {}},      {"spectral_audit", "run", {}},
                                {"statmech_table", "table", {}}, {"statmech", "table", {}}};
  for (auto& e : entries) add_scenario(app, e.name, e.action, e.args);

  auto* spectral = app.add_subcommand("spectral", "Fourier-norm tools");
  spectral->require_subcommand(1);
  std::string traj, out;
  double s1 = 0.0, s2 = 2.0, s_lyap = 2.0, s_thr = 2.0;
  auto* audit = spectral->add_subcommand("audit", "Lyapunov and decay audit of a snapshot directory");
  audit->add_option("--traj", traj, "directory of .bin/.json snapshots")->required();
  audit->add_option("--s1", s1, "lower decay exponent")->required();
  audit->add_option("--s2", s2, "upper decay exponent")->required();
  audit->add_option("--s", s_lyap, "Lyapunov norm order (default 2)");
  audit->add_option("--out", out, "write audit.json and manifest.json here");
  auto* threshold = spectral->add_subcommand("threshold", "print the critical threshold y_s");
  threshold->add_option("--s", s_thr, "series order")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (auto& e : entries) {
      if (!app.got_subcommand(e.name)) continue;
      const std::string name = e.name == "statmech" ? "statmech_table" : e.name;
      return run_scenario(name, e.action, e.args);
    }
    if (threshold->parsed()) {
      std::printf("%.12f\n", cf::spectral::critical_threshold(s_thr));
      return 0;
    }
    if (audit->parsed()) {
      nlohmann::json doc = {{"scenario", "spectral_audit"},
                            {"out_dir", out},
                            {"parameters", {{"traj", traj}, {"s", s_lyap}, {"s1", s1}, {"s2", s2}}}};
      auto cfg = hn::parse_config(doc);
      if (out.empty()) {
        // Report only; nothing written.
        const auto snaps = cf::io::read_trajectory(traj);
        std::vector<double> times;
        std::vector<cf::GridField> fields;
        for (const auto& sn : snaps) {
          times.push_back(sn.t);
          fields.push_back(sn.field);
        }
        const auto ly = cf::spectral::lyapunov_audit(times, fields, s_lyap);
        const auto dc = cf::spectral::decay_audit(times, fields, s1, s2);
        nlohmann::json j = {{"lyapunov_holds", ly.holds}, {"binding", ly.binding}, {"sigma", ly.sigma},
                            {"worst_slack", ly.worst_slack}, {"norm2_nonincreasing", ly.norm2_nonincreasing},
                            {"decay_C", dc.C}, {"decay_finite", dc.finite}};
        std::cout << j.dump(2) << "\n";
        return 0;
      }
      const auto outcome = hn::run(cfg, std::cerr);
      std::cout << outcome.summary.dump(2) << "\n";
      return 0;
    }
  } catch (const cf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
