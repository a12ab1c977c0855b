#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

/// Scenario configuration, orchestration and artifact emission.
namespace crystalflow::harness {

enum class Scenario { Kmc, Meso, Pde, HEquation, Compare, SpectralAudit, StatmechTable };
std::string_view to_string(Scenario s) noexcept;
Scenario parse_scenario(std::string_view s);

struct RunConfig {
  Scenario scenario = Scenario::Pde;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  nlohmann::json parameters = nlohmann::json::object();
};

/// Validates the top-level document. Keys: scenario, seed, out_dir,
/// parameters; anything else is rejected with ConfigInvalid. Scenario
/// parameters are validated by run() before any work starts.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of a config (sorted keys, no whitespace).
std::string canonical(const RunConfig& cfg);

struct RunOutcome {
  std::vector<std::filesystem::path> artifacts;  // relative to out_dir
  nlohmann::json summary;
};

/// Runs one scenario and writes its artifacts plus manifest.json into
/// out_dir. Throws crystalflow::Error subclasses; see exit codes.
RunOutcome run(const RunConfig& cfg, std::ostream& log);

/// Code version stamped into manifests.
std::string_view version() noexcept;

}  // namespace crystalflow::harness
