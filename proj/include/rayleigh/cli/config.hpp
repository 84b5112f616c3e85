#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rayleigh/audit.hpp"
#include "rayleigh/dynamics.hpp"
#include "rayleigh/errors.hpp"
#include "rayleigh/system.hpp"

namespace rayleigh::cli {

// Invalid configuration. `field` is the JSON path of the offending value
// ("initial.q", "dissipation.terms[1].degree"), empty for syntax errors.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message);

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class OutputFormat { csv, jsonl };

std::string_view format_name(OutputFormat f);

struct OutputConfig {
  std::filesystem::path path = "trajectory.csv";
  OutputFormat format = OutputFormat::csv;
  bool plot_data = false;
};

struct RunConfig {
  std::string builtin;   // empty for an inline system
  ParamTable overrides;  // builtin parameter overrides
  SystemSpec system;
  State initial;
  double t_end = 10.0;
  IntegratorConfig integrator;
  AuditTolerances audit;
  OutputConfig output;
};

struct LoadOptions {
  // Verify every declared term degree numerically while loading.
  bool check_homogeneity = true;
  std::size_t homogeneity_samples = 100;
  // Used in syntax error messages.
  std::string source_name = "<config>";
};

RunConfig load_config(const std::filesystem::path& path, LoadOptions options = {});
RunConfig parse_config(std::string_view text, const LoadOptions& options = {});
RunConfig config_from_json(const nlohmann::json& doc, const LoadOptions& options = {});

// Inverse of config_from_json: loading the result reproduces `cfg`.
nlohmann::json config_to_json(const RunConfig& cfg);

// Parses repeated "name=value" assignments.
ParamTable parse_assignments(const std::vector<std::string>& items);

// Applies parameter overrides to the system. Names must exist.
void apply_overrides(RunConfig& cfg, const ParamTable& overrides,
                     const LoadOptions& options = {});

// Throws ConfigError naming the first term that fails homogeneity_check.
void verify_homogeneity(const SystemSpec& sys, std::size_t samples);

}  // namespace rayleigh::cli
