#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rayleigh/dynamics.hpp"
#include "rayleigh/system.hpp"

namespace rayleigh::cli {

// Closed-form motion from `init` after time t, under parameters `params`.
// Returns nullopt outside the regime the formula covers.
using ReferenceSolution =
    std::function<std::optional<State>(const ParamTable& params, const State& init, double t)>;

struct BuiltinSystem {
  std::string name;
  std::string description;
  ParamTable defaults;
  std::function<SystemSpec(const ParamTable& params)> build;
  State initial;
  double t_end = 10.0;
  IntegratorConfig integrator;  // default when a config names this system
  ReferenceSolution reference;  // empty when no closed form is known

  // Defaults with `overrides` applied. Unknown names throw BindError.
  SystemSpec make(const ParamTable& overrides = {}) const;
};

const std::vector<BuiltinSystem>& builtin_catalog();

// Throws ModelError listing the known names.
const BuiltinSystem& find_builtin(std::string_view name);

}  // namespace rayleigh::cli
