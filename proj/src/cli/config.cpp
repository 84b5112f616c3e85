#include "rayleigh/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rayleigh/checks.hpp"
#include "rayleigh/cli/builtins.hpp"

namespace rayleigh::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(join(path, key), "unknown field");
  }
}

const json* member(const json& obj, std::string_view key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& required(const json& obj, const std::string& path, std::string_view key) {
  const json* j = member(obj, key);
  if (!j) throw ConfigError(join(path, key), "missing required field");
  return *j;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
  return x;
}

double get_positive(const json& j, const std::string& path) {
  const double x = get_number(j, path);
  if (!(x > 0.0)) throw ConfigError(path, "must be positive");
  return x;
}

std::uint64_t get_unsigned(const json& j, const std::string& path, std::uint64_t min) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(path, "expected a non-negative integer");
  const auto x = j.get<std::uint64_t>();
  if (x < min) throw ConfigError(path, "must be at least " + std::to_string(min));
  return x;
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

// Expressions may be written as strings or as bare numbers.
Expr get_expr(const json& j, const std::string& path, std::size_t dof,
              const ParamTable& params, bool velocities_allowed) {
  Expr e;
  if (j.is_number()) {
    e = Expr::constant(get_number(j, path));
  } else {
    const std::string source = get_string(j, path);
    try {
      e = parse(source);
    } catch (const ParseError& err) {
      throw ConfigError(path, "in '" + source + "': " + err.what());
    }
  }
  try {
    e.bind(dof, params);
  } catch (const BindError& err) {
    throw ConfigError(path, err.what());
  }
  if (!velocities_allowed && e.uses_velocity())
    throw ConfigError(path, "must not depend on velocities");
  return e;
}

Eigen::VectorXd get_vector(const json& j, const std::string& path, std::size_t dof) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  if (j.size() != dof)
    throw ConfigError(path, "expected " + std::to_string(dof) + " values, got " +
                                std::to_string(j.size()));
  Eigen::VectorXd out(static_cast<Eigen::Index>(dof));
  for (std::size_t i = 0; i < dof; ++i)
    out[static_cast<Eigen::Index>(i)] = get_number(j[i], index(path, i));
  return out;
}

ParamTable get_params(const json& j, const std::string& path) {
  require_object(j, path);
  ParamTable params;
  for (const auto& [name, value] : j.items())
    params.set(name, get_number(value, join(path, name)));
  return params;
}

QuadratureConfig get_quadrature(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"node_count", "panels", "tolerance"});
  QuadratureConfig q;
  if (const json* x = member(j, "node_count"))
    q.node_count = get_unsigned(*x, join(path, "node_count"), 8);
  if (const json* x = member(j, "panels")) q.panels = get_unsigned(*x, join(path, "panels"), 1);
  if (const json* x = member(j, "tolerance"))
    q.tolerance = get_positive(*x, join(path, "tolerance"));
  return q;
}

DissipationSpec get_dissipation(const json& j, const std::string& path, std::size_t dof,
                                const ParamTable& params) {
  require_object(j, path);
  // Without "mode", a "raw" expression selects general mode.
  const json* m = member(j, "mode");
  const std::string mode = m ? get_string(*m, join(path, "mode"))
                             : (member(j, "raw") ? "general" : "homogeneous_sum");
  QuadratureConfig quad;
  if (const json* x = member(j, "quadrature")) quad = get_quadrature(*x, join(path, "quadrature"));

  if (mode == "homogeneous_sum") {
    reject_unknown(j, path, {"mode", "terms", "quadrature"});
    std::vector<DissipationTerm> terms;
    if (const json* list = member(j, "terms")) {
      const std::string lpath = join(path, "terms");
      if (!list->is_array()) throw ConfigError(lpath, "expected an array of terms");
      for (std::size_t i = 0; i < list->size(); ++i) {
        const std::string tpath = index(lpath, i);
        const json& t = (*list)[i];
        require_object(t, tpath);
        reject_unknown(t, tpath, {"expr", "degree", "smooth_eps"});
        DissipationTerm term;
        term.expr = get_expr(required(t, tpath, "expr"), join(tpath, "expr"), dof, params, true);
        term.degree = get_positive(required(t, tpath, "degree"), join(tpath, "degree"));
        if (const json* eps = member(t, "smooth_eps"))
          term.smooth_eps = get_positive(*eps, join(tpath, "smooth_eps"));
        terms.push_back(std::move(term));
      }
    }
    return DissipationSpec::homogeneous_sum(std::move(terms), quad);
  }
  if (mode == "general") {
    reject_unknown(j, path, {"mode", "raw", "quadrature"});
    Expr raw = get_expr(required(j, path, "raw"), join(path, "raw"), dof, params, true);
    return DissipationSpec::general(std::move(raw), quad);
  }
  throw ConfigError(join(path, "mode"),
                    "expected \"homogeneous_sum\" or \"general\", got \"" + mode + "\"");
}

SystemSpec get_inline_system(const json& doc) {
  const auto dof = static_cast<std::size_t>(get_unsigned(required(doc, "", "dof"), "dof", 1));
  ParamTable params;
  if (const json* p = member(doc, "params")) params = get_params(*p, "params");

  const json& rows = required(doc, "", "mass_matrix");
  if (!rows.is_array() || rows.size() != dof)
    throw ConfigError("mass_matrix", "expected " + std::to_string(dof) + " rows");
  std::vector<Expr> mass;
  for (std::size_t i = 0; i < dof; ++i) {
    const std::string rpath = index("mass_matrix", i);
    if (!rows[i].is_array() || rows[i].size() != dof)
      throw ConfigError(rpath, "expected " + std::to_string(dof) + " entries");
    for (std::size_t k = 0; k < dof; ++k)
      mass.push_back(get_expr(rows[i][k], index(rpath, k), dof, params, false));
  }
  Expr potential = get_expr(required(doc, "", "potential"), "potential", dof, params, false);

  DissipationSpec dissipation;
  if (const json* d = member(doc, "dissipation"))
    dissipation = get_dissipation(*d, "dissipation", dof, params);

  std::vector<std::string> labels;
  if (const json* l = member(doc, "labels")) {
    if (!l->is_array() || l->size() != dof)
      throw ConfigError("labels", "expected " + std::to_string(dof) + " names");
    for (std::size_t i = 0; i < dof; ++i) labels.push_back(get_string((*l)[i], index("labels", i)));
  }

  try {
    return SystemSpec(dof, std::move(mass), std::move(potential), std::move(dissipation),
                      std::move(params), std::move(labels));
  } catch (const ModelError& e) {
    throw ConfigError(member(doc, "dissipation") ? "dissipation" : "", e.what());
  } catch (const BindError& e) {
    throw ConfigError("", e.what());
  }
}

IntegratorConfig get_integrator(const json& j, const std::string& path,
                                IntegratorConfig cfg) {
  require_object(j, path);
  reject_unknown(j, path, {"method", "dt", "rel_tol", "abs_tol", "max_steps", "sample_every"});
  if (const json* m = member(j, "method")) {
    const std::string name = get_string(*m, join(path, "method"));
    if (name == "rk4")
      cfg.method = Method::rk4;
    else if (name == "rk45")
      cfg.method = Method::rk45;
    else
      throw ConfigError(join(path, "method"), "expected \"rk4\" or \"rk45\", got \"" + name + "\"");
  }
  if (const json* x = member(j, "dt")) cfg.dt = get_positive(*x, join(path, "dt"));
  if (const json* x = member(j, "rel_tol")) cfg.rel_tol = get_positive(*x, join(path, "rel_tol"));
  if (const json* x = member(j, "abs_tol")) cfg.abs_tol = get_positive(*x, join(path, "abs_tol"));
  if (const json* x = member(j, "max_steps"))
    cfg.max_steps = get_unsigned(*x, join(path, "max_steps"), 1);
  if (const json* x = member(j, "sample_every"))
    cfg.sample_every = get_unsigned(*x, join(path, "sample_every"), 1);
  return cfg;
}

AuditTolerances get_audit(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"energy", "euler", "residual", "residual_spacing", "slope_min", "slope_max",
                  "conservative", "probes", "check_samples", "seed"});
  AuditTolerances tol;
  auto number = [&](std::string_view key, double& out) {
    if (const json* x = member(j, key)) out = get_positive(*x, join(path, key));
  };
  number("energy", tol.energy);
  number("euler", tol.euler);
  number("residual", tol.residual);
  number("residual_spacing", tol.residual_spacing);
  number("slope_min", tol.slope_min);
  number("slope_max", tol.slope_max);
  number("conservative", tol.conservative);
  if (tol.slope_min > tol.slope_max)
    throw ConfigError(join(path, "slope_min"), "must not exceed slope_max");
  if (const json* x = member(j, "probes")) tol.probes = get_unsigned(*x, join(path, "probes"), 0);
  if (const json* x = member(j, "check_samples"))
    tol.check_samples = get_unsigned(*x, join(path, "check_samples"), 1);
  if (const json* x = member(j, "seed")) tol.seed = get_unsigned(*x, join(path, "seed"), 0);
  return tol;
}

OutputFormat parse_format(const std::string& name, const std::string& path) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "jsonl") return OutputFormat::jsonl;
  throw ConfigError(path, "expected \"csv\" or \"jsonl\", got \"" + name + "\"");
}

State get_initial(const json& j, const std::string& path, std::size_t dof,
                  const State* fallback) {
  require_object(j, path);
  reject_unknown(j, path, {"q", "v", "t0"});
  State s;
  if (fallback) s = *fallback;
  auto vector_field = [&](std::string_view key, Eigen::VectorXd& out) {
    if (const json* x = member(j, key))
      out = get_vector(*x, join(path, key), dof);
    else if (!fallback)
      throw ConfigError(join(path, key), "missing required field");
  };
  vector_field("q", s.q);
  vector_field("v", s.v);
  if (const json* t0 = member(j, "t0"))
    s.t = get_number(*t0, join(path, "t0"));
  else if (!fallback)
    s.t = 0.0;
  return s;
}

std::string line_column(std::string_view text, std::size_t byte) {
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return std::to_string(line) + ":" + std::to_string(column);
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message)
    : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

std::string_view format_name(OutputFormat f) {
  return f == OutputFormat::csv ? "csv" : "jsonl";
}

void verify_homogeneity(const SystemSpec& sys, std::size_t samples) {
  const DissipationSpec& spec = sys.dissipation();
  if (spec.mode() != DissipationMode::homogeneous_sum) return;
  for (std::size_t i = 0; i < spec.terms().size(); ++i) {
    const DissipationTerm& term = spec.terms()[i];
    const CheckReport r = homogeneity_check(sys, term, samples);
    if (r.pass) continue;
    std::ostringstream msg;
    msg.precision(6);
    msg << "homogeneity check failed: " << r.detail;
    for (const auto& [lambda, violation] : r.by_lambda)
      msg << "; lambda=" << lambda << " violation " << violation;
    throw ConfigError(index("dissipation.terms", i), msg.str());
  }
}

RunConfig config_from_json(const json& doc, const LoadOptions& options) {
  require_object(doc, "");
  std::string builtin;
  ParamTable overrides;
  std::optional<SystemSpec> system;
  const State* fallback = nullptr;
  double t_end = 0.0;
  bool have_t_end = false;
  IntegratorConfig integrator;

  if (const json* name = member(doc, "system")) {
    reject_unknown(doc, "",
                   {"system", "overrides", "initial", "t_end", "integrator", "audit", "output"});
    builtin = get_string(*name, "system");
    const BuiltinSystem* b = nullptr;
    try {
      b = &find_builtin(builtin);
    } catch (const ModelError& e) {
      throw ConfigError("system", e.what());
    }
    if (const json* o = member(doc, "overrides")) {
      overrides = get_params(*o, "overrides");
      for (const auto& key : overrides.names())
        if (!b->defaults.contains(key))
          throw ConfigError(join("overrides", key),
                            "builtin '" + builtin + "' has no such parameter");
    }
    system = b->make(overrides);
    fallback = &b->initial;
    t_end = b->t_end;
    have_t_end = true;
    integrator = b->integrator;
  } else {
    reject_unknown(doc, "",
                   {"dof", "params", "mass_matrix", "potential", "dissipation", "labels",
                    "initial", "t_end", "integrator", "audit", "output"});
    system = get_inline_system(doc);
  }

  const std::size_t dof = system->dof();
  State initial;
  if (const json* init = member(doc, "initial"))
    initial = get_initial(*init, "initial", dof, fallback);
  else if (fallback)
    initial = *fallback;
  else
    throw ConfigError("initial", "missing required field");

  if (const json* t = member(doc, "t_end")) {
    t_end = get_number(*t, "t_end");
    have_t_end = true;
  }
  if (!have_t_end) throw ConfigError("t_end", "missing required field");
  if (!(t_end > initial.t)) throw ConfigError("t_end", "must exceed initial.t0");

  if (const json* i = member(doc, "integrator"))
    integrator = get_integrator(*i, "integrator", integrator);

  AuditTolerances audit;
  if (const json* a = member(doc, "audit")) audit = get_audit(*a, "audit");

  OutputConfig output;
  if (const json* o = member(doc, "output")) {
    require_object(*o, "output");
    reject_unknown(*o, "output", {"path", "format", "sample_every", "plot_data"});
    if (const json* p = member(*o, "path")) output.path = get_string(*p, "output.path");
    if (const json* f = member(*o, "format"))
      output.format = parse_format(get_string(*f, "output.format"), "output.format");
    if (const json* p = member(*o, "plot_data")) output.plot_data = get_bool(*p, "output.plot_data");
    if (const json* s = member(*o, "sample_every")) {
      const auto every = get_unsigned(*s, "output.sample_every", 1);
      const json* other = member(doc, "integrator");
      if (other && member(*other, "sample_every") && every != integrator.sample_every)
        throw ConfigError("output.sample_every", "conflicts with integrator.sample_every");
      integrator.sample_every = every;
    }
  }

  RunConfig cfg{builtin,         std::move(overrides), std::move(*system), std::move(initial),
                t_end,           integrator,           audit,              output};
  if (options.check_homogeneity) verify_homogeneity(cfg.system, options.homogeneity_samples);
  return cfg;
}

RunConfig parse_config(std::string_view text, const LoadOptions& options) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::string detail = e.what();
    if (const auto pos = detail.find(": "); pos != std::string::npos) detail.erase(0, pos + 2);
    throw ConfigError("", options.source_name + ":" + line_column(text, e.byte) +
                              ": JSON syntax error: " + detail);
  }
  return config_from_json(doc, options);
}

RunConfig load_config(const std::filesystem::path& path, LoadOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  options.source_name = path.string();
  return parse_config(text.str(), options);
}

json config_to_json(const RunConfig& cfg) {
  json doc = json::object();
  const SystemSpec& sys = cfg.system;
  const std::size_t dof = sys.dof();

  if (!cfg.builtin.empty()) {
    doc["system"] = cfg.builtin;
    json overrides = json::object();
    for (std::size_t i = 0; i < cfg.overrides.size(); ++i)
      overrides[cfg.overrides.names()[i]] = cfg.overrides.values()[i];
    doc["overrides"] = overrides;
  } else {
    doc["dof"] = dof;
    json params = json::object();
    for (std::size_t i = 0; i < sys.params().size(); ++i)
      params[sys.params().names()[i]] = sys.params().values()[i];
    doc["params"] = params;
    json rows = json::array();
    for (std::size_t i = 0; i < dof; ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < dof; ++k) row.push_back(sys.mass_entry(i, k).to_string());
      rows.push_back(row);
    }
    doc["mass_matrix"] = rows;
    doc["potential"] = sys.potential().to_string();

    const DissipationSpec& d = sys.dissipation();
    json diss = json::object();
    if (d.mode() == DissipationMode::homogeneous_sum) {
      diss["mode"] = "homogeneous_sum";
      json terms = json::array();
      for (const auto& t : d.terms()) {
        json term = {{"expr", t.expr.to_string()}, {"degree", t.degree}};
        if (t.smooth_eps) term["smooth_eps"] = *t.smooth_eps;
        terms.push_back(term);
      }
      diss["terms"] = terms;
    } else {
      diss["mode"] = "general";
      diss["raw"] = d.raw().to_string();
    }
    diss["quadrature"] = {{"node_count", d.quadrature().node_count},
                          {"panels", d.quadrature().panels},
                          {"tolerance", d.quadrature().tolerance}};
    doc["dissipation"] = diss;
    if (!sys.labels().empty()) doc["labels"] = sys.labels();
  }

  auto to_array = [](const Eigen::VectorXd& x) {
    return std::vector<double>(x.data(), x.data() + x.size());
  };
  doc["initial"] = {{"q", to_array(cfg.initial.q)},
                    {"v", to_array(cfg.initial.v)},
                    {"t0", cfg.initial.t}};
  doc["t_end"] = cfg.t_end;
  const IntegratorConfig& ic = cfg.integrator;
  doc["integrator"] = {{"method", std::string(method_name(ic.method))},
                       {"dt", ic.dt},
                       {"rel_tol", ic.rel_tol},
                       {"abs_tol", ic.abs_tol},
                       {"max_steps", ic.max_steps},
                       {"sample_every", ic.sample_every}};
  const AuditTolerances& a = cfg.audit;
  doc["audit"] = {{"energy", a.energy},
                  {"euler", a.euler},
                  {"residual", a.residual},
                  {"residual_spacing", a.residual_spacing},
                  {"slope_min", a.slope_min},
                  {"slope_max", a.slope_max},
                  {"conservative", a.conservative},
                  {"probes", a.probes},
                  {"check_samples", a.check_samples},
                  {"seed", a.seed}};
  doc["output"] = {{"path", cfg.output.path.string()},
                   {"format", std::string(format_name(cfg.output.format))},
                   {"plot_data", cfg.output.plot_data}};
  return doc;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

}  // namespace

ParamTable parse_assignments(const std::vector<std::string>& items) {
  ParamTable out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set", "expected name=value, got '" + item + "'");
    const std::string name = trim(item.substr(0, eq));
    const std::string text = trim(item.substr(eq + 1));
    if (name.empty()) throw ConfigError("--set", "expected name=value, got '" + item + "'");
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
      throw ConfigError("--set", "'" + text + "' is not a number in '" + item + "'");
    out.set(name, value);
  }
  return out;
}

void apply_overrides(RunConfig& cfg, const ParamTable& overrides, const LoadOptions& options) {
  if (overrides.size() == 0) return;
  try {
    if (!cfg.builtin.empty()) {
      ParamTable merged = cfg.overrides;
      for (std::size_t i = 0; i < overrides.size(); ++i)
        merged.set(overrides.names()[i], overrides.values()[i]);
      cfg.system = find_builtin(cfg.builtin).make(merged);
      cfg.overrides = std::move(merged);
    } else {
      cfg.system = cfg.system.with_params(overrides);
    }
  } catch (const BindError& e) {
    throw ConfigError("--set", e.what());
  }
  if (options.check_homogeneity) verify_homogeneity(cfg.system, options.homogeneity_samples);
}

}  // namespace rayleigh::cli
