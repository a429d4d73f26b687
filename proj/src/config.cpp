#include "heterosim/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace heterosim {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Scalar parse_real(const std::string& value, int line, const std::string& key) {
  char* end = nullptr;
  const Scalar v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
    throw ConfigError("expected a finite number, got '" + value + "'", line, key);
  }
  return v;
}

std::int64_t parse_int(const std::string& value, int line, const std::string& key) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("expected an integer, got '" + value + "'", line, key);
  }
  return v;
}

std::uint64_t parse_uint(const std::string& value, int line, const std::string& key) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("expected a non-negative integer, got '" + value + "'", line, key);
  }
  return v;
}

bool parse_bool(const std::string& value, int line, const std::string& key) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw ConfigError("expected true/false, got '" + value + "'", line, key);
}

std::string fmt_real(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Scenario under construction: per-predictor parameter maps with "all"
// (index 0) defaults that numbered keys override.
struct PendingScenario {
  Scenario scenario;
  int line = 0;
  bool has_family = false;
  // [setting][predictor][class] -> params; predictor 0 = all.
  std::map<int, std::map<int, std::array<ClassParams, 2>>> params;
  std::map<int, std::map<int, std::array<std::array<bool, 3>, 2>>> set;
};

void set_measurement_key(PendingScenario& ps, int setting, int predictor, const std::string& field,
                         Scalar value, int line, const std::string& key) {
  static const std::map<std::string, std::pair<int, int>> fields = {
      {"psi", {0, -1}},  {"theta", {1, -1}},  {"var_eps", {2, -1}},
      {"psi0", {0, 0}},  {"theta0", {1, 0}},  {"var_eps0", {2, 0}},
      {"psi1", {0, 1}},  {"theta1", {1, 1}},  {"var_eps1", {2, 1}},
  };
  const auto it = fields.find(field);
  if (it == fields.end()) throw ConfigError("unknown measurement key", line, key);
  auto& params = ps.params[setting][predictor];
  auto& set = ps.set[setting][predictor];
  for (int cls = 0; cls < 2; ++cls) {
    if (it->second.second != -1 && it->second.second != cls) continue;
    Scalar* target = it->second.first == 0   ? &params[cls].psi
                     : it->second.first == 1 ? &params[cls].theta
                                             : &params[cls].var_eps;
    *target = value;
    set[cls][it->second.first] = true;
  }
}

Scenario finish_scenario(PendingScenario& ps) {
  Scenario& s = ps.scenario;
  if (!ps.has_family) throw ConfigError("scenario '" + s.id + "' lacks a family", ps.line, "family");
  const int p = static_cast<int>(predictor_count(s.family));
  for (int setting = 0; setting < 2; ++setting) {
    auto& models = setting == 0 ? s.deriv_models : s.valid_models;
    models.clear();
    for (int j = 1; j <= p; ++j) {
      std::array<ClassParams, 2> cp{ClassParams{}, ClassParams{}};
      const auto& by_pred = ps.params[setting];
      const auto& set_by_pred = ps.set[setting];
      if (auto all = by_pred.find(0); all != by_pred.end()) cp = all->second;
      if (auto own = by_pred.find(j); own != by_pred.end()) {
        const auto& flags = set_by_pred.at(j);
        for (int cls = 0; cls < 2; ++cls) {
          if (flags[cls][0]) cp[cls].psi = own->second[cls].psi;
          if (flags[cls][1]) cp[cls].theta = own->second[cls].theta;
          if (flags[cls][2]) cp[cls].var_eps = own->second[cls].var_eps;
        }
      }
      try {
        models.push_back(make_differential(cp[0], cp[1]));
      } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("scenario '") + s.id + "': " + e.what(), ps.line);
      }
    }
    for (const auto& [j, _] : ps.params[setting]) {
      if (j > p) {
        throw ConfigError("scenario '" + s.id + "': predictor index exceeds family size", ps.line);
      }
    }
  }
  try {
    validate(s);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what(), ps.line);
  }
  return s;
}

void apply_run_key(RunConfig& c, const std::string& key, const std::string& value, int line) {
  if (key == "command") {
    try {
      c.command = command_from_string(value);
    } catch (const InvalidParameter& e) {
      throw ConfigError(e.what(), line, key);
    }
  } else if (key == "family") {
    c.families.clear();
    for (const auto& f : split_list(value)) {
      try {
        c.families.push_back(family_from_string(f));
      } catch (const InvalidParameter& e) {
        throw ConfigError(e.what(), line, key);
      }
    }
  } else if (key == "noise_scale") {
    if (value == "sd") c.noise_scale = NoiseScale::standard_deviation;
    else if (value == "variance") c.noise_scale = NoiseScale::variance;
    else throw ConfigError("noise_scale must be 'sd' or 'variance'", line, key);
  } else if (key == "reps") {
    c.reps = parse_int(value, line, key);
  } else if (key == "n_deriv") {
    c.n_deriv = parse_int(value, line, key);
  } else if (key == "n_valid") {
    c.n_valid = parse_int(value, line, key);
  } else if (key == "seed") {
    c.seed = parse_uint(value, line, key);
  } else if (key == "workers") {
    const auto w = parse_int(value, line, key);
    if (w < 1) throw ConfigError("workers must be at least 1", line, key);
    c.workers = static_cast<unsigned>(w);
  } else if (key == "curve_reps") {
    c.curve_reps = parse_int(value, line, key);
  } else if (key == "svg") {
    c.svg = parse_bool(value, line, key);
  } else if (key == "loess_span") {
    c.loess.span = parse_real(value, line, key);
  } else if (key == "loess_grid") {
    c.loess.grid = static_cast<int>(parse_int(value, line, key));
  } else if (key == "panels") {
    c.panels = split_list(value);
  } else if (key == "large_n") {
    c.large_n = parse_int(value, line, key);
  } else if (key == "mv_percent") {
    c.mv_percent.clear();
    for (const auto& v : split_list(value)) c.mv_percent.push_back(parse_real(v, line, key));
  } else if (key == "input") {
    c.input = value;
  } else if (key == "outdir") {
    c.outdir = value;
  } else {
    throw ConfigError("unknown key", line, key);
  }
}

void apply_scenario_key(PendingScenario& ps, const std::string& key, const std::string& value,
                        int line) {
  Scenario& s = ps.scenario;
  if (key == "family") {
    try {
      s.family = family_from_string(value);
    } catch (const InvalidParameter& e) {
      throw ConfigError(e.what(), line, key);
    }
    ps.has_family = true;
    return;
  }
  if (key == "rho") {
    s.rho = parse_real(value, line, key);
    return;
  }
  if (key == "n_deriv") {
    s.n_deriv = parse_int(value, line, key);
    return;
  }
  if (key == "n_valid") {
    s.n_valid = parse_int(value, line, key);
    return;
  }
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError("unknown key", line, key);
  const std::string prefix = key.substr(0, dot);
  const std::string field = key.substr(dot + 1);
  int setting = -1;
  std::string rest;
  if (prefix.rfind("deriv", 0) == 0) {
    setting = 0;
    rest = prefix.substr(5);
  } else if (prefix.rfind("valid", 0) == 0) {
    setting = 1;
    rest = prefix.substr(5);
  } else {
    throw ConfigError("unknown key", line, key);
  }
  int predictor = 0;
  if (!rest.empty()) {
    predictor = static_cast<int>(parse_int(rest, line, key));
    if (predictor < 1) throw ConfigError("predictor index must be at least 1", line, key);
  }
  set_measurement_key(ps, setting, predictor, field, parse_real(value, line, key), line, key);
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line, std::string key)
    : std::runtime_error([&] {
        std::string m = "config";
        if (line > 0) m += ":" + std::to_string(line);
        if (!key.empty()) m += " [" + key + "]";
        return m + ": " + message;
      }()),
      line_(line),
      key_(std::move(key)) {}

const char* to_string(Command command) noexcept {
  switch (command) {
    case Command::grid: return "grid";
    case Command::differential: return "differential";
    case Command::large_sample: return "large-sample";
    case Command::brier_sweep: return "brier-sweep";
    case Command::scenario: return "scenario";
    case Command::report: return "report";
  }
  return "?";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::grid, Command::differential, Command::large_sample,
                    Command::brier_sweep, Command::scenario, Command::report}) {
    if (name == to_string(c)) return c;
  }
  throw InvalidParameter("unknown command '" + name + "'");
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  const auto scen_eq = [](const Scenario& x, const Scenario& y) {
    return x.id == y.id && x.family == y.family && x.rho == y.rho &&
           x.deriv_models == y.deriv_models && x.valid_models == y.valid_models &&
           x.n_deriv == y.n_deriv && x.n_valid == y.n_valid;
  };
  return a.command == b.command && a.families == b.families && a.noise_scale == b.noise_scale &&
         a.reps == b.reps && a.n_deriv == b.n_deriv && a.n_valid == b.n_valid &&
         a.seed == b.seed && a.workers == b.workers && a.curve_reps == b.curve_reps &&
         a.svg == b.svg && a.loess.span == b.loess.span && a.loess.grid == b.loess.grid &&
         a.panels == b.panels && a.large_n == b.large_n && a.mv_percent == b.mv_percent &&
         a.input == b.input && a.outdir == b.outdir &&
         std::equal(a.scenarios.begin(), a.scenarios.end(), b.scenarios.begin(), b.scenarios.end(),
                    scen_eq);
}

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  enum class Section { none, run, scenario } section = Section::none;
  std::vector<PendingScenario> pending;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      const std::string header = trim(std::string_view(line).substr(1, line.size() - 2));
      if (header == "run") {
        section = Section::run;
      } else if (header.rfind("scenario", 0) == 0) {
        const std::string id = trim(std::string_view(header).substr(8));
        if (id.empty() || id.find_first_of(", \t") != std::string::npos) {
          throw ConfigError("scenario section needs an id without spaces or commas", line_no);
        }
        for (const auto& ps : pending) {
          if (ps.scenario.id == id) throw ConfigError("duplicate scenario id '" + id + "'", line_no);
        }
        section = Section::scenario;
        PendingScenario ps;
        ps.scenario.id = id;
        ps.line = line_no;
        pending.push_back(std::move(ps));
      } else {
        throw ConfigError("unknown section '" + header + "'", line_no);
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);

    switch (section) {
      case Section::none:
        throw ConfigError("key outside of a section", line_no, key);
      case Section::run:
        apply_run_key(c, key, value, line_no);
        break;
      case Section::scenario:
        apply_scenario_key(pending.back(), key, value, line_no);
        break;
    }
  }
  for (auto& ps : pending) c.scenarios.push_back(finish_scenario(ps));
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in);
}

std::string serialize(const RunConfig& c) {
  std::ostringstream out;
  out << "[run]\n";
  out << "command = " << to_string(c.command) << '\n';
  if (!c.families.empty()) {
    out << "family = ";
    for (std::size_t i = 0; i < c.families.size(); ++i) {
      out << (i ? ", " : "") << to_string(c.families[i]);
    }
    out << '\n';
  }
  out << "noise_scale = " << (c.noise_scale == NoiseScale::standard_deviation ? "sd" : "variance")
      << '\n';
  out << "reps = " << c.reps << '\n';
  out << "n_deriv = " << c.n_deriv << '\n';
  out << "n_valid = " << c.n_valid << '\n';
  if (c.seed) out << "seed = " << *c.seed << '\n';
  out << "workers = " << c.workers << '\n';
  out << "curve_reps = " << c.curve_reps << '\n';
  out << "svg = " << (c.svg ? "true" : "false") << '\n';
  out << "loess_span = " << fmt_real(c.loess.span) << '\n';
  out << "loess_grid = " << c.loess.grid << '\n';
  if (!c.panels.empty()) {
    out << "panels = ";
    for (std::size_t i = 0; i < c.panels.size(); ++i) out << (i ? ", " : "") << c.panels[i];
    out << '\n';
  }
  out << "large_n = " << c.large_n << '\n';
  out << "mv_percent = ";
  for (std::size_t i = 0; i < c.mv_percent.size(); ++i) {
    out << (i ? ", " : "") << fmt_real(c.mv_percent[i]);
  }
  out << '\n';
  if (!c.input.empty()) out << "input = " << c.input << '\n';
  if (!c.outdir.empty()) out << "outdir = " << c.outdir << '\n';

  for (const auto& s : c.scenarios) {
    out << "\n[scenario " << s.id << "]\n";
    out << "family = " << to_string(s.family) << '\n';
    out << "rho = " << fmt_real(s.rho) << '\n';
    out << "n_deriv = " << s.n_deriv << '\n';
    out << "n_valid = " << s.n_valid << '\n';
    for (int setting = 0; setting < 2; ++setting) {
      const auto& models = setting == 0 ? s.deriv_models : s.valid_models;
      for (std::size_t j = 0; j < models.size(); ++j) {
        const std::string prefix = std::string(setting == 0 ? "deriv" : "valid") + std::to_string(j + 1);
        for (int cls = 0; cls < 2; ++cls) {
          const ClassParams& p = models[j].params(cls);
          out << prefix << ".psi" << cls << " = " << fmt_real(p.psi) << '\n';
          out << prefix << ".theta" << cls << " = " << fmt_real(p.theta) << '\n';
          out << prefix << ".var_eps" << cls << " = " << fmt_real(p.var_eps) << '\n';
        }
      }
    }
  }
  return out.str();
}

void validate(const RunConfig& c) {
  const bool replicated = c.command == Command::grid || c.command == Command::differential ||
                          c.command == Command::scenario;
  if (replicated && c.reps < 1) throw ConfigError("reps must be at least 1", 0, "reps");
  if (c.command != Command::report && !c.seed) {
    throw ConfigError("a seed is required for reproducibility", 0, "seed");
  }
  if (c.n_deriv < 1 || c.n_valid < 1) throw ConfigError("sample sizes must be at least 1");
  if (c.curve_reps < 0) throw ConfigError("curve_reps must be non-negative", 0, "curve_reps");
  if (!(c.loess.span > 0.0 && c.loess.span <= 1.0)) {
    throw ConfigError("loess_span must lie in (0, 1]", 0, "loess_span");
  }
  if (c.loess.grid < 1) throw ConfigError("loess_grid must be positive", 0, "loess_grid");
  if (c.command == Command::large_sample) {
    if (c.large_n < 100) throw ConfigError("large_n must be at least 100", 0, "large_n");
    const auto names = large_sample_panel_names();
    for (const auto& p : c.panels) {
      if (std::find(names.begin(), names.end(), p) == names.end()) {
        throw ConfigError("unknown panel '" + p + "'", 0, "panels");
      }
    }
  }
  if (c.command == Command::brier_sweep) {
    if (c.mv_percent.empty()) throw ConfigError("mv_percent is empty", 0, "mv_percent");
    for (Scalar v : c.mv_percent) {
      if (!(v > 0.0)) throw ConfigError("mv_percent values must be positive", 0, "mv_percent");
    }
  }
  if (c.command == Command::scenario && c.scenarios.empty()) {
    throw ConfigError("scenario command needs at least one [scenario ...] section");
  }
  if (c.command == Command::report && c.input.empty()) {
    throw ConfigError("report command needs an input replicates CSV", 0, "input");
  }
}

std::vector<Scenario> scenarios_for(const RunConfig& c) {
  GridOptions grid;
  grid.scale = c.noise_scale;
  grid.n_deriv = c.n_deriv;
  grid.n_valid = c.n_valid;
  switch (c.command) {
    case Command::grid: {
      if (c.families.empty()) return build_grid(grid);
      std::vector<Scenario> out;
      for (Family f : c.families) {
        auto part = build_family(f, grid);
        out.insert(out.end(), part.begin(), part.end());
      }
      return out;
    }
    case Command::differential:
      return differential_presets(grid);
    case Command::scenario:
      return c.scenarios;
    default:
      return {};
  }
}

std::string resolve_outdir(const RunConfig& c) {
  if (!c.outdir.empty()) return c.outdir;
  if (const char* env = std::getenv("HETEROSIM_OUTDIR"); env && *env) return env;
  return "heterosim-out";
}

}  // namespace heterosim
