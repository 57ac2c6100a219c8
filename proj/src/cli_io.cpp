#include "degenwave/cli_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "degenwave/error.hpp"
#include "expression.hpp"

namespace degenwave {

using nlohmann::json;

namespace {

const std::vector<std::string> kChecks = {
    "conservation", "decay",       "cutoff",   "entropy",       "squeeze",
    "profile",      "band_projection", "contraction", "t_nonexpansive",
};

// ---------------------------------------------------------------------------
// Schema helpers

std::string child(const std::string& ptr, std::string_view key) {
  return ptr + "/" + std::string(key);
}
std::string child(const std::string& ptr, std::size_t index) {
  return ptr + "/" + std::to_string(index);
}

const json& require_key(const json& obj, const std::string& ptr, std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(child(ptr, key), "missing required field");
  return *it;
}

void require_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw SchemaError(ptr, "expected an object");
}

void reject_unknown(const json& obj, const std::string& ptr,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaError(child(ptr, key), "unknown field");
    }
  }
}

double get_number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw SchemaError(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(ptr, "expected a finite number");
  return v;
}

std::int64_t get_integer(const json& j, const std::string& ptr) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) {
      return static_cast<std::int64_t>(v);
    }
  }
  throw SchemaError(ptr, "expected an integer");
}

std::string get_string(const json& j, const std::string& ptr) {
  if (!j.is_string()) throw SchemaError(ptr, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw SchemaError(ptr, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], child(ptr, i)));
  return out;
}

std::optional<double> optional_number(const json& obj, const std::string& ptr,
                                      std::string_view key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return get_number(*it, child(ptr, key));
}

bool valid_name(const std::string& name) {
  if (name.empty() || name == "." || name == "..") return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

// ---------------------------------------------------------------------------
// Pieces

PiecewiseFunction parse_piecewise(const json& j, const std::string& ptr) {
  require_object(j, ptr);
  // Shorthand builders.
  if (j.contains("burgers") || j.contains("linear") || j.contains("constant")) {
    if (j.size() != 1) throw SchemaError(ptr, "a builder shorthand must be the only field");
    const auto& [key, body] = *j.items().begin();
    const std::string p = child(ptr, key);
    require_object(body, p);
    const double lo = get_number(require_key(body, p, "lo"), child(p, "lo"));
    const double hi = get_number(require_key(body, p, "hi"), child(p, "hi"));
    if (!(lo < hi)) throw SchemaError(child(p, "hi"), "need lo < hi");
    if (key == "burgers") {
      reject_unknown(body, p, {"lo", "hi"});
      return PiecewiseFunction::burgers(lo, hi);
    }
    if (key == "linear") {
      reject_unknown(body, p, {"lo", "hi", "slope", "intercept"});
      const double slope = get_number(require_key(body, p, "slope"), child(p, "slope"));
      const double icpt = body.contains("intercept")
                              ? get_number(body["intercept"], child(p, "intercept"))
                              : 0.0;
      return PiecewiseFunction::linear(slope, icpt, lo, hi);
    }
    reject_unknown(body, p, {"lo", "hi", "value"});
    const double value = get_number(require_key(body, p, "value"), child(p, "value"));
    return PiecewiseFunction::constant(value, lo, hi);
  }
  return piecewise_from_json(j, ptr);
}

// ---------------------------------------------------------------------------
// Initial data

InitialSpec parse_initial(const json& j, const std::string& ptr, std::size_t n_cells) {
  require_object(j, ptr);
  if (j.size() != 1) {
    throw SchemaError(ptr, "expected exactly one of sine, step, cells, expression");
  }
  const auto& [key, body] = *j.items().begin();
  const std::string p = child(ptr, key);
  if (key == "sine") {
    require_object(body, p);
    reject_unknown(body, p, {"mean", "amplitude", "frequency"});
    SineInit s;
    s.mean = get_number(require_key(body, p, "mean"), child(p, "mean"));
    s.amplitude = get_number(require_key(body, p, "amplitude"), child(p, "amplitude"));
    if (body.contains("frequency")) {
      const auto f = get_integer(body["frequency"], child(p, "frequency"));
      if (f < 1 || f > 1'000'000) throw SchemaError(child(p, "frequency"), "must be >= 1");
      s.frequency = static_cast<int>(f);
    }
    return s;
  }
  if (key == "step") {
    require_object(body, p);
    reject_unknown(body, p, {"left", "right", "split"});
    StepInit s;
    s.left = get_number(require_key(body, p, "left"), child(p, "left"));
    s.right = get_number(require_key(body, p, "right"), child(p, "right"));
    if (body.contains("split")) s.split = get_number(body["split"], child(p, "split"));
    if (!(s.split >= 0.0 && s.split <= 1.0)) {
      throw SchemaError(child(p, "split"), "must lie in [0, 1]");
    }
    return s;
  }
  if (key == "cells") {
    CellsInit c{get_numbers(body, p)};
    if (c.values.size() != n_cells) {
      throw SchemaError(p, "expected " + std::to_string(n_cells) + " values");
    }
    return c;
  }
  if (key == "expression") {
    ExpressionInit e{get_string(body, p)};
    try {
      (void)detail::Expression::parse(e.text);
    } catch (const InvalidArgument& ex) {
      throw SchemaError(p, ex.what());
    }
    return e;
  }
  throw SchemaError(p, "unknown initial data kind");
}

json initial_to_json(const InitialSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SineInit>) {
          return {{"sine", {{"mean", s.mean}, {"amplitude", s.amplitude}, {"frequency", s.frequency}}}};
        } else if constexpr (std::is_same_v<T, StepInit>) {
          return {{"step", {{"left", s.left}, {"right", s.right}, {"split", s.split}}}};
        } else if constexpr (std::is_same_v<T, CellsInit>) {
          return {{"cells", s.values}};
        } else {
          return {{"expression", s.text}};
        }
      },
      spec);
}

// ---------------------------------------------------------------------------
// Scheme and checks

SchemeParams parse_scheme(const json& j, const std::string& ptr) {
  require_object(j, ptr);
  reject_unknown(j, ptr, {"cfl_safety", "t_end", "snapshot_times", "snapshot_interval", "dt"});
  SchemeParams s;
  if (j.contains("cfl_safety")) {
    s.cfl_safety = get_number(j["cfl_safety"], child(ptr, "cfl_safety"));
    if (!(s.cfl_safety > 0.0 && s.cfl_safety <= 1.0)) {
      throw SchemaError(child(ptr, "cfl_safety"), "must lie in (0, 1]");
    }
  }
  s.t_end = get_number(require_key(j, ptr, "t_end"), child(ptr, "t_end"));
  if (!(s.t_end >= 0.0)) throw SchemaError(child(ptr, "t_end"), "must be >= 0");
  if (j.contains("snapshot_times") && j.contains("snapshot_interval")) {
    throw SchemaError(child(ptr, "snapshot_interval"),
                      "give snapshot_times or snapshot_interval, not both");
  }
  if (j.contains("snapshot_times")) {
    const std::string p = child(ptr, "snapshot_times");
    s.snapshot_times = get_numbers(j["snapshot_times"], p);
    for (std::size_t i = 0; i < s.snapshot_times.size(); ++i) {
      const double t = s.snapshot_times[i];
      if (!(t >= 0.0 && t <= s.t_end)) throw SchemaError(child(p, i), "outside [0, t_end]");
      if (i > 0 && !(t > s.snapshot_times[i - 1])) {
        throw SchemaError(child(p, i), "snapshot times must be increasing");
      }
    }
  }
  if (j.contains("snapshot_interval")) {
    const std::string p = child(ptr, "snapshot_interval");
    const double h = get_number(j["snapshot_interval"], p);
    if (!(h > 0.0)) throw SchemaError(p, "must be > 0");
    const double count = std::floor(s.t_end / h * (1.0 + 1e-12));
    if (count > 1e6) throw SchemaError(p, "too many snapshots");
    for (std::size_t k = 1; k <= static_cast<std::size_t>(count); ++k) {
      s.snapshot_times.push_back(std::min(s.t_end, static_cast<double>(k) * h));
    }
    s.snapshot_times.erase(std::unique(s.snapshot_times.begin(), s.snapshot_times.end()),
                           s.snapshot_times.end());
  }
  if (j.contains("dt")) {
    const double dt = get_number(j["dt"], child(ptr, "dt"));
    if (!(dt > 0.0)) throw SchemaError(child(ptr, "dt"), "must be > 0");
    s.dt_override = dt;
  }
  return s;
}

CheckSpec parse_check(const json& j, const std::string& ptr) {
  CheckSpec c;
  std::string name_ptr = ptr;
  if (j.is_string()) {
    c.name = j.get<std::string>();
  } else {
    require_object(j, ptr);
    reject_unknown(j, ptr,
                   {"name", "threshold", "t_lo", "constant", "trials", "shift_upper",
                    "shift_lower"});
    name_ptr = child(ptr, "name");
    c.name = get_string(require_key(j, ptr, "name"), name_ptr);
    c.threshold = optional_number(j, ptr, "threshold");
    c.t_lo = optional_number(j, ptr, "t_lo");
    c.constant = optional_number(j, ptr, "constant");
    c.shift_upper = optional_number(j, ptr, "shift_upper");
    c.shift_lower = optional_number(j, ptr, "shift_lower");
    if (j.contains("trials")) {
      const auto t = get_integer(j["trials"], child(ptr, "trials"));
      if (t < 1 || t > 10'000'000) throw SchemaError(child(ptr, "trials"), "must be >= 1");
      c.trials = static_cast<int>(t);
    }
    if (c.constant && !(*c.constant > 0.0)) {
      throw SchemaError(child(ptr, "constant"), "must be > 0");
    }
  }
  if (std::find(kChecks.begin(), kChecks.end(), c.name) == kChecks.end()) {
    throw SchemaError(name_ptr, "unknown check '" + c.name + "'");
  }
  return c;
}

json check_to_json(const CheckSpec& c) {
  json j = {{"name", c.name}};
  if (c.threshold) j["threshold"] = *c.threshold;
  if (c.t_lo) j["t_lo"] = *c.t_lo;
  if (c.constant) j["constant"] = *c.constant;
  if (c.trials) j["trials"] = *c.trials;
  if (c.shift_upper) j["shift_upper"] = *c.shift_upper;
  if (c.shift_lower) j["shift_lower"] = *c.shift_lower;
  return j;
}

ScenarioConfig parse_scenario(const json& j, const std::string& ptr) {
  require_object(j, ptr);
  reject_unknown(j, ptr,
                 {"name", "phi", "g", "initial", "initial_b", "grid", "scheme", "tol", "bound",
                  "checks", "seed"});
  ScenarioConfig cfg;
  cfg.name = get_string(require_key(j, ptr, "name"), child(ptr, "name"));
  if (!valid_name(cfg.name)) {
    throw SchemaError(child(ptr, "name"), "name must use only [A-Za-z0-9_.-]");
  }

  const std::string grid_ptr = child(ptr, "grid");
  const json& grid = require_key(j, ptr, "grid");
  require_object(grid, grid_ptr);
  reject_unknown(grid, grid_ptr, {"n_cells"});
  const auto n = get_integer(require_key(grid, grid_ptr, "n_cells"), child(grid_ptr, "n_cells"));
  if (n < 4 || n > 100'000'000) throw SchemaError(child(grid_ptr, "n_cells"), "must be >= 4");
  cfg.n_cells = static_cast<std::size_t>(n);

  cfg.phi = parse_piecewise(require_key(j, ptr, "phi"), child(ptr, "phi"));
  cfg.g = parse_piecewise(require_key(j, ptr, "g"), child(ptr, "g"));
  if (!cfg.g.monotone()) throw SchemaError(child(ptr, "g") + "/monotone", "g must be monotone");

  cfg.initial = parse_initial(require_key(j, ptr, "initial"), child(ptr, "initial"), cfg.n_cells);
  if (j.contains("initial_b")) {
    cfg.initial_b = parse_initial(j["initial_b"], child(ptr, "initial_b"), cfg.n_cells);
  }
  cfg.scheme = parse_scheme(require_key(j, ptr, "scheme"), child(ptr, "scheme"));
  if (j.contains("tol")) {
    cfg.tol = get_number(j["tol"], child(ptr, "tol"));
    if (!(cfg.tol >= 0.0)) throw SchemaError(child(ptr, "tol"), "must be >= 0");
  }
  cfg.bound = optional_number(j, ptr, "bound");
  if (cfg.bound && !(*cfg.bound >= 0.0)) throw SchemaError(child(ptr, "bound"), "must be >= 0");
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (s.is_number_unsigned()) {
      cfg.seed = s.get<std::uint64_t>();
    } else {
      const auto v = get_integer(s, child(ptr, "seed"));
      if (v < 0) throw SchemaError(child(ptr, "seed"), "must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(v);
    }
  }
  if (j.contains("checks")) {
    const std::string p = child(ptr, "checks");
    const json& checks = j["checks"];
    if (!checks.is_array()) throw SchemaError(p, "expected an array");
    for (std::size_t i = 0; i < checks.size(); ++i) {
      CheckSpec c = parse_check(checks[i], child(p, i));
      if (is_pair_check(c.name) && !cfg.is_pair()) {
        throw SchemaError(child(p, i), "check '" + c.name + "' needs initial_b");
      }
      cfg.checks.push_back(std::move(c));
    }
  }

  // Initial data must stay inside the covered range.
  const Grid g(cfg.n_cells);
  auto check_range = [&](const InitialSpec& spec, const std::string& p) {
    Field u0 = [&] {
      try {
        return build_initial(spec, g);
      } catch (const Error& ex) {
        throw SchemaError(p, ex.what());
      }
    }();
    if (!cfg.phi.covers(u0.min(), u0.max()) || !cfg.g.covers(u0.min(), u0.max())) {
      throw SchemaError(p, "initial data leave the covered range of phi or g");
    }
    if (cfg.bound && *cfg.bound < u0.sup_norm()) {
      throw SchemaError(child(ptr, "bound"), "bound is below sup |u0|");
    }
  };
  check_range(cfg.initial, child(ptr, "initial"));
  if (cfg.initial_b) check_range(*cfg.initial_b, child(ptr, "initial_b"));
  return cfg;
}

// ---------------------------------------------------------------------------
// Randomised band projection trials

/// Uniform double in [0, 1) from raw engine bits (identical on every platform).
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

CheckReport band_projection_trials(const Grid& grid, std::uint64_t seed, int trials) {
  constexpr double kMeanTol = 1e-12;
  constexpr double kBandTol = 1e-12;
  std::mt19937_64 rng(seed);
  const std::size_t n = grid.n_cells();
  CheckReport report;
  report.name = "band_projection";
  int failures = 0;
  double worst_ratio = 0.0;
  std::vector<double> u(n), v(n);
  for (int t = 0; t < trials; ++t) {
    const double a = uniform(rng, -1.0, 0.9);
    const double b = uniform(rng, a + 0.01, 1.0);
    const double width = b - a;
    for (auto& x : u) x = uniform(rng, a - 0.5 * width, b + 0.5 * width);
    const double target = uniform(rng, a, b);
    const Field raw(grid, u);
    const double offset = target - mean(raw);
    for (auto& x : u) x += offset;
    // v: random band-valued field, sometimes a perturbation of the clipped u.
    const bool near = unit(rng) < 0.5;
    for (std::size_t j = 0; j < n; ++j) {
      v[j] = near ? std::clamp(u[j] + uniform(rng, -0.1, 0.1) * width, a, b) : uniform(rng, a, b);
    }
    const Field uf(grid, u);
    const Field vf(grid, v);
    const double I = mean(uf);
    if (I < a || I > b) continue;  // rounding pushed the mean out; not a valid triple
    const Field w = band_project_mean(uf, vf, a, b);
    const bool mean_ok = std::abs(mean(w) - I) <= kMeanTol;
    const bool band_ok = w.min() >= a - kBandTol && w.max() <= b + kBandTol;
    const double duv = l1_distance(uf, vf);
    const double duw = l1_distance(uf, w);
    const bool dist_ok = duw <= 2.0 * duv + kMeanTol;
    if (duv > 0.0) worst_ratio = std::max(worst_ratio, duw / duv);
    if (!(mean_ok && band_ok && dist_ok)) ++failures;
    report.series.push_back({static_cast<double>(t), duv > 0.0 ? duw / duv : 0.0});
  }
  report.aux = {{"worst_ratio", Series{{0.0, worst_ratio}}}};
  report.observed = failures;
  report.threshold = 0.0;
  report.passed = failures == 0;
  return report;
}

// ---------------------------------------------------------------------------
// Scenario execution

CheckReport failed_report(const std::string& name, const std::string& error) {
  CheckReport r;
  r.name = name;
  r.passed = false;
  r.observed = std::numeric_limits<double>::infinity();
  r.threshold = 0.0;
  r.error = error;
  return r;
}

void write_series(const std::filesystem::path& dir, const CheckReport& r) {
  if (r.series.empty() && r.aux.empty()) return;
  std::filesystem::create_directories(dir);
  if (!r.series.empty()) write_file_atomic(dir / (r.name + ".csv"), series_csv(r.series));
  for (const auto& [label, s] : r.aux) {
    write_file_atomic(dir / (r.name + "_" + label + ".csv"), series_csv(s));
  }
}

std::string profile_csv(const ProfileEstimate& p) {
  std::string out = "x,v\n";
  for (std::size_t j = 0; j < p.v.size(); ++j) {
    out += format_double(p.v.grid().center(j));
    out += ',';
    out += format_double(p.v[j]);
    out += '\n';
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

// ---------------------------------------------------------------------------
// Public API

const std::vector<std::string>& known_checks() { return kChecks; }

bool is_pair_check(std::string_view name) {
  return name == "contraction" || name == "t_nonexpansive";
}

std::vector<ScenarioConfig> parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw SchemaError("", std::string("invalid JSON: ") + ex.what());
  }
  std::vector<ScenarioConfig> out;
  if (doc.is_array()) {
    if (doc.empty()) throw SchemaError("", "empty scenario list");
    for (std::size_t i = 0; i < doc.size(); ++i) {
      out.push_back(parse_scenario(doc[i], "/" + std::to_string(i)));
      for (std::size_t k = 0; k < i; ++k) {
        if (out[k].name == out[i].name) {
          throw SchemaError("/" + std::to_string(i) + "/name", "duplicate scenario name");
        }
      }
    }
  } else {
    out.push_back(parse_scenario(doc, ""));
  }
  return out;
}

json serialize_config(const ScenarioConfig& cfg) {
  json scheme = {{"cfl_safety", cfg.scheme.cfl_safety},
                 {"t_end", cfg.scheme.t_end},
                 {"snapshot_times", cfg.scheme.snapshot_times}};
  if (cfg.scheme.dt_override) scheme["dt"] = *cfg.scheme.dt_override;
  json checks = json::array();
  for (const auto& c : cfg.checks) checks.push_back(check_to_json(c));
  json j = {{"name", cfg.name},
            {"phi", to_json(cfg.phi)},
            {"g", to_json(cfg.g)},
            {"initial", initial_to_json(cfg.initial)},
            {"grid", {{"n_cells", cfg.n_cells}}},
            {"scheme", scheme},
            {"tol", cfg.tol},
            {"checks", checks},
            {"seed", cfg.seed}};
  if (cfg.initial_b) j["initial_b"] = initial_to_json(*cfg.initial_b);
  if (cfg.bound) j["bound"] = *cfg.bound;
  return j;
}

Field build_initial(const InitialSpec& spec, const Grid& grid) {
  const std::size_t n = grid.n_cells();
  const double dx = grid.dx();
  std::vector<double> values(n);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SineInit>) {
          // Exact average of sin(w x) over [x_j, x_j + dx].
          const double w = 2.0 * std::numbers::pi * s.frequency;
          for (std::size_t j = 0; j < n; ++j) {
            const double x0 = grid.left_edge(j);
            const double x1 = grid.left_edge(j + 1);
            values[j] = s.mean + s.amplitude * (std::cos(w * x0) - std::cos(w * x1)) / (w * dx);
          }
        } else if constexpr (std::is_same_v<T, StepInit>) {
          for (std::size_t j = 0; j < n; ++j) {
            const double x0 = grid.left_edge(j);
            const double left_part = std::clamp((s.split - x0) / dx, 0.0, 1.0);
            if (left_part == 1.0) {
              values[j] = s.left;
            } else if (left_part == 0.0) {
              values[j] = s.right;
            } else {
              values[j] = s.left * left_part + s.right * (1.0 - left_part);
            }
          }
        } else if constexpr (std::is_same_v<T, CellsInit>) {
          if (s.values.size() != n) throw InvalidArgument("cells length does not match grid");
          values = s.values;
        } else {
          const auto expr = detail::Expression::parse(s.text);
          for (std::size_t j = 0; j < n; ++j) values[j] = expr.eval(grid.center(j));
        }
      },
      spec);
  return Field(grid, std::move(values));
}

json to_json(const PiecewiseFunction& f) {
  return {{"breakpoints", f.breakpoints()}, {"pieces", f.pieces()}, {"monotone", f.monotone()}};
}

PiecewiseFunction piecewise_from_json(const json& j, const std::string& pointer) {
  require_object(j, pointer);
  reject_unknown(j, pointer, {"breakpoints", "pieces", "monotone"});
  const std::string bp_ptr = child(pointer, "breakpoints");
  std::vector<double> bp = get_numbers(require_key(j, pointer, "breakpoints"), bp_ptr);
  if (bp.size() < 2) throw SchemaError(bp_ptr, "need at least two breakpoints");
  for (std::size_t i = 1; i < bp.size(); ++i) {
    if (!(bp[i] > bp[i - 1])) throw SchemaError(bp_ptr, "breakpoints must be strictly increasing");
  }
  const std::string pc_ptr = child(pointer, "pieces");
  const json& pieces = require_key(j, pointer, "pieces");
  if (!pieces.is_array()) throw SchemaError(pc_ptr, "expected an array of coefficient arrays");
  if (pieces.size() + 1 != bp.size()) {
    throw SchemaError(pc_ptr, "need one piece per breakpoint interval");
  }
  std::vector<PiecewiseFunction::Coeffs> coeffs;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    auto c = get_numbers(pieces[i], child(pc_ptr, i));
    if (c.empty() || c.size() > 4) {
      throw SchemaError(child(pc_ptr, i), "a piece has 1 to 4 coefficients");
    }
    coeffs.push_back(std::move(c));
  }
  bool monotone = false;
  if (j.contains("monotone")) {
    if (!j["monotone"].is_boolean()) {
      throw SchemaError(child(pointer, "monotone"), "expected a boolean");
    }
    monotone = j["monotone"].get<bool>();
  }
  return PiecewiseFunction(std::move(bp), std::move(coeffs), monotone);
}

json to_json(const StructureReport& r) {
  return {{"I", r.I},   {"M", r.M},       {"a", r.a},
          {"b", r.b},   {"a_prime", r.a2}, {"b_prime", r.b2},
          {"c", r.c},   {"degenerate_speed", r.degenerate_speed}};
}

namespace {
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
}  // namespace

json to_json(const CheckReport& r) {
  json j = {{"name", r.name},
            {"passed", r.passed},
            {"observed", number_or_null(r.observed)},
            {"threshold", number_or_null(r.threshold)}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

json to_json(const ProfileEstimate& p) {
  json history = json::array();
  for (const auto& tv : p.residual_history) history.push_back({tv.time, tv.value});
  return {{"c_used", p.c_used},
          {"converged", p.converged},
          {"threshold", p.threshold},
          {"residual_history", history},
          {"v", field_to_json(p.v)}};
}

json field_to_json(const Field& f) {
  return json(std::vector<double>(f.values().begin(), f.values().end()));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string series_csv(const Series& s) {
  std::string out = "time,value\n";
  for (const auto& tv : s) {
    out += format_double(tv.time);
    out += ',';
    out += format_double(tv.value);
    out += '\n';
  }
  return out;
}

std::string snapshots_csv(const RunResult& run) {
  std::string out = "time";
  const std::size_t n = run.snapshots.empty() ? 0 : run.snapshots.front().field.size();
  for (std::size_t j = 0; j < n; ++j) out += ",u" + std::to_string(j);
  out += '\n';
  for (const auto& snap : run.snapshots) {
    out += format_double(snap.time);
    for (double x : snap.field.values()) {
      out += ',';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

bool ScenarioResult::passed() const {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed; });
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult result;
  result.name = cfg.name;
  const auto dir = out_dir / cfg.name;
  std::filesystem::create_directories(dir);

  const Grid grid(cfg.n_cells);
  std::optional<RunResult> run_a;
  std::optional<RunResult> run_b;
  std::string run_error;
  try {
    const Field u0 = build_initial(cfg.initial, grid);
    if (cfg.is_pair()) {
      const Field u0b = build_initial(*cfg.initial_b, grid);
      const double bound = cfg.bound.value_or(std::max(u0.sup_norm(), u0b.sup_norm()));
      auto runs = run_pair(cfg.phi, cfg.g, u0, u0b, cfg.scheme, cfg.tol, bound);
      run_a = std::move(runs.first);
      run_b = std::move(runs.second);
    } else {
      run_a = run(cfg.phi, cfg.g, u0, cfg.scheme, cfg.tol, cfg.bound);
    }
  } catch (const std::exception& ex) {
    run_error = ex.what();
  }

  if (run_a) {
    write_file_atomic(dir / "snapshots.csv", snapshots_csv(*run_a));
    write_file_atomic(dir / "structure.json", dump(to_json(run_a->structure)));
  }
  if (run_b) {
    write_file_atomic(dir / "snapshots_b.csv", snapshots_csv(*run_b));
    write_file_atomic(dir / "structure_b.json", dump(to_json(run_b->structure)));
  }

  for (const auto& spec : cfg.checks) {
    if (spec.name == "band_projection") {
      // Needs no run.
      try {
        auto r = band_projection_trials(grid, cfg.seed, spec.trials.value_or(500));
        result.reports.push_back(std::move(r));
      } catch (const std::exception& ex) {
        result.reports.push_back(failed_report(spec.name, ex.what()));
      }
      continue;
    }
    if (!run_a) {
      result.reports.push_back(failed_report(spec.name, "run failed: " + run_error));
      continue;
    }
    try {
      const RunResult& ra = *run_a;
      const StructureReport& st = ra.structure;
      CheckReport r;
      if (spec.name == "conservation") {
        r = conservation_monitor(ra);
        if (run_b) {
          const CheckReport rb = conservation_monitor(*run_b);
          r.observed = std::max(r.observed, rb.observed);
          r.passed = r.observed <= r.threshold;
          r.aux.push_back({"b", rb.series});
        }
        if (spec.threshold) {
          r.threshold = *spec.threshold;
          r.passed = r.observed <= r.threshold;
        }
      } else if (spec.name == "decay") {
        r = decay_metric(ra, spec.threshold);
      } else if (spec.name == "cutoff") {
        r = cutoff_convergence(ra, st.a2, st.b2, spec.threshold);
      } else if (spec.name == "entropy") {
        // Keep the k grid inside the region where phi and g are defined.
        const double k_lo = std::max(cfg.phi.lower(), cfg.g.lower());
        const double k_hi = std::min(cfg.phi.upper(), cfg.g.upper());
        auto ks = default_k_values(ra.initial());
        for (auto& k : ks) k = std::clamp(k, k_lo, k_hi);
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
        r = entropy_residual(ra, cfg.phi, cfg.g, ks,
                             default_bumps(ra.params.t_end), spec.constant.value_or(10.0));
        if (spec.threshold) {
          r.threshold = *spec.threshold;
          r.passed = r.observed <= r.threshold;
        }
      } else if (spec.name == "squeeze") {
        r = squeeze_bounds(ra, cfg.phi, cfg.g, spec.shift_upper.value_or(st.b2 - st.I),
                           spec.shift_lower.value_or(st.a2 - st.I));
        if (spec.threshold) {
          r.threshold = *spec.threshold;
          r.passed = r.observed <= r.threshold;
        }
      } else if (spec.name == "profile") {
        const double t_lo = spec.t_lo.value_or(0.5 * ra.params.t_end);
        const ProfileEstimate p = extract_profile(ra, st, t_lo, spec.threshold);
        write_file_atomic(dir / "profile.csv", profile_csv(p));
        r.name = "profile";
        r.series = p.residual_history;
        r.observed = p.residual_history.empty() ? std::numeric_limits<double>::infinity()
                                                : p.residual_history.back().value;
        r.threshold = p.threshold;
        r.passed = p.converged;
      } else if (spec.name == "contraction") {
        r = contraction_monitor(ra, *run_b);
        if (spec.threshold) {
          r.threshold = *spec.threshold;
          r.passed = r.observed <= r.threshold;
        }
      } else if (spec.name == "t_nonexpansive") {
        // The override replaces the slack added to the initial distance.
        r = t_nonexpansive_from_runs(ra, *run_b, spec.threshold);
      } else {
        throw InvalidArgument("unknown check " + spec.name);
      }
      result.reports.push_back(std::move(r));
    } catch (const std::exception& ex) {
      result.reports.push_back(failed_report(spec.name, ex.what()));
    }
  }

  json checks = json::array();
  for (const auto& r : result.reports) {
    checks.push_back(to_json(r));
    write_series(dir / "series", r);
  }
  json doc = {{"name", cfg.name}, {"checks", checks}};
  if (!run_error.empty()) doc["run_error"] = run_error;
  write_file_atomic(dir / "checks.json", dump(doc));

  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

unsigned resolve_threads(unsigned requested) {
  unsigned threads = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DEGENWAVE_THREADS")) {
    unsigned cap = 0;
    const std::string_view s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (res.ec == std::errc() && cap > 0) threads = std::min(threads, cap);
  }
  return std::max(1u, threads);
}

}  // namespace

SuiteSummary run_suite(const std::vector<ScenarioConfig>& configs,
                       const std::filesystem::path& out_dir, unsigned threads) {
  std::filesystem::create_directories(out_dir);
  SuiteSummary summary;
  summary.scenarios.resize(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      summary.scenarios[i] = run_scenario(configs[i], out_dir);
    }
  };
  const unsigned count =
      std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(configs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  summary.overall_pass = std::all_of(summary.scenarios.begin(), summary.scenarios.end(),
                                     [](const auto& s) { return s.passed(); });
  write_file_atomic(out_dir / "summary.json", dump(summary_json(summary)));

  json timings = json::array();
  double total = 0.0;
  for (const auto& s : summary.scenarios) {
    timings.push_back({{"name", s.name}, {"seconds", s.seconds}});
    total += s.seconds;
  }
  write_file_atomic(out_dir / "timings.json",
                    dump({{"scenarios", timings}, {"total_seconds", total}}));
  return summary;
}

json summary_json(const SuiteSummary& summary) {
  json scenarios = json::array();
  for (const auto& s : summary.scenarios) {
    json checks = json::array();
    for (const auto& r : s.reports) {
      checks.push_back({{"name", r.name},
                        {"passed", r.passed},
                        {"observed", number_or_null(r.observed)},
                        {"threshold", number_or_null(r.threshold)}});
    }
    scenarios.push_back({{"name", s.name}, {"checks", checks}});
  }
  return {{"scenarios", scenarios}, {"overall_pass", summary.overall_pass}};
}

// ---------------------------------------------------------------------------
// CLI

namespace {

std::vector<ScenarioConfig> load_configs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("", "cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void print_failures(const SuiteSummary& summary) {
  for (const auto& s : summary.scenarios) {
    for (const auto& r : s.reports) {
      if (r.passed) continue;
      std::cerr << "FAIL " << s.name << "/" << r.name << ": observed "
                << format_double(r.observed) << " > threshold " << format_double(r.threshold);
      if (!r.error.empty()) std::cerr << " (" << r.error << ")";
      std::cerr << "\n";
    }
  }
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Numerical lab for periodic degenerate convection-diffusion equations"};
  app.require_subcommand(1);

  std::string config;
  std::string out = "out";
  unsigned threads = 0;

  auto* run_cmd = app.add_subcommand("run", "Run the scenarios of a config file");
  auto* suite_cmd = app.add_subcommand("suite", "Run a batch and write summary.json");
  auto* analyze_cmd = app.add_subcommand("analyze", "Print the structure report only");
  auto* pair_cmd = app.add_subcommand("pair", "Run two-initial-data scenarios");
  for (auto* cmd : {run_cmd, suite_cmd, analyze_cmd, pair_cmd}) {
    cmd->add_option("--config", config, "Scenario JSON file")->required();
  }
  for (auto* cmd : {run_cmd, suite_cmd, pair_cmd}) {
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--threads", threads, "Scenario parallelism (0 = auto)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto configs = load_configs(config);
    if (analyze_cmd->parsed()) {
      json reports = json::object();
      for (const auto& cfg : configs) {
        const Field u0 = build_initial(cfg.initial, Grid(cfg.n_cells));
        reports[cfg.name] = to_json(analyze(cfg.phi, cfg.g, u0, cfg.tol, cfg.bound));
      }
      std::cout << (configs.size() == 1 ? reports.begin().value() : reports).dump(2) << "\n";
      return 0;
    }
    if (pair_cmd->parsed()) {
      for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!configs[i].is_pair()) {
          throw SchemaError("/" + std::to_string(i) + "/initial_b",
                            "pair scenarios need initial_b");
        }
      }
    }
    const SuiteSummary summary = run_suite(configs, out, threads);
    print_failures(summary);
    return summary.overall_pass ? 0 : 1;
  } catch (const SchemaError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace degenwave
