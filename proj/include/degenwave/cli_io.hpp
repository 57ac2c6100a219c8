#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "degenwave/diagnostics.hpp"
#include "degenwave/grid_state.hpp"
#include "degenwave/piecewise_fn.hpp"
#include "degenwave/solver.hpp"
#include "degenwave/structure_analysis.hpp"

namespace degenwave {

/// mean + amplitude sin(2 pi frequency x), as exact cell averages.
struct SineInit {
  double mean = 0.0;
  double amplitude = 0.0;
  int frequency = 1;
  bool operator==(const SineInit&) const = default;
};

/// left on [0, split), right on [split, 1), as exact cell averages.
struct StepInit {
  double left = 0.0;
  double right = 0.0;
  double split = 0.5;
  bool operator==(const StepInit&) const = default;
};

struct CellsInit {
  std::vector<double> values;
  bool operator==(const CellsInit&) const = default;
};

/// Expression in x evaluated at cell centres. Grammar: numbers, `x`, `pi`,
/// + - * /, parentheses, sin(...), cos(...).
struct ExpressionInit {
  std::string text;
  bool operator==(const ExpressionInit&) const = default;
};

using InitialSpec = std::variant<SineInit, StepInit, CellsInit, ExpressionInit>;

/// One requested check with optional per-check overrides.
struct CheckSpec {
  std::string name;
  std::optional<double> threshold;
  std::optional<double> t_lo;      ///< profile
  std::optional<double> constant;  ///< entropy
  std::optional<int> trials;       ///< band_projection
  std::optional<double> shift_upper;  ///< squeeze; default b2 - I
  std::optional<double> shift_lower;  ///< squeeze; default a2 - I
  bool operator==(const CheckSpec&) const = default;
};

struct ScenarioConfig {
  std::string name;
  PiecewiseFunction phi = PiecewiseFunction::constant(0.0);
  PiecewiseFunction g = PiecewiseFunction::constant(0.0);
  InitialSpec initial;
  std::optional<InitialSpec> initial_b;  ///< second initial data (pair scenarios)
  std::size_t n_cells = 0;
  SchemeParams scheme;
  double tol = kDefaultTol;
  std::optional<double> bound;  ///< overrides M in the structure analysis
  std::vector<CheckSpec> checks;
  std::uint64_t seed = 0;

  bool is_pair() const noexcept { return initial_b.has_value(); }
  bool operator==(const ScenarioConfig&) const = default;
};

/// Check names understood by run_scenario.
const std::vector<std::string>& known_checks();
/// Checks that need two initial data.
bool is_pair_check(std::string_view name);

/// Parses one scenario object or an array of them; fills defaults. Throws
/// SchemaError carrying a JSON pointer.
std::vector<ScenarioConfig> parse_config(std::string_view text);
nlohmann::json serialize_config(const ScenarioConfig& cfg);

Field build_initial(const InitialSpec& spec, const Grid& grid);

nlohmann::json to_json(const PiecewiseFunction& f);
PiecewiseFunction piecewise_from_json(const nlohmann::json& j, const std::string& pointer);
nlohmann::json to_json(const StructureReport& r);
nlohmann::json to_json(const CheckReport& r);
nlohmann::json to_json(const ProfileEstimate& p);
nlohmann::json field_to_json(const Field& f);

/// Shortest round-trip decimal form.
std::string format_double(double v);
/// "time,value" lines.
std::string series_csv(const Series& s);
/// One row per snapshot: time, then the cell values.
std::string snapshots_csv(const RunResult& run);

/// Writes through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

struct ScenarioResult {
  std::string name;
  std::vector<CheckReport> reports;
  double seconds = 0.0;

  bool passed() const;
};

struct SuiteSummary {
  std::vector<ScenarioResult> scenarios;
  bool overall_pass = false;
};

/// Runs one scenario and its checks, writing outputs below out_dir/<name>/.
/// Failures inside the run or a check become failed reports.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

/// Runs every scenario (up to `threads` at once; 0 = DEGENWAVE_THREADS or
/// hardware concurrency) and writes summary.json and timings.json.
SuiteSummary run_suite(const std::vector<ScenarioConfig>& configs,
                       const std::filesystem::path& out_dir, unsigned threads = 0);

nlohmann::json summary_json(const SuiteSummary& summary);

/// Command-line entry point; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace degenwave
