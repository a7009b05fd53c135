#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agvsb/agdqn.hpp"
#include "agvsb/simulator.hpp"

namespace agvsb::cli {

using EnvVars = std::vector<std::pair<std::string, std::string>>;

/// AGVSB_* variables of the running process.
EnvVars process_environment();

enum class TrainScenario { SingleGoal, SmallWarehouse };

struct TrainSpec {
  TrainConfig config;
  TrainScenario scenario = TrainScenario::SingleGoal;
  std::uint64_t scenarioSeed = 1;
  Rule rule = Rule::PDSP;
};

/// A scenario file: base simulation settings plus sweep axes.
struct ScenarioSpec {
  std::uint64_t seed = 1;
  std::size_t replications = 1;
  SimConfig base;
  std::vector<WarehouseScale> layouts{WarehouseScale::Medium};
  std::vector<std::size_t> fleets{3};
  std::vector<std::size_t> orders{500};
  std::vector<Interval> owts{{0.0, 5.0}};
  std::vector<DeadlineWindows> dtws{DeadlineWindows{}};
  std::vector<Rule> rules{Rule::PDSP};
  /// Orders read from a shipping CSV instead of synthesised.
  std::optional<std::filesystem::path> streamFile;
  TrainSpec train;

  void validate() const;
  std::size_t pointCount() const;
};

/// INI grammar (see README). Environment entries AGVSB_<SECTION>__<KEY>
/// (or AGVSB_<KEY> for top-level keys) override file values.
ScenarioSpec parse_spec(std::istream& in, const EnvVars& env = {});
ScenarioSpec load_spec(const std::filesystem::path& path, const EnvVars& env = {});

/// One simulation in a sweep. Rules vary fastest and share the point seed,
/// so every rule sees the same layout and order stream.
struct SweepPoint {
  std::size_t index = 0;  // row position
  std::size_t point = 0;  // seed index, shared by the rules of one point
  std::size_t replication = 0;
  SimConfig config;
};

std::vector<SweepPoint> expand(const ScenarioSpec& spec);

struct SweepRow {
  SweepPoint point;
  std::optional<KpiReport> kpi;
  std::size_t streamSize = 0;
  std::string error;  // empty on success
  bool aborted = false;  // deadlock
  bool invalid = false;  // bad input (stream file, config) rather than a failed run
};

/// Runs every point with up to `jobs` worker threads; rows come back in
/// point-index order.
std::vector<SweepRow> run_sweep(const ScenarioSpec& spec, std::size_t jobs);
SweepRow run_point(const ScenarioSpec& spec, const SweepPoint& point, SimTrace* traceOut = nullptr);

inline constexpr std::array<std::string_view, 22> kResultColumns{
    "Layout", "FS", "OQ", "OWT", "DTW", "TrT", "WT", "OpT", "E1", "CoI", "CoD",
    "EmT", "RT", "E2", "E", "CoE", "CoT", "SRT", "CoS", "Rule", "Seed", "ServiceLevel"};

std::string format_owt(const Interval& owt);
std::string format_dtw(const DeadlineWindows& dtw);

enum class Format { Csv, Json };
Format parse_format(std::string_view s);

/// Successful rows only, in the published column order.
void write_results(std::ostream& out, const std::vector<SweepRow>& rows, Format format);
/// Failed rows: Layout,FS,OQ,OWT,DTW,Rule,Seed,Error. Returns the count.
std::size_t write_errors(std::ostream& out, const std::vector<SweepRow>& rows);

/// A results row read back for comparison.
struct ResultRow {
  std::string layout;
  long fs = 0;
  long oq = 0;
  std::string owt, dtw, rule;
  std::uint64_t seed = 0;
  std::array<double, 14> kpi{};  // TrT..CoS in column order
  double serviceLevel = 0.0;

  double value(std::string_view column) const;
};

std::vector<ResultRow> read_results(std::istream& in);

inline constexpr std::array<std::string_view, 15> kKpiColumns{
    "TrT", "WT", "OpT", "E1", "CoI", "CoD", "EmT", "RT", "E2", "E", "CoE", "CoT", "SRT", "CoS", "ServiceLevel"};

struct GroupSummary {
  std::string scenario;  // "layout FS OQ OWT DTW"
  std::string layout;
  long fs = 0, oq = 0;
  std::string owt, dtw, rule;
  std::size_t runs = 0;
  std::array<double, kKpiColumns.size()> mean{};
};

struct Delta {
  std::string scenario, rule, kpi, baseline;
  double value = 0.0, baselineValue = 0.0;
  std::optional<double> percent;  // undefined when the baseline is zero
};

struct Comparison {
  std::vector<GroupSummary> groups;  // scenario order of first appearance, rules in canonical order
  std::vector<Delta> deltas;
};

/// (value - best baseline) / |best baseline| * 100 for PDSP and DCSP against
/// the best of FCFS/SPT/EDT/LDC; lower is better except ServiceLevel.
Comparison compare_rules(const std::vector<ResultRow>& rows);
std::optional<double> percent_delta(double value, double baseline);

void write_summary(std::ostream& out, const Comparison& c, Format format);
void write_deltas(std::ostream& out, const Comparison& c, Format format);
/// Grouped bar chart: one group per scenario, one bar per rule.
std::string render_svg(const Comparison& c, std::string_view kpi);

/// Per-AGV counts from a trace file.
struct ReplaySummary {
  struct Agv {
    AgvId id = 0;
    std::size_t moves = 0, waits = 0, pickups = 0, deliveries = 0, recharges = 0, replans = 0;
    long lastTick = 0;
  };
  std::vector<Agv> agvs;
  Cell station{};
  std::size_t collisions = 0;
};

/// Without an explicit station, the cell of the first dispatch is used.
ReplaySummary replay(const std::vector<TraceEvent>& events, std::optional<Cell> station = {});
void write_replay(std::ostream& out, const ReplaySummary& s, Format format);

Scenario make_train_scenario(const TrainSpec& spec);

}  // namespace agvsb::cli
