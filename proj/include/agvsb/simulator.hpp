#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agvsb/costmodel.hpp"
#include "agvsb/layout.hpp"
#include "agvsb/orders.hpp"
#include "agvsb/routing.hpp"
#include "agvsb/scheduler.hpp"

namespace agvsb {

struct SimConfig {
  WarehouseScale layoutScale = WarehouseScale::Medium;
  LayoutConfig layout;
  std::size_t fleetSize = 3;
  std::size_t orderQuantity = 500;
  Interval owt{0.0, 5.0};
  DeadlineWindows dtw;
  ClassMix classMix = kDefaultClassMix;
  CostParams cost;
  std::array<double, kClassCount> delayCaps{2.0, 1.5, 1.0, 0.5};
  double saturationFactor = 2.0;
  Rule rule = Rule::PDSP;
  std::uint64_t seed = 1;
  double resortInterval = 10.0;  // s
  std::size_t capacity = kTripCapacity;
  /// Consecutive blocked ticks before an AGV re-plans around the others.
  long replanAfterTicks = 50;
  /// Ticks without any AGV movement before the run is aborted.
  long stallLimitTicks = 10000;
  /// Slack added to the doubled trip length when deciding to recharge.
  double batteryMargin = 120.0;  // s
  bool recordEvents = true;

  ProfileParams profileParams() const { return {delayCaps, dtw, saturationFactor}; }
  void validate() const;
};

enum class EventKind { Dispatch, Move, Wait, Pickup, Deliver, Recharge, Replan };
std::string_view event_name(EventKind k);
EventKind parse_event(std::string_view s);

/// One trace line. Positional events carry the AGV cell after the tick.
struct TraceEvent {
  long tick = 0;
  AgvId agv = 0;
  EventKind kind = EventKind::Move;
  OrderId orderId = 0;  // 0 when not order-specific
  Cell cell{};
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct TripRecord {
  AgvId agv = 0;
  long dispatchTick = 0;
  long endTick = 0;
  std::size_t batteryCycle = 0;
  /// Order ids in visiting order, one per stop.
  std::vector<OrderId> orders;
  std::vector<Cell> stops;
  /// Cell occupied at every tick from dispatch to return, waits included.
  std::vector<Cell> walk;
  double payloadKg = 0.0;
};

/// Everything validate_constraints needs to audit a run.
struct SimTrace {
  Cell station{};
  std::size_t fleetSize = 0;
  std::size_t capacity = kTripCapacity;
  double tickSeconds = 1.0;
  CostParams cost;
  std::array<double, kClassCount> delayCaps{};
  std::vector<Order> orders;
  std::vector<TripRecord> trips;
  std::vector<TraceEvent> events;
  std::vector<OrderServiceRecord> records;
};

/// Columns of the published sensitivity tables plus service level.
struct KpiReport {
  double TrT = 0, WT = 0, OpT = 0;  // s, per-order means
  double E1 = 0;                    // Wh, payload share of traction energy
  double CoI = 0, CoD = 0;          // $
  double EmT = 0, RT = 0;           // s, fleet totals
  double E2 = 0, E = 0;             // Wh
  double CoE = 0, CoT = 0;          // $
  double SRT = 0;                   // s, fleet size x makespan
  double CoS = 0;                   // $
  double serviceLevel = 0;
  double objective = 0;  // weighted by cost.wt
  /// Independent sum of leg energies, for the conservation check.
  double legEnergy = 0;
  std::size_t orders = 0;
  double makespan = 0;  // s
};

struct SimResult {
  KpiReport kpi;
  SimTrace trace;
};

/// Runs the stream to completion on `map`. Throws DeadlockError when the
/// fleet stops making progress.
SimResult run(const SimConfig& config, const GridMap& map, const OrderStream& stream);
/// Generates the layout and a synthetic stream from the config seed first.
SimResult run(const SimConfig& config);

/// Fraction of records delivered with zero delay.
double service_level(std::span<const OrderServiceRecord> records);

enum class ConstraintCode {
  FlowConservation,
  Assignment,
  SubtourElimination,
  Capacity,
  Weight,
  Battery,
  Temporal,
  ClassDeadlineOrder,
  WeightRange,
  CapOrder,
  Collision,
};
std::string_view constraint_name(ConstraintCode c);

struct Violation {
  ConstraintCode code;
  std::string detail;
};

std::vector<Violation> validate_constraints(const SimTrace& trace);
/// Vertex and edge-swap conflicts outside the station, from positional events.
std::vector<Violation> find_collisions(std::span<const TraceEvent> events, Cell station);

/// Trace file: `tick,agv,event,orderId,x,y` per line after a header.
void write_trace(std::ostream& out, std::span<const TraceEvent> events);
std::vector<TraceEvent> read_trace(std::istream& in);

}  // namespace agvsb
