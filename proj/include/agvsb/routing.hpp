#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "agvsb/layout.hpp"

namespace agvsb {

/// Orders per trip.
inline constexpr std::size_t kTripCapacity = 4;

struct Path {
  std::vector<Cell> cells;
  double length = 0.0;  // metres

  std::size_t moves() const noexcept { return cells.empty() ? 0 : cells.size() - 1; }
};

struct SearchOptions {
  /// Extra impassable cells, indexed by GridMap::index. Start and goal are
  /// never treated as blocked.
  const std::vector<bool>* blocked = nullptr;
  /// Called once per expanded node with its g and h values.
  std::function<void(Cell, int g, int h)> onExpand;
};

/// Shortest 4-connected path under the Manhattan heuristic. Open-list ties
/// break on lower f, then lower h, then lexicographic cell order.
/// Throws NoPathError when the goal is unreachable.
Path astar(const GridMap& map, Cell start, Cell goal, const SearchOptions& options = {});

/// One AGV loop: station -> up to four pickups -> station.
struct Trip {
  AgvId agv = 0;
  std::vector<Cell> stops;
  /// visitOrder[k] is the batch index served at stop k.
  std::vector<std::size_t> visitOrder;
  std::vector<Path> legs;
  Cell terminal{};

  double length() const;
};

/// Exact best visiting order over all permutations of the batch. Ties on
/// tour length go to the order that reaches its stops soonest.
/// Throws ValidationError for empty batches or more than kTripCapacity stops.
Trip order_stops(const GridMap& map, std::span<const Cell> batch, Cell station, AgvId agv = 0);

enum class StepDecision { Proceed, Wait };

/// Per-tick cell and edge claims. Claims made by stationary AGVs are hard and
/// block everyone; moving claims are resolved by serial number, lower wins.
/// The exempt cell (the station depot) holds any number of AGVs.
class ReservationTable {
 public:
  explicit ReservationTable(std::optional<Cell> exempt = std::nullopt) : exempt_(exempt) {}

  void clear() {
    vertices_.clear();
    edges_.clear();
    displaced_.clear();
  }
  /// Marks `c` as held by a stationary AGV during `tick`.
  void hold(AgvId agv, Cell c, long tick);

  std::optional<AgvId> vertexOwner(Cell c, long tick) const;
  std::optional<AgvId> edgeOwner(Cell from, Cell to, long tick) const;
  bool isExempt(Cell c) const { return exempt_ && *exempt_ == c; }
  /// AGVs whose moving claims were overridden by a lower serial.
  const std::vector<AgvId>& displaced() const { return displaced_; }

 private:
  friend StepDecision reserve_step(ReservationTable&, AgvId, Cell, Cell, long);
  struct Claim {
    AgvId agv;
    bool hard;
  };
  using VertexKey = std::pair<long, Cell>;
  using EdgeKey = std::pair<long, std::pair<Cell, Cell>>;

  std::optional<Cell> exempt_;
  std::map<VertexKey, Claim> vertices_;
  std::map<EdgeKey, AgvId> edges_;
  std::vector<AgvId> displaced_;
};

/// Claims the move from `current` to `next` departing at `tick` (arriving at
/// tick + 1). Proceeds when the target is free or only claimed by a moving
/// higher-serial AGV, and when the move is not a head-on swap with a
/// lower-serial AGV. A waiting AGV holds `current` for tick + 1.
StepDecision reserve_step(ReservationTable& table, AgvId agv, Cell current, Cell next, long tick);

struct MoveRequest {
  AgvId agv = 0;
  Cell current{};
  /// Empty for a stationary AGV.
  std::optional<Cell> next;
};

/// Resolves one tick of simultaneous moves: requests are claimed in serial
/// order with reserve_step, and AGVs forced to wait hold their cells, until
/// no further decision changes. Result is parallel to `requests`; stationary
/// requests always get Wait.
std::vector<StepDecision> resolve_moves(std::span<const MoveRequest> requests, long tick,
                                        std::optional<Cell> depot);

}  // namespace agvsb
