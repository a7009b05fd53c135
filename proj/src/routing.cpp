#include "agvsb/routing.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>

namespace agvsb {

namespace {
constexpr std::array<Cell, 4> kSteps{Cell{0, 1}, Cell{0, -1}, Cell{-1, 0}, Cell{1, 0}};

struct OpenEntry {
  int f;
  int h;
  Cell cell;
  // std::priority_queue is a max-heap, so "greater" means "worse".
  bool operator<(const OpenEntry& o) const {
    return std::tie(f, h, cell) > std::tie(o.f, o.h, o.cell);
  }
};
}  // namespace

Path astar(const GridMap& map, Cell start, Cell goal, const SearchOptions& options) {
  if (!map.passable(start) || !map.passable(goal))
    throw NoPathError("start or goal is not a free cell");
  const auto isBlocked = [&](Cell c) {
    if (!map.passable(c)) return true;
    if (c == start || c == goal || options.blocked == nullptr) return false;
    return static_cast<bool>((*options.blocked)[map.index(c)]);
  };

  constexpr int kUnseen = std::numeric_limits<int>::max();
  std::vector<int> g(map.cellCount(), kUnseen);
  std::vector<std::size_t> parent(map.cellCount(), std::numeric_limits<std::size_t>::max());
  std::vector<bool> closed(map.cellCount(), false);
  std::priority_queue<OpenEntry> open;

  g[map.index(start)] = 0;
  open.push({manhattan(start, goal), manhattan(start, goal), start});
  bool found = false;
  while (!open.empty()) {
    const OpenEntry cur = open.top();
    open.pop();
    const auto ci = map.index(cur.cell);
    if (closed[ci]) continue;
    closed[ci] = true;
    if (options.onExpand) options.onExpand(cur.cell, g[ci], cur.h);
    if (cur.cell == goal) {
      found = true;
      break;
    }
    for (const Cell d : kSteps) {
      const Cell n{cur.cell.x + d.x, cur.cell.y + d.y};
      if (isBlocked(n)) continue;
      const auto ni = map.index(n);
      const int tentative = g[ci] + 1;
      if (closed[ni] || tentative >= g[ni]) continue;
      g[ni] = tentative;
      parent[ni] = ci;
      const int h = manhattan(n, goal);
      open.push({tentative + h, h, n});
    }
  }
  if (!found) throw NoPathError("no path between the requested cells");

  Path path;
  for (auto i = map.index(goal);; i = parent[i]) {
    path.cells.push_back(map.cellAt(i));
    if (i == map.index(start)) break;
  }
  std::reverse(path.cells.begin(), path.cells.end());
  path.length = static_cast<double>(path.moves()) * map.cellSize();
  return path;
}

double Trip::length() const {
  double total = 0.0;
  for (const auto& leg : legs) total += leg.length;
  return total;
}

Trip order_stops(const GridMap& map, std::span<const Cell> batch, Cell station, AgvId agv) {
  if (batch.empty() || batch.size() > kTripCapacity)
    throw ValidationError("batch", "trip batch must hold 1.." + std::to_string(kTripCapacity) + " stops");

  // Node 0 is the station, 1..n the pickups.
  std::vector<Cell> nodes{station};
  nodes.insert(nodes.end(), batch.begin(), batch.end());
  const std::size_t n = nodes.size();
  std::vector<std::vector<Path>> legs(n, std::vector<Path>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) legs[i][j] = astar(map, nodes[i], nodes[j]);
      else legs[i][j] = Path{{nodes[i]}, 0.0};

  std::vector<std::size_t> perm(batch.size());
  std::iota(perm.begin(), perm.end(), std::size_t{1});
  // Among equally short tours prefer the one reaching its stops earliest
  // (smallest sum of arrival distances), then the first in permutation order.
  std::vector<std::size_t> best;
  double bestLength = std::numeric_limits<double>::infinity();
  double bestArrivals = std::numeric_limits<double>::infinity();
  do {
    double reach = legs[0][perm.front()].length;
    double arrivals = reach;
    for (std::size_t k = 1; k < perm.size(); ++k) {
      reach += legs[perm[k - 1]][perm[k]].length;
      arrivals += reach;
    }
    const double total = reach + legs[perm.back()][0].length;
    if (total < bestLength || (total == bestLength && arrivals < bestArrivals)) {
      bestLength = total;
      bestArrivals = arrivals;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Trip trip;
  trip.agv = agv;
  trip.terminal = station;
  std::size_t prev = 0;
  for (const auto k : best) {
    trip.stops.push_back(nodes[k]);
    trip.visitOrder.push_back(k - 1);
    trip.legs.push_back(legs[prev][k]);
    prev = k;
  }
  trip.legs.push_back(legs[prev][0]);
  return trip;
}

void ReservationTable::hold(AgvId agv, Cell c, long tick) {
  if (isExempt(c)) return;
  vertices_[{tick, c}] = Claim{agv, true};
}

std::optional<AgvId> ReservationTable::vertexOwner(Cell c, long tick) const {
  const auto it = vertices_.find({tick, c});
  if (it == vertices_.end()) return std::nullopt;
  return it->second.agv;
}

std::optional<AgvId> ReservationTable::edgeOwner(Cell from, Cell to, long tick) const {
  const auto it = edges_.find({tick, {from, to}});
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

StepDecision reserve_step(ReservationTable& table, AgvId agv, Cell current, Cell next, long tick) {
  auto wait = [&] {
    table.hold(agv, current, tick + 1);
    return StepDecision::Wait;
  };
  if (next == current) return wait();

  if (!table.isExempt(next)) {
    const auto it = table.vertices_.find({tick + 1, next});
    if (it != table.vertices_.end()) {
      if (it->second.hard || it->second.agv < agv) return wait();
      table.displaced_.push_back(it->second.agv);
    }
  }
  // Head-on swap through the same edge. Moves touching the depot are exempt.
  if (!table.isExempt(next) && !table.isExempt(current)) {
    if (const auto owner = table.edgeOwner(next, current, tick)) {
      if (*owner < agv) return wait();
      table.displaced_.push_back(*owner);
    }
  }
  if (!table.isExempt(next)) table.vertices_[{tick + 1, next}] = {agv, false};
  table.edges_[{tick, {current, next}}] = agv;
  return StepDecision::Proceed;
}

std::vector<StepDecision> resolve_moves(std::span<const MoveRequest> requests, long tick,
                                        std::optional<Cell> depot) {
  std::vector<std::size_t> order(requests.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return requests[a].agv < requests[b].agv; });

  std::vector<bool> proceed(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i)
    proceed[i] = requests[i].next && *requests[i].next != requests[i].current;

  ReservationTable table(depot);
  for (bool changed = true; changed;) {
    changed = false;
    table.clear();
    for (std::size_t i = 0; i < requests.size(); ++i)
      if (!proceed[i]) table.hold(requests[i].agv, requests[i].current, tick + 1);
    for (const auto i : order) {
      if (!proceed[i]) continue;
      if (reserve_step(table, requests[i].agv, requests[i].current, *requests[i].next, tick) ==
          StepDecision::Wait) {
        proceed[i] = false;
        changed = true;
      }
    }
  }
  std::vector<StepDecision> out(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i)
    out[i] = proceed[i] ? StepDecision::Proceed : StepDecision::Wait;
  return out;
}

}  // namespace agvsb
