#include "agvsb/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "agvsb/csv.hpp"

namespace agvsb {

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::FCFS: return "fcfs";
    case Rule::SPT: return "spt";
    case Rule::EDT: return "edt";
    case Rule::LDC: return "ldc";
    case Rule::PDSP: return "pdsp";
    case Rule::DCSP: return "dcsp";
  }
  return "?";
}

std::string_view rule_label(Rule r) {
  switch (r) {
    case Rule::FCFS: return "FCFS";
    case Rule::SPT: return "SPT";
    case Rule::EDT: return "EDT";
    case Rule::LDC: return "LDC";
    case Rule::PDSP: return "PDSP";
    case Rule::DCSP: return "DCSP";
  }
  return "?";
}

Rule parse_rule(std::string_view s) {
  const auto key = csv::normalize_key(s);
  for (const Rule r : kAllRules)
    if (key == rule_name(r)) return r;
  throw ValidationError("rule", "unknown rule '" + std::string(s) + "'");
}

namespace {

// Stable sort of the pending positions by a key; returns ids in that order.
template <typename Less>
std::vector<OrderId> ordered_ids(std::span<const Order> pending, Less less) {
  std::vector<std::size_t> idx(pending.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return less(a, b); });
  std::vector<OrderId> out;
  out.reserve(idx.size());
  for (const auto i : idx) out.push_back(pending[i].id);
  return out;
}

}  // namespace

std::vector<std::size_t> arrival_ranks(std::span<const Order> pending) {
  std::vector<std::size_t> idx(pending.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(pending[a].arrival, pending[a].id) < std::tie(pending[b].arrival, pending[b].id);
  });
  std::vector<std::size_t> rank(pending.size());
  for (std::size_t r = 0; r < idx.size(); ++r) rank[idx[r]] = r;
  return rank;
}

std::vector<OrderId> sort_fcfs(std::span<const Order> pending) {
  return ordered_ids(pending, [&](std::size_t a, std::size_t b) {
    return pending[a].arrival < pending[b].arrival;
  });
}

std::vector<OrderId> sort_spt(std::span<const Order> pending, const GridMap& map,
                              const std::vector<int>& stationDistance) {
  std::vector<int> dist(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const int d = stationDistance[map.index(pending[i].pickup)];
    if (d < 0) throw NoPathError("pickup unreachable from station");
    dist[i] = d;
  }
  return ordered_ids(pending, [&](std::size_t a, std::size_t b) {
    return std::tie(dist[a], pending[a].arrival) < std::tie(dist[b], pending[b].arrival);
  });
}

std::vector<OrderId> sort_spt(std::span<const Order> pending, const GridMap& map) {
  return sort_spt(pending, map, bfs_distances(map, map.station()));
}

std::vector<OrderId> sort_edt(std::span<const Order> pending) {
  return ordered_ids(pending, [&](std::size_t a, std::size_t b) {
    return std::tie(pending[a].deadline, pending[a].arrival) <
           std::tie(pending[b].deadline, pending[b].arrival);
  });
}

double projected_delay_cost(const Order& o, double now, double latency, const ProfileSet& profiles) {
  return delay_cost(profiles.forOrder(o), waiting_time(now + latency, o.arrival));
}

std::vector<OrderId> sort_ldc(std::span<const Order> pending, double now, const ProfileSet& profiles,
                              const LdcLookahead& lookahead) {
  const auto slots = std::max<std::size_t>(1, lookahead.slotsPerRound);
  // Latency comes from the arrival rank, not the current queue position, so
  // re-sorting at the same instant is idempotent.
  const auto rank = arrival_ranks(pending);
  std::vector<double> cost(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const double latency = static_cast<double>(rank[i] / slots) * lookahead.meanTripSeconds;
    cost[i] = projected_delay_cost(pending[i], now, latency, profiles);
  }
  return ordered_ids(pending, [&](std::size_t a, std::size_t b) {
    if (cost[a] != cost[b]) return cost[a] > cost[b];
    return std::tie(pending[a].deadline, pending[a].arrival) <
           std::tie(pending[b].deadline, pending[b].arrival);
  });
}

std::vector<OrderId> sort_pdsp(std::span<const Order> pending) {
  return ordered_ids(pending, [&](std::size_t a, std::size_t b) {
    const auto& x = pending[a];
    const auto& y = pending[b];
    if (x.cls != y.cls) return x.cls < y.cls;
    const double tx = x.deadlineOffset(), ty = y.deadlineOffset();
    if (tx != ty) return tx < ty;
    return x.arrival < y.arrival;
  });
}

double dcsp_score(const Order& o, double now, const ProfileSet& profiles, double interval) {
  const auto profile = profiles.forOrder(o);
  const double waited = waiting_time(now, o.arrival);
  const double accrued = delay_cost(profile, waited);
  if (interval <= 0.0) return accrued;
  const double slope = (delay_cost(profile, waited + interval) - accrued) / interval;
  return accrued + slope * interval;
}

std::vector<OrderId> sort_dcsp(std::span<const Order> pending, double now, const ProfileSet& profiles,
                               double resortInterval) {
  std::vector<double> score(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i)
    score[i] = dcsp_score(pending[i], now, profiles, resortInterval);
  return ordered_ids(pending, [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return std::tie(pending[a].deadline, pending[a].id) < std::tie(pending[b].deadline, pending[b].id);
  });
}

std::vector<OrderId> DispatchQueue::ids() const {
  std::vector<OrderId> out;
  out.reserve(pending_.size());
  for (const auto& o : pending_) out.push_back(o.id);
  return out;
}

void DispatchQueue::resort(const SortContext& ctx) {
  std::vector<OrderId> order;
  switch (rule_) {
    case Rule::FCFS: order = sort_fcfs(pending_); break;
    case Rule::SPT:
      if (!ctx.map) throw ValidationError("scheduler", "SPT needs a map");
      order = ctx.stationDistance ? sort_spt(pending_, *ctx.map, *ctx.stationDistance)
                                  : sort_spt(pending_, *ctx.map);
      break;
    case Rule::EDT: order = sort_edt(pending_); break;
    case Rule::LDC:
      if (!ctx.profiles) throw ValidationError("scheduler", "LDC needs delay profiles");
      order = sort_ldc(pending_, ctx.now, *ctx.profiles, ctx.lookahead);
      break;
    case Rule::PDSP: order = sort_pdsp(pending_); break;
    case Rule::DCSP:
      if (!ctx.profiles) throw ValidationError("scheduler", "DCSP needs delay profiles");
      order = sort_dcsp(pending_, ctx.now, *ctx.profiles, ctx.resortInterval);
      break;
  }
  std::unordered_map<OrderId, std::size_t> pos;
  pos.reserve(pending_.size());
  for (std::size_t i = 0; i < pending_.size(); ++i) pos.emplace(pending_[i].id, i);
  std::vector<Order> sorted;
  sorted.reserve(pending_.size());
  for (const auto id : order) sorted.push_back(pending_[pos.at(id)]);
  pending_ = std::move(sorted);
  lastResort_ = ctx.now;
}

std::vector<Order> DispatchQueue::next_batch(std::size_t capacity, double weightLimitKg) {
  std::vector<Order> batch;
  std::vector<Order> kept;
  kept.reserve(pending_.size());
  double load = 0.0;
  for (auto& o : pending_) {
    if (batch.size() < capacity && load + o.weightKg <= weightLimitKg) {
      load += o.weightKg;
      batch.push_back(o);
    } else {
      kept.push_back(o);
    }
  }
  pending_ = std::move(kept);
  return batch;
}

}  // namespace agvsb
