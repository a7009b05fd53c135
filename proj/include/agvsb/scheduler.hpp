#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "agvsb/orders.hpp"
#include "agvsb/routing.hpp"

namespace agvsb {

enum class Rule { FCFS, SPT, EDT, LDC, PDSP, DCSP };
inline constexpr std::array<Rule, 6> kAllRules{Rule::FCFS, Rule::SPT, Rule::EDT,
                                               Rule::LDC,  Rule::PDSP, Rule::DCSP};

std::string_view rule_name(Rule r);  // lower case, as used in config files
std::string_view rule_label(Rule r);  // upper case, as used in reports
Rule parse_rule(std::string_view s);

/// Lookahead used by LDC: the order with arrival rank p among the pending set
/// is expected to start service after floor(p / slotsPerRound) rounds of
/// meanTripSeconds each.
struct LdcLookahead {
  double meanTripSeconds = 0.0;
  std::size_t slotsPerRound = kTripCapacity;
};

/// Position of each pending order when ranked by (arrival, id).
std::vector<std::size_t> arrival_ranks(std::span<const Order> pending);

std::vector<OrderId> sort_fcfs(std::span<const Order> pending);
/// Distance key is the shortest-path distance from the station, given as a
/// per-cell table (see bfs_distances).
std::vector<OrderId> sort_spt(std::span<const Order> pending, const GridMap& map,
                              const std::vector<int>& stationDistance);
std::vector<OrderId> sort_spt(std::span<const Order> pending, const GridMap& map);
std::vector<OrderId> sort_edt(std::span<const Order> pending);
std::vector<OrderId> sort_ldc(std::span<const Order> pending, double now, const ProfileSet& profiles,
                              const LdcLookahead& lookahead);
std::vector<OrderId> sort_pdsp(std::span<const Order> pending);
std::vector<OrderId> sort_dcsp(std::span<const Order> pending, double now, const ProfileSet& profiles,
                               double resortInterval);

/// Delay cost the order would carry if service started at now + latency.
double projected_delay_cost(const Order& o, double now, double latency, const ProfileSet& profiles);
/// Accrued delay cost at `now` plus its slope over the next interval.
double dcsp_score(const Order& o, double now, const ProfileSet& profiles, double interval);

struct SortContext {
  double now = 0.0;
  const GridMap* map = nullptr;
  const std::vector<int>* stationDistance = nullptr;
  const ProfileSet* profiles = nullptr;
  LdcLookahead lookahead;
  double resortInterval = 10.0;
};

/// Arrived, unassigned orders kept in rule order.
class DispatchQueue {
 public:
  explicit DispatchQueue(Rule rule) : rule_(rule) {}

  Rule rule() const noexcept { return rule_; }
  const std::vector<Order>& pending() const noexcept { return pending_; }
  std::vector<OrderId> ids() const;
  bool empty() const noexcept { return pending_.empty(); }
  std::size_t size() const noexcept { return pending_.size(); }
  double lastResortTick() const noexcept { return lastResort_; }

  /// Appends at the back; call resort() to restore rule order.
  void admit(const Order& o) { pending_.push_back(o); }
  void resort(const SortContext& ctx);

  /// Removes and returns up to `capacity` orders from the front whose
  /// cumulative weight stays within `weightLimitKg`. Orders that would breach
  /// the limit are skipped and keep their place.
  std::vector<Order> next_batch(std::size_t capacity, double weightLimitKg);

 private:
  Rule rule_;
  std::vector<Order> pending_;
  double lastResort_ = 0.0;
};

}  // namespace agvsb
