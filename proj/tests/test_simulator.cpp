#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "agvsb/simulator.hpp"

using namespace agvsb;

namespace {

Order make(OrderId id, Cell pickup, double arrival, double offset, PriorityClass cls = PriorityClass::D,
           double weight = 3.0) {
  Order o;
  o.id = id;
  o.pickup = pickup;
  o.arrival = arrival;
  o.deadline = arrival + offset;
  o.cls = cls;
  o.weightKg = weight;
  o.price = 200;
  return o;
}

OrderStream stream_of(std::vector<Order> orders) {
  OrderStream s;
  s.orders = std::move(orders);
  s.horizon = s.orders.back().arrival;
  return s;
}

std::set<ConstraintCode> codes(const std::vector<Violation>& v) {
  std::set<ConstraintCode> out;
  for (const auto& x : v) out.insert(x.code);
  return out;
}

void check_identities(const KpiReport& k, double beta) {
  CHECK(k.OpT == doctest::Approx(k.TrT + k.WT).epsilon(1e-12));
  CHECK(k.E == doctest::Approx(k.E1 + k.E2).epsilon(1e-12));
  CHECK(k.CoT == doctest::Approx(k.CoI + beta * k.CoD).epsilon(1e-12));
  CHECK(k.CoS == doctest::Approx(k.CoE + k.CoT).epsilon(1e-12));
  CHECK(k.serviceLevel >= 0.0);
  CHECK(k.serviceLevel <= 1.0);
}

SimConfig small_config(Rule rule, std::uint64_t seed) {
  SimConfig c;
  c.layoutScale = WarehouseScale::Small;
  c.fleetSize = 3;
  c.orderQuantity = 120;
  c.rule = rule;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("order at the station cell") {
  const auto map = GridMap::parse("S....A\n");
  SimConfig cfg;
  cfg.fleetSize = 1;
  const auto res = run(cfg, map, stream_of({make(1, map.station(), 0, 3600)}));
  CHECK(res.kpi.TrT == 0.0);
  CHECK(res.kpi.WT == 0.0);
  CHECK(res.kpi.E1 == 0.0);
  CHECK(res.kpi.E == 0.0);
  CHECK(res.trace.records.at(0).orderEnergy == 0.0);
  CHECK(validate_constraints(res.trace).empty());
}

TEST_CASE("hand trace on a straight corridor") {
  const auto map = GridMap::parse("S....A\n");
  const double d = 5.0;
  SimConfig cfg;
  cfg.fleetSize = 1;
  const double w = 4.0;
  const auto res = run(cfg, map, stream_of({make(1, {5, 0}, 0, 3600, PriorityClass::D, w)}));
  const auto& r = res.trace.records.at(0);
  CHECK(r.waitingTime == d);
  CHECK(r.travelTime == d);
  CHECK(res.kpi.makespan == 2 * d);
  CHECK(res.kpi.WT == d);
  CHECK(res.kpi.TrT == d);
  const CostParams& p = cfg.cost;
  CHECK(res.kpi.E1 == doctest::Approx(p.delta1 * w * d / 3600.0));
  CHECK(res.kpi.E2 == doctest::Approx(power_unit(p.selfWeightKg, p) * 2 * d / 3600.0));
  CHECK(res.kpi.legEnergy ==
        doctest::Approx(leg_energy(p.selfWeightKg, d, p) + leg_energy(p.selfWeightKg + w, d, p)));
  CHECK(res.kpi.RT == 2 * d);
  CHECK(res.kpi.EmT == 0.0);
  CHECK(res.kpi.CoD == 0.0);
  CHECK(res.kpi.serviceLevel == 1.0);

  // late arrival: the AGV idles at the station until the order shows up
  const auto late = run(cfg, map, stream_of({make(1, {5, 0}, 7, 3600)}));
  CHECK(late.kpi.WT == d);
  CHECK(late.kpi.makespan == 7 + 2 * d);
  CHECK(late.kpi.EmT == 7.0);
  CHECK(late.kpi.RT + late.kpi.EmT == late.kpi.SRT);
}

TEST_CASE("a late order pays its class penalty") {
  const auto map = GridMap::parse("S....A\n");
  SimConfig cfg;
  cfg.fleetSize = 1;
  cfg.cost.uihc = 0.0;
  // fixed-date order whose window closes before the AGV can reach it
  const auto res = run(cfg, map, stream_of({make(1, {5, 0}, 0, 3, PriorityClass::B)}));
  CHECK(res.kpi.CoD == doctest::Approx(cfg.delayCaps[1]));
  CHECK(res.kpi.serviceLevel == 0.0);
  CHECK(res.trace.records[0].delayTime == 2.0);
  CHECK(res.kpi.CoT == doctest::Approx(res.kpi.CoD));
}

TEST_CASE("nominal runs: identities, conservation and an empty violation list") {
  for (const Rule rule : kAllRules) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto cfg = small_config(rule, seed);
      const auto res = run(cfg);
      CAPTURE(rule_label(rule));
      CAPTURE(seed);
      check_identities(res.kpi, cfg.cost.beta);
      CHECK(res.kpi.E == doctest::Approx(res.kpi.legEnergy).epsilon(1e-9));
      CHECK(res.kpi.RT + res.kpi.EmT == doctest::Approx(res.kpi.SRT));
      CHECK(res.kpi.orders == cfg.orderQuantity);
      CHECK(res.trace.records.size() == cfg.orderQuantity);
      const auto v = validate_constraints(res.trace);
      for (const auto& x : v) MESSAGE(constraint_name(x.code) << ": " << x.detail);
      CHECK(v.empty());
      for (const auto& t : res.trace.trips) CHECK(t.orders.size() <= cfg.capacity);
    }
  }
}

TEST_CASE("identical config gives a bit-identical report and trace") {
  const auto cfg = small_config(Rule::DCSP, 17);
  const auto a = run(cfg);
  const auto b = run(cfg);
  CHECK(a.kpi.TrT == b.kpi.TrT);
  CHECK(a.kpi.WT == b.kpi.WT);
  CHECK(a.kpi.E == b.kpi.E);
  CHECK(a.kpi.CoS == b.kpi.CoS);
  CHECK(a.trace.events == b.trace.events);
  std::ostringstream ta, tb;
  write_trace(ta, a.trace.events);
  write_trace(tb, b.trace.events);
  CHECK(ta.str() == tb.str());
}

TEST_CASE("more AGVs never make the mean wait longer") {
  SimConfig cfg;
  cfg.orderQuantity = 300;
  const auto map = generate_layout(cfg.layoutScale, 5);
  const auto stream = synthesize_stream(cfg.orderQuantity, map, cfg.classMix, cfg.owt, cfg.dtw, 6);
  for (const Rule rule : kAllRules) {
    cfg.rule = rule;
    cfg.fleetSize = 3;
    const double wt3 = run(cfg, map, stream).kpi.WT;
    cfg.fleetSize = 5;
    const double wt5 = run(cfg, map, stream).kpi.WT;
    CAPTURE(rule_label(rule));
    CHECK(wt5 <= wt3);
  }
}

TEST_CASE("service level") {
  std::vector<OrderServiceRecord> r(10);
  CHECK(service_level(r) == 1.0);
  for (auto& x : r) x.delayTime = 5.0;
  CHECK(service_level(r) == 0.0);
  for (std::size_t i = 0; i < 9; ++i) r[i].delayTime = 0.0;
  CHECK(service_level(r) == doctest::Approx(0.9));
}

TEST_CASE("fault injection reports exactly the broken constraint") {
  auto cfg = small_config(Rule::PDSP, 4);
  const auto nominal = run(cfg);
  REQUIRE(validate_constraints(nominal.trace).empty());
  const auto& trips = nominal.trace.trips;
  const auto full = std::find_if(trips.begin(), trips.end(), [](const TripRecord& t) { return t.orders.size() == 4; });
  REQUIRE(full != trips.end());
  const auto tripIndex = static_cast<std::size_t>(full - trips.begin());

  SUBCASE("capacity: a fifth order in a manifest") {
    auto trace = nominal.trace;
    const auto& host = trace.trips[tripIndex];
    Order extra = trace.orders.front();
    extra.id = 100000;
    extra.arrival = 0;
    extra.deadline = extra.arrival + cfg.dtw.offsetSeconds(extra.cls);
    trace.orders.push_back(extra);
    trace.trips[tripIndex].orders.push_back(extra.id);
    CHECK(host.orders.size() == 5);
    CHECK(codes(validate_constraints(trace)) == std::set{ConstraintCode::Capacity});
  }
  SUBCASE("assignment: an order served twice") {
    auto trace = nominal.trace;
    const auto other = (tripIndex + 1) % trace.trips.size();
    trace.trips[other].orders.push_back(trace.trips[tripIndex].orders.front());
    if (trace.trips[other].orders.size() > trace.capacity) trace.trips[other].orders.erase(trace.trips[other].orders.begin());
    const auto found = codes(validate_constraints(trace));
    CHECK(found.count(ConstraintCode::Assignment) == 1);
    CHECK(found.count(ConstraintCode::Capacity) == 0);
  }
  SUBCASE("assignment: an order never served") {
    auto trace = nominal.trace;
    trace.trips[tripIndex].orders.pop_back();
    CHECK(codes(validate_constraints(trace)) == std::set{ConstraintCode::Assignment});
  }
  SUBCASE("weight: a manifest heavier than the payload limit") {
    auto trace = nominal.trace;
    const auto id = trace.trips[tripIndex].orders.front();
    for (auto& o : trace.orders)
      if (o.id == id) o.weightKg = 300.0;
    CHECK(codes(validate_constraints(trace)) == std::set{ConstraintCode::Weight});
  }
  SUBCASE("battery: budget shrunk below a measured run") {
    auto trace = nominal.trace;
    std::map<AgvId, double> used;
    for (const auto& t : trace.trips) used[t.agv] += static_cast<double>(t.endTick - t.dispatchTick);
    const double most = std::max_element(used.begin(), used.end(), [](auto& a, auto& b) {
                          return a.second < b.second;
                        })->second;
    trace.cost.batteryBudget = most / 2.0;
    CHECK(codes(validate_constraints(trace)) == std::set{ConstraintCode::Battery});
  }
  SUBCASE("flow conservation: a teleporting walk") {
    auto trace = nominal.trace;
    auto& walk = trace.trips[tripIndex].walk;
    walk[walk.size() / 2] = Cell{-5, -5};
    CHECK(codes(validate_constraints(trace)).count(ConstraintCode::FlowConservation) == 1);
  }
  SUBCASE("subtour: a stop never visited") {
    auto trace = nominal.trace;
    trace.trips[tripIndex].stops.push_back(Cell{-3, -3});
    CHECK(codes(validate_constraints(trace)) == std::set{ConstraintCode::SubtourElimination});
  }
  SUBCASE("temporal, class order, weight range and cap order") {
    auto trace = nominal.trace;
    trace.cost.wt = 1.5;
    trace.delayCaps = {0.5, 1.0, 1.0, 2.0};
    auto& first = trace.orders.front();
    first.cls = PriorityClass::A;
    first.deadline = first.arrival + 1e6;
    const auto found = codes(validate_constraints(trace));
    CHECK(found == std::set{ConstraintCode::WeightRange, ConstraintCode::CapOrder,
                            ConstraintCode::ClassDeadlineOrder});
    trace = nominal.trace;
    trace.orders.front().deadline = trace.orders.front().arrival - 1.0;
    CHECK(codes(validate_constraints(trace)).count(ConstraintCode::Temporal) == 1);
  }
}

TEST_CASE("battery budget forces recharges that keep every cycle within budget") {
  auto cfg = small_config(Rule::FCFS, 9);
  cfg.cost.batteryBudget = 600;
  const auto res = run(cfg);
  CHECK(validate_constraints(res.trace).empty());
  const auto recharges = std::count_if(res.trace.events.begin(), res.trace.events.end(),
                                       [](const TraceEvent& e) { return e.kind == EventKind::Recharge; });
  CHECK(recharges > 0);
}

TEST_CASE("collision detector") {
  const Cell st{0, 0};
  std::vector<TraceEvent> ok{{1, 1, EventKind::Move, 0, {1, 0}}, {1, 2, EventKind::Move, 0, {0, 1}},
                             {2, 1, EventKind::Move, 0, {2, 0}}, {2, 2, EventKind::Move, 0, {1, 1}}};
  CHECK(find_collisions(ok, st).empty());
  auto shared = ok;
  shared.push_back({3, 1, EventKind::Move, 0, {2, 1}});
  shared.push_back({3, 2, EventKind::Move, 0, {2, 1}});
  CHECK(find_collisions(shared, st).size() == 1);
  auto swapped = ok;
  swapped.push_back({3, 1, EventKind::Move, 0, {1, 0}});
  swapped.push_back({3, 2, EventKind::Wait, 0, {1, 1}});
  swapped.push_back({4, 1, EventKind::Move, 0, {1, 1}});
  swapped.push_back({4, 2, EventKind::Move, 0, {1, 0}});
  const auto v = find_collisions(swapped, st);
  REQUIRE(v.size() == 1);
  CHECK(v[0].code == ConstraintCode::Collision);
  // the station is a depot
  std::vector<TraceEvent> depot{{1, 1, EventKind::Move, 0, st}, {1, 2, EventKind::Move, 0, st}};
  CHECK(find_collisions(depot, st).empty());
}

TEST_CASE("trace file round trip") {
  const auto res = run(small_config(Rule::SPT, 2));
  std::ostringstream out;
  write_trace(out, res.trace.events);
  std::istringstream in(out.str());
  CHECK(read_trace(in) == res.trace.events);
  std::istringstream bad("tick,agv,event,orderId,x,y\n1,1,teleport,0,1,1\n");
  CHECK_THROWS_AS(read_trace(bad), ParseError);
  std::istringstream noHeader("1,1,move,0,1,1\n");
  CHECK_THROWS_AS(read_trace(noHeader), ParseError);
}

TEST_CASE("dead-end corridor trips the stall guard") {
  // Two AGVs meet head-on in a one-cell-wide dead end; no detour exists.
  const auto map = GridMap::parse("S....A\n");
  SimConfig cfg;
  cfg.fleetSize = 2;
  cfg.stallLimitTicks = 200;
  const auto stream = stream_of({make(1, {5, 0}, 0, 3600), make(2, {5, 0}, 3, 3600)});
  CHECK_THROWS_AS(run(cfg, map, stream), DeadlockError);
}

TEST_CASE("config and stream validation") {
  const auto map = GridMap::parse("S....A\n");
  SimConfig cfg;
  cfg.fleetSize = 0;
  CHECK_THROWS_AS(run(cfg, map, stream_of({make(1, {5, 0}, 0, 3600)})), ValidationError);
  cfg = SimConfig{};
  cfg.delayCaps = {0.5, 1.0, 1.5, 2.0};
  CHECK_THROWS_AS(run(cfg, map, stream_of({make(1, {5, 0}, 0, 3600)})), ValidationError);
  cfg = SimConfig{};
  CHECK_THROWS_AS(run(cfg, map, stream_of({make(1, {9, 9}, 0, 3600)})), ValidationError);
  CHECK_THROWS_AS(run(cfg, map, stream_of({make(1, {5, 0}, 0, 3600), make(1, {4, 0}, 1, 3600)})),
                  ValidationError);
  CHECK_THROWS_AS(run(cfg, map, stream_of({make(1, {5, 0}, 0, 3600, PriorityClass::D, 500)})), ValidationError);
  CHECK_THROWS_AS(run(cfg, map, OrderStream{}), ValidationError);
  cfg.classMix = {0.5, 0.5, 0.5, 0.0};
  CHECK_THROWS_AS(run(cfg), ValidationError);
}
