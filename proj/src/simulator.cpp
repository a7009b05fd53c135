#include "agvsb/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "agvsb/csv.hpp"

namespace agvsb {

void SimConfig::validate() const {
  if (fleetSize < 1) throw ValidationError("scenario.fleet", "fleet size must be at least 1");
  if (orderQuantity < 1) throw ValidationError("scenario.orders", "order quantity must be at least 1");
  if (capacity < 1 || capacity > kTripCapacity)
    throw ValidationError("scenario.capacity", "capacity must be 1..4");
  if (!(resortInterval > 0.0)) throw ValidationError("scenario.resort_interval", "must be positive");
  if (!(owt.lo >= 0.0) || !(owt.hi >= owt.lo))
    throw ValidationError("scenario.owt", "inter-arrival window must satisfy 0 <= lo <= hi");
  double mix = 0.0;
  for (const double p : classMix) {
    if (!(p >= 0.0)) throw ValidationError("orders.class_mix", "proportions must be non-negative");
    mix += p;
  }
  if (std::abs(mix - 1.0) > 1e-9) throw ValidationError("orders.class_mix", "proportions must sum to 1");
  cost.validate();
  try {
    profileParams().validate();
  } catch (const ValidationError& e) {
    throw ValidationError("scenario." + e.field(), e.what());
  }
}

std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::Dispatch: return "dispatch";
    case EventKind::Move: return "move";
    case EventKind::Wait: return "wait";
    case EventKind::Pickup: return "pickup";
    case EventKind::Deliver: return "deliver";
    case EventKind::Recharge: return "recharge";
    case EventKind::Replan: return "replan";
  }
  return "?";
}

EventKind parse_event(std::string_view s) {
  for (const auto k : {EventKind::Dispatch, EventKind::Move, EventKind::Wait, EventKind::Pickup,
                       EventKind::Deliver, EventKind::Recharge, EventKind::Replan})
    if (s == event_name(k)) return k;
  throw ValidationError("trace.event", "unknown event '" + std::string(s) + "'");
}

double service_level(std::span<const OrderServiceRecord> records) {
  if (records.empty()) return 1.0;
  const auto onTime = std::count_if(records.begin(), records.end(),
                                    [](const OrderServiceRecord& r) { return r.delayTime == 0.0; });
  return static_cast<double>(onTime) / static_cast<double>(records.size());
}

namespace {

struct AgvState {
  AgvId id = 0;
  Cell pos{};
  bool busy = false;
  Trip trip;
  std::vector<std::size_t> stopOrder;  // global order index per stop
  std::size_t nextWaypoint = 0;        // stops first, then the station
  std::deque<Cell> route;              // cells still to enter on this leg
  std::vector<std::size_t> onboard;
  double payload = 0.0;
  long blockedTicks = 0;
  double runningSeconds = 0.0;
  double idleSeconds = 0.0;
  double cycleRunning = 0.0;
  std::size_t cycle = 0;
  TripRecord record;

  Cell waypoint() const {
    return nextWaypoint < trip.stops.size() ? trip.stops[nextWaypoint] : trip.terminal;
  }
};

class Engine {
 public:
  Engine(const SimConfig& config, const GridMap& map, const OrderStream& stream)
      : config_(config),
        map_(map),
        orders_(stream.orders),
        profiles_(config.profileParams()),
        queue_(config.rule),
        stationDistance_(bfs_distances(map, map.station())),
        dt_(map.cellSize() / config.cost.speed) {
    for (std::size_t i = 0; i < orders_.size(); ++i) {
      const auto& o = orders_[i];
      if (!index_.emplace(o.id, i).second)
        throw ValidationError("orders", "duplicate order id " + std::to_string(o.id));
      if (!map_.passable(o.pickup) || stationDistance_[map_.index(o.pickup)] < 0)
        throw ValidationError("orders", "order " + std::to_string(o.id) + " pickup is not reachable");
      if (o.weightKg > config_.cost.payloadLimitKg)
        throw ValidationError("orders", "order " + std::to_string(o.id) + " exceeds the payload limit");
      if (i > 0 && o.arrival < orders_[i - 1].arrival)
        throw ValidationError("orders", "arrivals must be nondecreasing");
    }
    cost_ = config.cost;
    if (!cost_.uihc) {
      double value = 0.0;
      for (const auto& o : orders_) value += o.price;
      cost_.uihc = unit_inventory_holding_cost(cost_.holdingRate, value, static_cast<double>(orders_.size()));
    }
    pickupTime_.assign(orders_.size(), -1.0);
    deliveryTime_.assign(orders_.size(), -1.0);
    orderEnergy_.assign(orders_.size(), 0.0);
    for (std::size_t k = 0; k < config.fleetSize; ++k) {
      AgvState a;
      a.id = static_cast<AgvId>(k + 1);
      a.pos = map.station();
      agvs_.push_back(std::move(a));
    }
    // Seed the LDC trip-time estimate with an out-and-back to an average bay.
    double sum = 0.0;
    for (const auto& o : orders_) sum += stationDistance_[map_.index(o.pickup)];
    initialTripEstimate_ = orders_.empty() ? 0.0 : 2.0 * dt_ * sum / static_cast<double>(orders_.size());
  }

  SimResult run() {
    const std::size_t total = orders_.size();
    const double lastArrival = orders_.empty() ? 0.0 : orders_.back().arrival;
    const long tickCeiling = static_cast<long>(lastArrival / dt_) + 1000000L;
    long stall = 0;
    long t = 0;
    while (delivered_ < total) {
      const double now = static_cast<double>(t) * dt_;
      progress_ = false;
      admitAndResort(t, now);
      dispatch(t, now);
      if (delivered_ == total) break;
      const bool anyBusy = std::any_of(agvs_.begin(), agvs_.end(), [](const AgvState& a) { return a.busy; });
      step(t);
      for (auto& a : agvs_) {
        if (a.busy || a.record.endTick == t + 1) {
          a.runningSeconds += dt_;
          a.cycleRunning += dt_;
        } else {
          a.idleSeconds += dt_;
        }
      }
      ++t;
      stall = (anyBusy && !progress_) ? stall + 1 : 0;
      if (stall >= config_.stallLimitTicks)
        throw DeadlockError("no AGV moved for " + std::to_string(stall) + " ticks at t=" + std::to_string(t));
      if (t > tickCeiling) throw DeadlockError("simulation exceeded its tick ceiling");
    }
    makespanTicks_ = t;
    return finish();
  }

 private:
  void emit(long tick, AgvId agv, EventKind kind, OrderId id, Cell c) {
    if (config_.recordEvents) trace_.events.push_back({tick, agv, kind, id, c});
  }

  void admitAndResort(long t, double now) {
    bool arrived = false;
    while (nextArrival_ < orders_.size() && orders_[nextArrival_].arrival <= now) {
      queue_.admit(orders_[nextArrival_]);
      ++nextArrival_;
      arrived = true;
    }
    const long interval = std::max(1L, std::lround(config_.resortInterval / dt_));
    if (queue_.empty()) return;
    if (!arrived && t % interval != 0) return;
    SortContext ctx;
    ctx.now = now;
    ctx.map = &map_;
    ctx.stationDistance = &stationDistance_;
    ctx.profiles = &profiles_;
    ctx.resortInterval = config_.resortInterval;
    ctx.lookahead.slotsPerRound = config_.capacity * config_.fleetSize;
    ctx.lookahead.meanTripSeconds = meanTripSeconds();
    queue_.resort(ctx);
  }

  double meanTripSeconds() const {
    if (recentTrips_.empty()) return initialTripEstimate_;
    return std::accumulate(recentTrips_.begin(), recentTrips_.end(), 0.0) /
           static_cast<double>(recentTrips_.size());
  }

  void dispatch(long t, double now) {
    for (auto& a : agvs_) {
      if (a.busy || queue_.empty()) continue;
      auto batch = queue_.next_batch(config_.capacity, config_.cost.payloadLimitKg);
      if (batch.empty()) continue;
      std::vector<Cell> cells;
      for (const auto& o : batch) cells.push_back(o.pickup);
      a.trip = order_stops(map_, cells, map_.station(), a.id);
      a.stopOrder.clear();
      for (const auto bi : a.trip.visitOrder) a.stopOrder.push_back(index_.at(batch[bi].id));

      const double estimate = 2.0 * a.trip.length() / config_.cost.speed + config_.batteryMargin;
      if (a.cycleRunning > 0.0 && a.cycleRunning + estimate > config_.cost.batteryBudget) {
        ++a.cycle;
        a.cycleRunning = 0.0;
        emit(t, a.id, EventKind::Recharge, 0, a.pos);
      }

      a.busy = true;
      a.nextWaypoint = 0;
      a.blockedTicks = 0;
      a.payload = 0.0;
      a.onboard.clear();
      a.record = TripRecord{};
      a.record.agv = a.id;
      a.record.dispatchTick = t;
      a.record.batteryCycle = a.cycle;
      a.record.stops = a.trip.stops;
      a.record.walk = {a.pos};
      for (const auto gi : a.stopOrder) {
        a.record.orders.push_back(orders_[gi].id);
        a.record.payloadKg += orders_[gi].weightKg;
        emit(t, a.id, EventKind::Dispatch, orders_[gi].id, a.pos);
      }
      loadLeg(a, 0);
      arrive(a, t, now);
    }
  }

  void loadLeg(AgvState& a, std::size_t leg) {
    const auto& cells = a.trip.legs[leg].cells;
    a.route.assign(cells.begin() + 1, cells.end());
  }

  // Handles every waypoint reached at the current position.
  void arrive(AgvState& a, long tick, double now) {
    while (a.busy && a.route.empty()) {
      if (a.nextWaypoint < a.trip.stops.size()) {
        const auto gi = a.stopOrder[a.nextWaypoint];
        pickupTime_[gi] = now;
        a.onboard.push_back(gi);
        a.payload += orders_[gi].weightKg;
        emit(tick, a.id, EventKind::Pickup, orders_[gi].id, a.pos);
        ++a.nextWaypoint;
        loadLeg(a, a.nextWaypoint);
      } else {
        for (const auto gi : a.onboard) {
          deliveryTime_[gi] = now;
          emit(tick, a.id, EventKind::Deliver, orders_[gi].id, a.pos);
          ++delivered_;
        }
        a.onboard.clear();
        a.payload = 0.0;
        a.busy = false;
        a.record.endTick = tick;
        const double duration = static_cast<double>(tick - a.record.dispatchTick) * dt_;
        recentTrips_.push_back(duration);
        if (recentTrips_.size() > 20) recentTrips_.pop_front();
        trace_.trips.push_back(std::move(a.record));
        a.record = TripRecord{};
        a.record.endTick = tick;
      }
      progress_ = true;
    }
  }

  void step(long t) {
    const std::size_t k = agvs_.size();
    std::vector<bool> wants(k, false), proceed(k, false);
    for (std::size_t i = 0; i < k; ++i) wants[i] = proceed[i] = agvs_[i].busy && !agvs_[i].route.empty();

    std::vector<MoveRequest> requests;
    std::vector<std::size_t> who;
    for (std::size_t i = 0; i < k; ++i) {
      if (!agvs_[i].busy) continue;
      MoveRequest req{agvs_[i].id, agvs_[i].pos, std::nullopt};
      if (wants[i]) req.next = agvs_[i].route.front();
      requests.push_back(req);
      who.push_back(i);
    }
    const auto decisions = resolve_moves(requests, t, map_.station());
    for (std::size_t r = 0; r < who.size(); ++r) proceed[who[r]] = decisions[r] == StepDecision::Proceed;

    const double now = static_cast<double>(t + 1) * dt_;
    for (std::size_t i = 0; i < k; ++i) {
      auto& a = agvs_[i];
      if (!a.busy) continue;
      if (proceed[i]) {
        move(a, t);
        arrive(a, t + 1, now);
      } else if (wants[i]) {
        ++a.blockedTicks;
        a.record.walk.push_back(a.pos);
        emit(t + 1, a.id, EventKind::Wait, 0, a.pos);
      }
    }

    // Head-on pairs: the higher serial detours around the lower one.
    for (std::size_t i = 0; i < k; ++i) {
      auto& a = agvs_[i];
      if (!wants[i] || proceed[i] || !a.busy || a.route.empty()) continue;
      for (std::size_t j = 0; j < i; ++j) {
        const auto& b = agvs_[j];
        if (!b.busy || b.route.empty() || proceed[j]) continue;
        if (b.pos == a.route.front() && b.route.front() == a.pos) {
          replan(a, t + 1);
          break;
        }
      }
      if (a.blockedTicks > config_.replanAfterTicks) replan(a, t + 1);
    }
  }

  void move(AgvState& a, long t) {
    const Cell next = a.route.front();
    a.route.pop_front();
    const double distance = map_.cellSize();
    const auto& p = config_.cost;
    const double hours = distance / p.speed / 3600.0;
    for (const auto gi : a.onboard) orderEnergy_[gi] += p.delta1 * orders_[gi].weightKg * hours;
    vehicleEnergy_ += power_unit(p.selfWeightKg, p) * hours;
    legEnergy_ += leg_energy(p.selfWeightKg + a.payload, distance, p);
    a.pos = next;
    a.blockedTicks = 0;
    a.record.walk.push_back(next);
    progress_ = true;
    emit(t + 1, a.id, EventKind::Move, 0, next);
  }

  void replan(AgvState& a, long tick) {
    std::vector<bool> blocked(map_.cellCount(), false);
    for (const auto& other : agvs_)
      if (other.id != a.id && other.busy && other.pos != map_.station()) blocked[map_.index(other.pos)] = true;
    SearchOptions options;
    options.blocked = &blocked;
    try {
      const auto path = astar(map_, a.pos, a.waypoint(), options);
      a.route.assign(path.cells.begin() + 1, path.cells.end());
      emit(tick, a.id, EventKind::Replan, 0, a.pos);
    } catch (const NoPathError&) {
      // Fully boxed in; keep the current plan and wait.
    }
    a.blockedTicks = 0;
  }

  SimResult finish() {
    SimResult result;
    auto& kpi = result.kpi;
    auto& records = trace_.records;
    records.reserve(orders_.size());
    double sumTravel = 0.0, sumWait = 0.0;
    for (std::size_t i = 0; i < orders_.size(); ++i) {
      const auto& o = orders_[i];
      OrderServiceRecord r;
      r.orderId = o.id;
      r.waitingTime = waiting_time(pickupTime_[i], o.arrival);
      r.travelTime = deliveryTime_[i] - pickupTime_[i];
      r.delayTime = delay_time(r.waitingTime, o.deadlineOffset());
      r.orderEnergy = orderEnergy_[i];
      r.inventoryCost = inventory_cost(r.waitingTime, cost_);
      r.delayCost = delay_cost(profiles_.forOrder(o), r.waitingTime);
      sumTravel += r.travelTime;
      sumWait += r.waitingTime;
      kpi.E1 += r.orderEnergy;
      kpi.CoI += r.inventoryCost;
      kpi.CoD += r.delayCost;
      records.push_back(r);
    }
    const double n = static_cast<double>(orders_.size());
    kpi.orders = orders_.size();
    kpi.TrT = sumTravel / n;
    kpi.WT = sumWait / n;
    kpi.OpT = kpi.TrT + kpi.WT;
    kpi.E2 = vehicleEnergy_;
    kpi.E = kpi.E1 + kpi.E2;
    kpi.legEnergy = legEnergy_;
    kpi.CoE = energy_cost(kpi.E, cost_);
    kpi.CoT = time_cost(records, cost_);
    kpi.CoS = reported_system_cost(kpi.CoE, kpi.CoT);
    kpi.objective = system_objective(kpi.CoE, kpi.CoT, cost_.wt);
    for (const auto& a : agvs_) {
      kpi.EmT += a.idleSeconds;
      kpi.RT += a.runningSeconds;
    }
    kpi.makespan = static_cast<double>(makespanTicks_) * dt_;
    kpi.SRT = static_cast<double>(agvs_.size()) * kpi.makespan;
    kpi.serviceLevel = service_level(records);

    trace_.station = map_.station();
    trace_.fleetSize = agvs_.size();
    trace_.capacity = config_.capacity;
    trace_.tickSeconds = dt_;
    trace_.cost = cost_;
    trace_.delayCaps = config_.delayCaps;
    trace_.orders = orders_;
    result.trace = std::move(trace_);
    return result;
  }

  const SimConfig& config_;
  const GridMap& map_;
  const std::vector<Order>& orders_;
  ProfileSet profiles_;
  DispatchQueue queue_;
  std::vector<int> stationDistance_;
  double dt_;
  CostParams cost_;
  std::unordered_map<OrderId, std::size_t> index_;
  std::vector<AgvState> agvs_;
  std::vector<double> pickupTime_, deliveryTime_, orderEnergy_;
  double vehicleEnergy_ = 0.0;
  double legEnergy_ = 0.0;
  std::size_t nextArrival_ = 0;
  std::size_t delivered_ = 0;
  std::deque<double> recentTrips_;
  double initialTripEstimate_ = 0.0;
  bool progress_ = false;
  long makespanTicks_ = 0;
  SimTrace trace_;
};

}  // namespace

SimResult run(const SimConfig& config, const GridMap& map, const OrderStream& stream) {
  config.validate();
  if (stream.orders.empty()) throw ValidationError("orders", "stream is empty");
  Engine engine(config, map, stream);
  return engine.run();
}

SimResult run(const SimConfig& config) {
  config.validate();
  const auto map = generate_layout(config.layoutScale, mix_seed(config.seed, 1), config.layout);
  const auto stream = synthesize_stream(config.orderQuantity, map, config.classMix, config.owt, config.dtw,
                                        mix_seed(config.seed, 2));
  return run(config, map, stream);
}

std::string_view constraint_name(ConstraintCode c) {
  switch (c) {
    case ConstraintCode::FlowConservation: return "flow-conservation";
    case ConstraintCode::Assignment: return "assignment";
    case ConstraintCode::SubtourElimination: return "subtour-elimination";
    case ConstraintCode::Capacity: return "capacity";
    case ConstraintCode::Weight: return "weight";
    case ConstraintCode::Battery: return "battery";
    case ConstraintCode::Temporal: return "temporal";
    case ConstraintCode::ClassDeadlineOrder: return "class-deadline-order";
    case ConstraintCode::WeightRange: return "weight-range";
    case ConstraintCode::CapOrder: return "cap-order";
    case ConstraintCode::Collision: return "collision";
  }
  return "?";
}

std::vector<Violation> validate_constraints(const SimTrace& trace) {
  std::vector<Violation> out;
  auto report = [&](ConstraintCode code, std::string detail) { out.push_back({code, std::move(detail)}); };

  std::unordered_map<OrderId, const Order*> byId;
  for (const auto& o : trace.orders) byId.emplace(o.id, &o);
  std::unordered_map<OrderId, int> served;
  std::map<std::pair<AgvId, std::size_t>, double> cycleUse;

  for (std::size_t ti = 0; ti < trace.trips.size(); ++ti) {
    const auto& trip = trace.trips[ti];
    const std::string tag = "trip " + std::to_string(ti) + " (agv " + std::to_string(trip.agv) + ")";

    // The walk must be one closed, connected loop through the station.
    const auto& walk = trip.walk;
    if (walk.empty() || walk.front() != trace.station || walk.back() != trace.station)
      report(ConstraintCode::FlowConservation, tag + " does not start and end at the station");
    for (std::size_t i = 1; i < walk.size(); ++i)
      if (walk[i] != walk[i - 1] && !adjacent4(walk[i], walk[i - 1]))
        report(ConstraintCode::FlowConservation, tag + " jumps between non-adjacent cells");
    if (static_cast<long>(walk.size()) - 1 != trip.endTick - trip.dispatchTick)
      report(ConstraintCode::FlowConservation, tag + " walk length disagrees with its duration");
    std::size_t cursor = 0;
    for (const Cell stop : trip.stops) {
      while (cursor < walk.size() && walk[cursor] != stop) ++cursor;
      if (cursor == walk.size()) {
        report(ConstraintCode::SubtourElimination, tag + " skips a stop of its loop");
        break;
      }
    }

    if (trip.orders.size() > trace.capacity)
      report(ConstraintCode::Capacity, tag + " carries " + std::to_string(trip.orders.size()) + " orders");

    double load = 0.0;
    for (const auto id : trip.orders) {
      ++served[id];
      const auto it = byId.find(id);
      if (it == byId.end()) {
        report(ConstraintCode::Assignment, tag + " carries unknown order " + std::to_string(id));
        continue;
      }
      load += it->second->weightKg;
      if (static_cast<double>(trip.dispatchTick) * trace.tickSeconds < it->second->arrival)
        report(ConstraintCode::Temporal, tag + " dispatched order " + std::to_string(id) + " before it arrived");
    }
    if (load > trace.cost.payloadLimitKg + 1e-9)
      report(ConstraintCode::Weight, tag + " load " + csv::shortest(load) + " kg exceeds the limit");

    cycleUse[{trip.agv, trip.batteryCycle}] +=
        static_cast<double>(trip.endTick - trip.dispatchTick) * trace.tickSeconds;
  }

  for (const auto& o : trace.orders) {
    const auto it = served.find(o.id);
    const int count = it == served.end() ? 0 : it->second;
    if (count != 1)
      report(ConstraintCode::Assignment,
             "order " + std::to_string(o.id) + " served " + std::to_string(count) + " times");
    if (o.deadline < o.arrival)
      report(ConstraintCode::Temporal, "order " + std::to_string(o.id) + " deadline precedes arrival");
  }

  for (const auto& [key, used] : cycleUse)
    if (used > trace.cost.batteryBudget)
      report(ConstraintCode::Battery, "agv " + std::to_string(key.first) + " ran " + csv::shortest(used) +
                                          " s on one charge");

  double maxA = -1.0, minOther = std::numeric_limits<double>::infinity();
  for (const auto& o : trace.orders) {
    if (o.cls == PriorityClass::A) maxA = std::max(maxA, o.deadlineOffset());
    else minOther = std::min(minOther, o.deadlineOffset());
  }
  if (maxA > minOther + 1e-9)
    report(ConstraintCode::ClassDeadlineOrder, "a class-A deadline window exceeds a lower class window");

  if (!(trace.cost.wt >= 0.0 && trace.cost.wt <= 1.0))
    report(ConstraintCode::WeightRange, "w_t outside [0, 1]");
  for (std::size_t i = 1; i < kClassCount; ++i)
    if (trace.delayCaps[i - 1] < trace.delayCaps[i])
      report(ConstraintCode::CapOrder, "delay caps are not ordered A >= B >= C >= D");

  for (auto& v : find_collisions(trace.events, trace.station)) out.push_back(std::move(v));
  return out;
}

std::vector<Violation> find_collisions(std::span<const TraceEvent> events, Cell station) {
  std::vector<Violation> out;
  std::map<AgvId, Cell> position;
  std::size_t i = 0;
  while (i < events.size()) {
    const long tick = events[i].tick;
    std::map<AgvId, Cell> moved;
    for (; i < events.size() && events[i].tick == tick; ++i) {
      const auto& e = events[i];
      if (e.kind == EventKind::Move || e.kind == EventKind::Wait) moved[e.agv] = e.cell;
    }
    std::map<Cell, AgvId> occupied;
    for (const auto& [agv, cell] : moved) {
      if (cell == station) continue;
      const auto [it, fresh] = occupied.emplace(cell, agv);
      if (!fresh)
        out.push_back({ConstraintCode::Collision, "agvs " + std::to_string(it->second) + " and " +
                                                      std::to_string(agv) + " share a cell at tick " +
                                                      std::to_string(tick)});
    }
    for (auto a = moved.begin(); a != moved.end(); ++a) {
      for (auto b = std::next(a); b != moved.end(); ++b) {
        const Cell pa = position.count(a->first) ? position[a->first] : station;
        const Cell pb = position.count(b->first) ? position[b->first] : station;
        if (pa == a->second || pa == station || pb == station) continue;
        if (pa == b->second && pb == a->second)
          out.push_back({ConstraintCode::Collision, "agvs " + std::to_string(a->first) + " and " +
                                                        std::to_string(b->first) + " swap cells at tick " +
                                                        std::to_string(tick)});
      }
    }
    for (const auto& [agv, cell] : moved) position[agv] = cell;
  }
  return out;
}

void write_trace(std::ostream& out, std::span<const TraceEvent> events) {
  out << "tick,agv,event,orderId,x,y\n";
  for (const auto& e : events)
    out << e.tick << ',' << e.agv << ',' << event_name(e.kind) << ',' << e.orderId << ',' << e.cell.x << ','
        << e.cell.y << '\n';
}

std::vector<TraceEvent> read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::normalize_key(line) != "tickagveventorderidxy")
    throw ParseError(1, "expected header tick,agv,event,orderId,x,y");
  std::vector<TraceEvent> events;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 6) throw ParseError(row, "expected 6 fields");
    const auto tick = csv::parse_int(f[0]);
    const auto agv = csv::parse_int(f[1]);
    const auto id = csv::parse_int(f[3]);
    const auto x = csv::parse_int(f[4]);
    const auto y = csv::parse_int(f[5]);
    if (!tick || !agv || !id || !x || !y) throw ParseError(row, "malformed numeric field");
    TraceEvent e;
    e.tick = static_cast<long>(*tick);
    e.agv = static_cast<AgvId>(*agv);
    try {
      e.kind = parse_event(csv::trim(f[2]));
    } catch (const ValidationError& err) {
      throw ParseError(row, err.what());
    }
    e.orderId = static_cast<OrderId>(*id);
    e.cell = {static_cast<int>(*x), static_cast<int>(*y)};
    if (!events.empty() && e.tick < events.back().tick) throw ParseError(row, "ticks must be nondecreasing");
    events.push_back(e);
  }
  return events;
}

}  // namespace agvsb
