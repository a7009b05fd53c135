#include "agvsb/agdqn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "agvsb/csv.hpp"

namespace agvsb {

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Up: return "up";
    case Action::Down: return "down";
    case Action::Left: return "left";
    case Action::Right: return "right";
    case Action::Stay: return "stay";
  }
  return "?";
}

Cell apply_action(Cell c, Action a) {
  switch (a) {
    case Action::Up: return {c.x, c.y + 1};
    case Action::Down: return {c.x, c.y - 1};
    case Action::Left: return {c.x - 1, c.y};
    case Action::Right: return {c.x + 1, c.y};
    case Action::Stay: return c;
  }
  return c;
}

Action action_toward(Cell from, Cell to) {
  for (const Action a : kAllActions)
    if (a != Action::Stay && apply_action(from, a) == to) return a;
  return Action::Stay;
}

// ---------------------------------------------------------------- network

QNetwork::QNetwork(std::size_t inputs, std::size_t hidden, Rng& rng) : inputs_(inputs), hidden_(hidden) {
  params_.assign(b2() + kActionCount, 0.0);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(inputs));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t i = w1(); i < b1(); ++i) params_[i] = uniform_real(rng, -a1, a1);
  for (std::size_t i = w2(); i < b2(); ++i) params_[i] = uniform_real(rng, -a2, a2);
}

QNetwork::QNetwork(std::size_t inputs, std::size_t hidden, std::vector<double> params)
    : inputs_(inputs), hidden_(hidden), params_(std::move(params)) {
  if (params_.size() != b2() + kActionCount)
    throw ValidationError("qnetwork", "parameter count does not match the layer sizes");
}

void QNetwork::hiddenLayer(std::span<const double> x, std::vector<double>& h) const {
  h.assign(params_.begin() + static_cast<std::ptrdiff_t>(b1()),
           params_.begin() + static_cast<std::ptrdiff_t>(w2()));
  // State vectors are mostly zeros (binary planes), so skip them.
  for (std::size_t j = 0; j < inputs_; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const double* row = params_.data() + w1() + j * hidden_;
    for (std::size_t k = 0; k < hidden_; ++k) h[k] += xj * row[k];
  }
}

QValues QNetwork::forward(std::span<const double> x) const {
  if (x.size() != inputs_) throw ValidationError("qnetwork", "state size mismatch");
  std::vector<double> h;
  hiddenLayer(x, h);
  QValues q{};
  for (std::size_t a = 0; a < kActionCount; ++a) q[a] = params_[b2() + a];
  for (std::size_t k = 0; k < hidden_; ++k) {
    const double hk = std::max(0.0, h[k]);
    if (hk == 0.0) continue;
    const double* row = params_.data() + w2() + k * kActionCount;
    for (std::size_t a = 0; a < kActionCount; ++a) q[a] += hk * row[a];
  }
  return q;
}

double QNetwork::loss(std::span<const TdSample> batch) const {
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : batch) {
    const double e = forward(*s.state)[s.action] - s.target;
    sum += e * e;
  }
  return sum / static_cast<double>(batch.size());
}

double QNetwork::gradient(std::span<const TdSample> batch, std::vector<double>& grad) const {
  grad.assign(params_.size(), 0.0);
  if (batch.empty()) return 0.0;
  const double scale = 2.0 / static_cast<double>(batch.size());
  double sum = 0.0;
  std::vector<double> pre, dh(hidden_);
  for (const auto& s : batch) {
    const auto& x = *s.state;
    if (x.size() != inputs_) throw ValidationError("qnetwork", "state size mismatch");
    hiddenLayer(x, pre);
    const std::size_t a = s.action;
    double q = params_[b2() + a];
    for (std::size_t k = 0; k < hidden_; ++k) q += std::max(0.0, pre[k]) * params_[w2() + k * kActionCount + a];
    const double err = q - s.target;
    sum += err * err;
    const double dq = scale * err;

    grad[b2() + a] += dq;
    for (std::size_t k = 0; k < hidden_; ++k) {
      if (pre[k] <= 0.0) {
        dh[k] = 0.0;
        continue;
      }
      grad[w2() + k * kActionCount + a] += pre[k] * dq;
      dh[k] = params_[w2() + k * kActionCount + a] * dq;
      grad[b1() + k] += dh[k];
    }
    for (std::size_t j = 0; j < inputs_; ++j) {
      const double xj = x[j];
      if (xj == 0.0) continue;
      double* row = grad.data() + w1() + j * hidden_;
      for (std::size_t k = 0; k < hidden_; ++k) row[k] += xj * dh[k];
    }
  }
  return sum / static_cast<double>(batch.size());
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

double td_target(double reward, const QValues& nextQ, bool done, double gamma) {
  if (done) return reward;
  return reward + gamma * *std::max_element(nextQ.begin(), nextQ.end());
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("dqn.buffer", "capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (n > data_.size()) throw ValidationError("dqn.batch", "batch larger than the buffer");
  // Floyd's algorithm: n distinct indices without materialising the range.
  std::vector<std::size_t> out;
  out.reserve(n);
  const std::size_t m = data_.size();
  for (std::size_t j = m - n; j < m; ++j) {
    const auto t = static_cast<std::size_t>(uniform_index(rng, j + 1));
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    else out.push_back(j);
  }
  return out;
}

// ---------------------------------------------------------------- state

std::size_t state_size(const GridMap& map, std::size_t agents) {
  return 43 + 4 * (agents > 0 ? agents - 1 : 0) + 4 * map.cellCount();
}

Cell current_target(const AgentView& agent, Cell station) {
  for (const auto& g : agent.goals)
    if (!g.visited) return g.cell;
  return station;
}

namespace {
double sign(int v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }
}  // namespace

std::vector<double> encode_state(const EnvSnapshot& snap, std::size_t agent) {
  const GridMap& map = *snap.map;
  const auto& me = snap.agents.at(agent);
  const double sx = map.width() > 1 ? 1.0 / (map.width() - 1) : 1.0;
  const double sy = map.height() > 1 ? 1.0 / (map.height() - 1) : 1.0;
  std::vector<double> v(state_size(map, snap.agents.size()), 0.0);

  v[0] = me.pos.x * sx;
  v[1] = me.pos.y * sy;
  v[2] = me.heading.x;
  v[3] = me.heading.y;

  auto occupiedByOther = [&](Cell c) {
    for (std::size_t k = 0; k < snap.agents.size(); ++k)
      if (k != agent && snap.agents[k].pos == c && c != map.station()) return true;
    return false;
  };
  for (std::size_t d = 0; d < 4; ++d) {
    const Cell n = apply_action(me.pos, kAllActions[d]);
    v[4 + d] = (!map.passable(n) || occupiedByOther(n)) ? 1.0 : 0.0;
  }

  const Cell target = current_target(me, map.station());
  v[8] = (target.x - me.pos.x) * sx;
  v[9] = (target.y - me.pos.y) * sy;
  v[10] = sign(target.x - me.pos.x);
  v[11] = sign(target.y - me.pos.y);

  for (std::size_t s = 0; s < 4; ++s) {
    if (s < me.goals.size()) {
      const auto& g = me.goals[s];
      v[12 + 3 * s] = (g.cell.x - me.pos.x) * sx;
      v[13 + 3 * s] = (g.cell.y - me.pos.y) * sy;
      v[14 + 3 * s] = 1.0;
      v[27 + 3 * s] = static_cast<double>(g.cls) / 3.0;
      v[28 + 3 * s] = g.slack;
      v[29 + 3 * s] = g.cost;
    }
    v[39 + s] = (s >= me.goals.size() || me.goals[s].visited) ? 1.0 : 0.0;
  }
  v[24] = (map.station().x - me.pos.x) * sx;
  v[25] = (map.station().y - me.pos.y) * sy;
  v[26] = 1.0;

  std::size_t off = 43;
  for (std::size_t k = 0; k < snap.agents.size(); ++k) {
    if (k == agent) continue;
    const auto& o = snap.agents[k];
    v[off++] = (o.pos.x - me.pos.x) * sx;
    v[off++] = (o.pos.y - me.pos.y) * sy;
    v[off++] = o.heading.x;
    v[off++] = o.heading.y;
  }

  const std::size_t cells = map.cellCount();
  double* obstacles = v.data() + off;
  double* pending = obstacles + cells;
  double* own = pending + cells;
  double* others = own + cells;
  for (std::size_t i = 0; i < cells; ++i)
    if (map.kind(map.cellAt(i)) == CellKind::Obstacle) obstacles[i] = 1.0;
  for (const Cell c : snap.pendingPickups) pending[map.index(c)] = 1.0;
  own[map.index(me.pos)] = 1.0;
  for (std::size_t k = 0; k < snap.agents.size(); ++k)
    if (k != agent) others[map.index(snap.agents[k].pos)] = 1.0;
  return v;
}

Action greedy_action(const QValues& q) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < kActionCount; ++a)
    if (q[a] > q[best]) best = a;
  return kAllActions[best];
}

Action select_action(const QValues& q, double epsilon, double xi, Action hint, const ActionMask& valid,
                     Rng& rng) {
  if (uniform01(rng) < xi) return hint;
  if (uniform01(rng) < epsilon) {
    std::vector<Action> options;
    for (std::size_t a = 0; a < kActionCount; ++a)
      if (valid[a]) options.push_back(kAllActions[a]);
    if (options.empty()) return Action::Stay;
    return options[uniform_index(rng, options.size())];
  }
  return greedy_action(q);
}

// ---------------------------------------------------------------- scenarios

Scenario single_goal_scenario() {
  Scenario s;
  s.map = GridMap::parse(
      "..A..\n"
      ".....\n"
      ".###.\n"
      ".....\n"
      "..S..\n");
  Order o;
  o.id = 1;
  o.pickup = {2, 4};
  o.arrival = 0.0;
  o.cls = PriorityClass::D;
  o.deadline = s.profiles.dtw.offsetSeconds(o.cls);
  o.weightKg = 5.0;
  o.price = 200.0;
  s.orders = {o};
  s.agents = 1;
  s.maxSteps = 100;
  return s;
}

Scenario small_warehouse_scenario(std::uint64_t seed) {
  Scenario s;
  s.map = generate_layout(WarehouseScale::Small, mix_seed(seed, 1));
  s.orders = synthesize_stream(20, s.map, kDefaultClassMix, {0.0, 5.0}, s.profiles.dtw, mix_seed(seed, 2)).orders;
  s.agents = 2;
  s.maxSteps = 1500;
  return s;
}

// ---------------------------------------------------------------- environment

GridEnv::GridEnv(const Scenario& scenario, RewardConfig rewards)
    : scenario_(scenario),
      rewards_(rewards),
      profiles_(scenario.profiles),
      stationDistance_(bfs_distances(scenario.map, scenario.map.station())),
      queue_(scenario.rule) {
  if (scenario_.agents < 1) throw ValidationError("scenario.agents", "need at least one AGV");
  for (std::size_t i = 1; i < scenario_.orders.size(); ++i)
    if (scenario_.orders[i].arrival < scenario_.orders[i - 1].arrival)
      throw ValidationError("orders", "arrivals must be nondecreasing");
  for (const auto& o : scenario_.orders)
    if (stationDistance_[scenario_.map.index(o.pickup)] < 0)
      throw ValidationError("orders", "order " + std::to_string(o.id) + " pickup is not reachable");
  reset();
}

void GridEnv::reset() {
  agents_.assign(scenario_.agents, AgentView{});
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agents_[i].id = static_cast<AgvId>(i + 1);
    agents_[i].pos = scenario_.map.station();
  }
  payload_.assign(agents_.size(), 0.0);
  queue_ = DispatchQueue(scenario_.rule);
  nextArrival_ = 0;
  delivered_ = 0;
  tick_ = 0;
  pickups_.clear();
  events_.clear();
  admitAndDispatch();
}

void GridEnv::admitAndDispatch() {
  const double now = static_cast<double>(tick_);
  bool arrived = false;
  while (nextArrival_ < scenario_.orders.size() && scenario_.orders[nextArrival_].arrival <= now) {
    queue_.admit(scenario_.orders[nextArrival_++]);
    arrived = true;
  }
  if (queue_.empty()) return;
  if (arrived) {
    SortContext ctx;
    ctx.now = now;
    ctx.map = &scenario_.map;
    ctx.stationDistance = &stationDistance_;
    ctx.profiles = &profiles_;
    ctx.lookahead.slotsPerRound = kTripCapacity * agents_.size();
    queue_.resort(ctx);
  }
  for (auto& a : agents_) {
    if (a.active || a.pos != scenario_.map.station() || queue_.empty()) continue;
    const auto batch = queue_.next_batch(kTripCapacity, scenario_.cost.payloadLimitKg);
    if (batch.empty()) continue;
    std::vector<Cell> cells;
    for (const auto& o : batch) cells.push_back(o.pickup);
    const auto trip = order_stops(scenario_.map, cells, scenario_.map.station(), a.id);
    a.goals.clear();
    for (const auto bi : trip.visitOrder) {
      const auto& o = batch[bi];
      SubGoal g;
      g.cell = o.pickup;
      g.order = o.id;
      g.cls = o.cls;
      a.goals.push_back(g);
    }
    a.active = true;
    a.heading = {};
    for (const auto& g : a.goals) events_.push_back({tick_, a.id, EventKind::Dispatch, g.order, a.pos});
  }
}

EnvSnapshot GridEnv::snapshot() const {
  EnvSnapshot snap;
  snap.map = &scenario_.map;
  snap.agents = agents_;
  const double now = static_cast<double>(tick_);
  std::vector<const Order*> byId;
  for (auto& a : snap.agents) {
    for (auto& g : a.goals) {
      const auto it = std::find_if(scenario_.orders.begin(), scenario_.orders.end(),
                                   [&](const Order& o) { return o.id == g.order; });
      const auto profile = profiles_.forOrder(*it);
      const double window = std::max(1.0, it->deadlineOffset());
      g.slack = std::clamp((it->deadline - now) / window, 0.0, 1.0);
      g.cost = profile.cap > 0.0 ? delay_cost(profile, waiting_time(now, it->arrival)) / profile.cap : 0.0;
      if (!g.visited) snap.pendingPickups.push_back(g.cell);
    }
  }
  for (const auto& o : queue_.pending()) snap.pendingPickups.push_back(o.pickup);
  return snap;
}

Cell GridEnv::hint(std::size_t i, bool avoidOthers) const {
  const auto& a = agents_[i];
  const Cell target = current_target(a, scenario_.map.station());
  if (a.pos == target) return a.pos;
  if (avoidOthers) {
    std::vector<bool> blocked(scenario_.map.cellCount(), false);
    for (std::size_t k = 0; k < agents_.size(); ++k)
      if (k != i && agents_[k].pos != scenario_.map.station()) blocked[scenario_.map.index(agents_[k].pos)] = true;
    SearchOptions options;
    options.blocked = &blocked;
    try {
      return astar(scenario_.map, a.pos, target, options).cells.at(1);
    } catch (const NoPathError&) {
    }
  }
  return astar(scenario_.map, a.pos, target).cells.at(1);
}

ActionMask GridEnv::validActions(std::size_t i) const {
  ActionMask mask{};
  for (std::size_t k = 0; k < kActionCount; ++k)
    mask[k] = scenario_.map.passable(apply_action(agents_[i].pos, kAllActions[k]));
  return mask;
}

GridEnv::StepResult GridEnv::step(std::span<const Action> actions) {
  const std::size_t k = agents_.size();
  if (actions.size() != k) throw ValidationError("env.actions", "one action per AGV required");
  StepResult r;
  r.rewards.assign(k, 0.0);
  r.blocked.assign(k, false);
  r.loopDone.assign(k, false);

  std::vector<MoveRequest> requests;
  std::vector<std::size_t> who;
  for (std::size_t i = 0; i < k; ++i) {
    auto& a = agents_[i];
    if (!a.active) continue;
    r.rewards[i] += rewards_.tick;
    MoveRequest req{a.id, a.pos, std::nullopt};
    if (actions[i] != Action::Stay) {
      const Cell want = apply_action(a.pos, actions[i]);
      if (scenario_.map.passable(want)) req.next = want;
      else r.blocked[i] = true;
    }
    requests.push_back(req);
    who.push_back(i);
  }
  const auto decisions = resolve_moves(requests, tick_, scenario_.map.station());

  const double cell = scenario_.map.cellSize();
  for (std::size_t q = 0; q < who.size(); ++q) {
    const auto i = who[q];
    auto& a = agents_[i];
    if (decisions[q] == StepDecision::Proceed) {
      const Cell next = *requests[q].next;
      a.heading = {next.x - a.pos.x, next.y - a.pos.y};
      a.pos = next;
      r.rewards[i] += rewards_.perWh * leg_energy(scenario_.cost.selfWeightKg + payload_[i], cell, scenario_.cost);
      events_.push_back({tick_ + 1, a.id, EventKind::Move, 0, a.pos});
    } else {
      if (requests[q].next) r.blocked[i] = true;
      a.heading = {};
      events_.push_back({tick_ + 1, a.id, EventKind::Wait, 0, a.pos});
    }
    if (r.blocked[i]) r.rewards[i] += rewards_.blocked;

    for (auto& g : a.goals) {
      if (g.visited || g.cell != a.pos) continue;
      g.visited = true;
      r.rewards[i] += rewards_.subGoal;
      const auto it = std::find_if(scenario_.orders.begin(), scenario_.orders.end(),
                                   [&](const Order& o) { return o.id == g.order; });
      payload_[i] += it->weightKg;
      pickups_.push_back(g.order);
      events_.push_back({tick_ + 1, a.id, EventKind::Pickup, g.order, a.pos});
    }
    const bool allVisited = std::all_of(a.goals.begin(), a.goals.end(), [](const SubGoal& g) { return g.visited; });
    if (allVisited && a.pos == scenario_.map.station()) {
      r.rewards[i] += rewards_.loopComplete;
      for (const auto& g : a.goals) events_.push_back({tick_ + 1, a.id, EventKind::Deliver, g.order, a.pos});
      delivered_ += a.goals.size();
      a.goals.clear();
      a.active = false;
      a.heading = {};
      payload_[i] = 0.0;
      r.loopDone[i] = true;
    }
  }
  ++tick_;
  admitAndDispatch();
  return r;
}

// ---------------------------------------------------------------- training

void TrainConfig::validate() const {
  auto unit = [](double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(field, "must lie in [0, 1]");
  };
  if (episodes < 1) throw ValidationError("train.episodes", "must be at least 1");
  unit(gamma, "train.gamma");
  unit(epsilonStart, "train.epsilon_start");
  unit(epsilonMin, "train.epsilon_min");
  unit(xiStart, "train.xi_start");
  if (!(epsilonDecay > 0.0 && epsilonDecay <= 1.0)) throw ValidationError("train.epsilon_decay", "must lie in (0, 1]");
  if (!(xiDecay >= 0.0 && xiDecay <= 1.0)) throw ValidationError("train.xi_decay", "must lie in [0, 1]");
  if (epsilonMin > epsilonStart) throw ValidationError("train.epsilon_min", "must not exceed epsilon_start");
  if (batchSize < 1) throw ValidationError("train.batch", "must be at least 1");
  if (bufferCapacity < batchSize) throw ValidationError("train.buffer", "must hold at least one batch");
  if (targetSync < 1) throw ValidationError("train.target_sync", "must be at least 1");
  if (hidden < 1) throw ValidationError("train.hidden", "must be at least 1");
  if (!(learningRate > 0.0)) throw ValidationError("train.learning_rate", "must be positive");
  if (trainEvery < 1) throw ValidationError("train.train_every", "must be at least 1");
  if (!(divergenceLoss > 0.0)) throw ValidationError("train.divergence_loss", "must be positive");
}

TrainResult train(const TrainConfig& config, const Scenario& scenario) {
  config.validate();
  Rng rng(config.seed);
  GridEnv env(scenario, config.rewards);
  const std::size_t n = state_size(scenario.map, scenario.agents);
  QNetwork online(n, config.hidden, rng);
  QNetwork target = online;
  Adam adam(online.params().size(), config.learningRate);
  ReplayBuffer buffer(config.bufferCapacity);
  std::vector<double> grad;
  std::vector<TdSample> batch;

  TrainResult result;
  double epsilon = config.epsilonStart;
  double xi = config.xiStart;
  std::size_t steps = 0;
  const std::size_t k = scenario.agents;
  for (std::size_t ep = 1; ep <= config.episodes; ++ep) {
    env.reset();
    EpisodeStats stats;
    stats.episode = ep;
    double lossSum = 0.0;
    std::size_t lossCount = 0;

    while (!env.done() && stats.steps < scenario.maxSteps) {
      std::vector<Action> actions(k, Action::Stay);
      std::vector<std::vector<double>> states(k);
      std::vector<bool> acting(k, false);
      for (std::size_t i = 0; i < k; ++i) {
        if (!env.active(i)) continue;
        acting[i] = true;
        states[i] = env.observe(i);
        const auto q = online.forward(states[i]);
        const Action hint = action_toward(env.position(i), env.hint(i));
        actions[i] = select_action(q, epsilon, xi, hint, env.validActions(i), rng);
      }
      const auto res = env.step(actions);
      for (std::size_t i = 0; i < k; ++i) {
        if (!acting[i]) continue;
        stats.reward += res.rewards[i];
        Transition t;
        t.state = std::move(states[i]);
        t.action = static_cast<std::size_t>(actions[i]);
        t.reward = res.rewards[i];
        t.done = res.loopDone[i];
        t.next = env.observe(i);
        buffer.push(std::move(t));
      }
      ++steps;
      ++stats.steps;

      if (buffer.size() >= config.batchSize && steps % config.trainEvery == 0) {
        const auto idx = buffer.sample(config.batchSize, rng);
        batch.clear();
        for (const auto j : idx) {
          const auto& t = buffer[j];
          const double y = td_target(t.reward, target.forward(t.next), t.done, config.gamma);
          batch.push_back({&t.state, t.action, y});
        }
        const double loss = online.gradient(batch, grad);
        if (!(loss <= config.divergenceLoss))
          throw DivergenceError("training loss " + csv::shortest(loss) + " exceeded the divergence guard at episode " +
                                std::to_string(ep));
        adam.step(online.params(), grad);
        lossSum += loss;
        ++lossCount;
      }
      if (steps % config.targetSync == 0) target = online;
      epsilon = std::max(config.epsilonMin, epsilon * config.epsilonDecay);
      xi *= config.xiDecay;
    }
    stats.meanLoss = lossCount ? lossSum / static_cast<double>(lossCount) : 0.0;
    stats.epsilon = epsilon;
    stats.xi = xi;
    stats.completed = env.done();
    result.curve.push_back(stats);
  }
  result.q = std::move(online);
  return result;
}

std::vector<double> moving_average(std::span<const double> values, std::size_t window) {
  std::vector<double> out(values.size());
  double sum = 0.0;
  const std::size_t w = std::max<std::size_t>(1, window);
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= w) sum -= values[i - w];
    out[i] = sum / static_cast<double>(std::min(i + 1, w));
  }
  return out;
}

void write_curves_csv(std::ostream& out, std::span<const EpisodeStats> curve) {
  out << "episode,cumulativeReward,meanLoss,epsilon\n";
  for (const auto& s : curve)
    out << s.episode << ',' << csv::shortest(s.reward) << ',' << csv::shortest(s.meanLoss) << ','
        << csv::shortest(s.epsilon) << '\n';
}

namespace {
constexpr std::string_view kParamsMagic = "agvsb-qnetwork";
constexpr int kParamsVersion = 1;
}  // namespace

void save_params(std::ostream& out, const QNetwork& q) {
  out << kParamsMagic << ' ' << kParamsVersion << '\n'
      << "inputs " << q.inputs() << '\n'
      << "hidden " << q.hidden() << '\n'
      << "outputs " << kActionCount << '\n'
      << "count " << q.params().size() << '\n';
  for (const double v : q.params()) out << csv::shortest(v) << '\n';
}

QNetwork load_params(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kParamsMagic) throw ParseError(1, "not a Q-network parameter file");
  if (version != kParamsVersion) throw ParseError(1, "unsupported parameter file version " + std::to_string(version));
  std::size_t inputs = 0, hidden = 0, outputs = 0, count = 0;
  std::string key;
  auto field = [&](std::size_t row, const char* name, std::size_t& value) {
    if (!(in >> key >> value) || key != name) throw ParseError(row, std::string("expected '") + name + "'");
  };
  field(2, "inputs", inputs);
  field(3, "hidden", hidden);
  field(4, "outputs", outputs);
  field(5, "count", count);
  if (outputs != kActionCount) throw ParseError(4, "output count must be 5");
  std::vector<double> params;
  params.reserve(count);
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> token)) throw ParseError(6 + i, "truncated parameter list");
    const auto v = csv::parse_double(token);
    if (!v) throw ParseError(6 + i, "malformed parameter");
    params.push_back(*v);
  }
  try {
    return QNetwork(inputs, hidden, std::move(params));
  } catch (const ValidationError& e) {
    throw ParseError(5, e.what());
  }
}

// ---------------------------------------------------------------- evaluation

EvalResult evaluate_policy(const QNetwork& q, const Scenario& scenario, const EvalOptions& options) {
  GridEnv env(scenario);
  const std::size_t k = env.agentCount();
  const long limit = options.maxSteps > 0 ? options.maxSteps : scenario.maxSteps;
  EvalResult out;
  out.paths.assign(k, std::vector<Cell>{scenario.map.station()});
  std::vector<std::set<Cell>> seen(k);
  std::vector<long> blockedFor(k, 0);
  std::vector<std::size_t> goalsLeft(k, 0);

  auto unvisited = [&](std::size_t i) {
    const auto snap = env.snapshot();
    const auto& goals = snap.agents[i].goals;
    return static_cast<std::size_t>(std::count_if(goals.begin(), goals.end(), [](const SubGoal& g) { return !g.visited; }));
  };

  while (!env.done() && out.steps < limit) {
    std::vector<Action> actions(k, Action::Stay);
    for (std::size_t i = 0; i < k; ++i) {
      if (!env.active(i)) continue;
      Action a = greedy_action(q.forward(env.observe(i)));
      if (options.fallback) {
        const Cell want = apply_action(env.position(i), a);
        const bool poor = !scenario.map.passable(want) || a == Action::Stay || seen[i].count(want) > 0;
        if (poor) {
          a = action_toward(env.position(i), env.hint(i, blockedFor[i] > 0));
          ++out.fallbackMoves;
        } else {
          ++out.greedyMoves;
        }
      } else {
        ++out.greedyMoves;
      }
      actions[i] = a;
    }
    std::vector<bool> wasActive(k);
    for (std::size_t i = 0; i < k; ++i) {
      wasActive[i] = env.active(i);
      if (wasActive[i]) goalsLeft[i] = unvisited(i);
    }
    const auto res = env.step(actions);
    ++out.steps;
    for (std::size_t i = 0; i < k; ++i) {
      out.reward += res.rewards[i];
      out.paths[i].push_back(env.position(i));
      blockedFor[i] = res.blocked[i] ? blockedFor[i] + 1 : 0;
      // a new leg starts after every pickup and after every delivery
      const bool legOver = res.loopDone[i] || (wasActive[i] && env.active(i) && unvisited(i) < goalsLeft[i]);
      if (legOver || !wasActive[i]) seen[i].clear();
      seen[i].insert(env.position(i));
    }
  }
  out.completed = env.done();
  out.orderSequence = env.pickupSequence();
  out.events = env.events();
  out.collisions = find_collisions(out.events, scenario.map.station()).size();
  return out;
}

}  // namespace agvsb
