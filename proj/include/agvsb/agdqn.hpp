#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "agvsb/costmodel.hpp"
#include "agvsb/layout.hpp"
#include "agvsb/orders.hpp"
#include "agvsb/rng.hpp"
#include "agvsb/scheduler.hpp"
#include "agvsb/simulator.hpp"

namespace agvsb {

enum class Action : std::uint8_t { Up, Down, Left, Right, Stay };
inline constexpr std::size_t kActionCount = 5;
inline constexpr std::array<Action, kActionCount> kAllActions{Action::Up, Action::Down, Action::Left,
                                                              Action::Right, Action::Stay};

std::string_view action_name(Action a);
Cell apply_action(Cell c, Action a);
/// Action that moves `from` onto the neighbouring cell `to`; Stay otherwise.
Action action_toward(Cell from, Cell to);

using QValues = std::array<double, kActionCount>;

/// One TD regression sample: push Q(state, action) toward target.
struct TdSample {
  const std::vector<double>* state = nullptr;
  std::size_t action = 0;
  double target = 0.0;
};

/// Feed-forward value approximator: inputs -> ReLU hidden layer -> 5 Q values.
/// Parameters are one flat vector: W1 (input-major), b1, W2 (hidden-major), b2.
class QNetwork {
 public:
  QNetwork() = default;
  QNetwork(std::size_t inputs, std::size_t hidden, Rng& rng);
  QNetwork(std::size_t inputs, std::size_t hidden, std::vector<double> params);

  std::size_t inputs() const noexcept { return inputs_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  QValues forward(std::span<const double> x) const;
  /// Mean squared TD error over the batch.
  double loss(std::span<const TdSample> batch) const;
  /// Same loss; writes d(loss)/d(params) into `grad` (resized as needed).
  double gradient(std::span<const TdSample> batch, std::vector<double>& grad) const;

  friend bool operator==(const QNetwork&, const QNetwork&) = default;

 private:
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return inputs_ * hidden_; }
  std::size_t w2() const { return b1() + hidden_; }
  std::size_t b2() const { return w2() + hidden_ * kActionCount; }
  void hiddenLayer(std::span<const double> x, std::vector<double>& h) const;

  std::size_t inputs_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> params_;
};

class Adam {
 public:
  explicit Adam(std::size_t n, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::vector<double>& params, const std::vector<double>& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

/// r if the next state is terminal, else r + gamma * max_a' Q_target(s', a').
double td_target(double reward, const QValues& nextQ, bool done, double gamma);

struct Transition {
  std::vector<double> state;
  std::size_t action = 0;
  double reward = 0.0;
  std::vector<double> next;
  bool done = false;
};

/// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(Transition t);
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  /// 0 is the oldest stored transition.
  const Transition& operator[](std::size_t i) const { return data_[(head_ + i) % data_.size()]; }
  /// n distinct indices, uniformly chosen (n <= size()).
  std::vector<std::size_t> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // oldest entry once full
  std::vector<Transition> data_;
};

/// A pickup the AGV still has to make (or has made) on its current loop.
struct SubGoal {
  Cell cell{};
  OrderId order = 0;
  PriorityClass cls = PriorityClass::D;
  double slack = 0.0;  // remaining deadline window / class window, clamped to [0, 1]
  double cost = 0.0;   // accrued delay cost / cap
  bool visited = false;
};

struct AgentView {
  AgvId id = 0;
  Cell pos{};
  Cell heading{};  // last move, unit vector or zero
  bool active = false;
  std::vector<SubGoal> goals;  // route order, at most four
};

struct EnvSnapshot {
  const GridMap* map = nullptr;
  std::vector<AgentView> agents;
  std::vector<Cell> pendingPickups;  // unserved pickups, assigned or not
};

/// Feature layout for an AGV on a W x H map with K agents:
///   [0,2)    own position x/(W-1), y/(H-1)
///   [2,4)    heading dx, dy
///   [4,8)    blocked flags for up, down, left, right (edge, obstacle, other AGV)
///   [8,12)   current target dx/(W-1), dy/(H-1), sign dx, sign dy
///   [12,27)  goal slots: four sub-goals then the station, each (dx, dy, present)
///   [27,39)  per sub-goal: class/3, slack, cost
///   [39,43)  visited bits; empty slots count as visited
///   next 4(K-1): other AGVs in id order, (dx, dy, heading dx, heading dy)
///   then four W*H planes: obstacles, pending pickups, own cell, other AGVs
/// The current target is the first unvisited sub-goal, else the station.
std::size_t state_size(const GridMap& map, std::size_t agents);
std::vector<double> encode_state(const EnvSnapshot& snap, std::size_t agent);
/// First unvisited sub-goal, or the station once all are visited.
Cell current_target(const AgentView& agent, Cell station);

using ActionMask = std::array<bool, kActionCount>;

/// With probability xi the action toward `hint`; else with probability
/// epsilon a uniform valid action; else argmax Q (lowest index on ties).
Action select_action(const QValues& q, double epsilon, double xi, Action hint, const ActionMask& valid,
                     Rng& rng);
Action greedy_action(const QValues& q);

struct RewardConfig {
  double tick = -0.01;
  double subGoal = 1.0;
  double loopComplete = 5.0;
  double blocked = -1.0;
  double perWh = -0.001;
};

/// Episode definition: a fixed map and order list, served by `agents` AGVs
/// that draw batches from a dispatch queue sorted by `rule`.
struct Scenario {
  GridMap map;
  std::vector<Order> orders;
  std::size_t agents = 1;
  Rule rule = Rule::PDSP;
  long maxSteps = 200;
  CostParams cost;
  ProfileParams profiles;
};

/// 5 x 5 grid, one AGV, one pickup behind a wall.
Scenario single_goal_scenario();
/// Small generated warehouse, two AGVs, twenty dynamically arriving orders.
Scenario small_warehouse_scenario(std::uint64_t seed);

/// Multi-AGV grid environment. AGVs idle at the station take the next batch
/// from the queue; moves are resolved with the corridor reservation rules.
class GridEnv {
 public:
  explicit GridEnv(const Scenario& scenario, RewardConfig rewards = {});

  void reset();
  bool done() const noexcept { return delivered_ == scenario_.orders.size(); }
  long tick() const noexcept { return tick_; }
  std::size_t agentCount() const noexcept { return agents_.size(); }
  bool active(std::size_t i) const { return agents_[i].active; }
  Cell position(std::size_t i) const { return agents_[i].pos; }
  const Scenario& scenario() const noexcept { return scenario_; }

  EnvSnapshot snapshot() const;
  std::vector<double> observe(std::size_t i) const { return encode_state(snapshot(), i); }
  /// Next cell on a shortest path to the current target. With avoidOthers
  /// the other AGVs' cells are treated as obstacles when a detour exists.
  Cell hint(std::size_t i, bool avoidOthers = false) const;
  ActionMask validActions(std::size_t i) const;

  struct StepResult {
    std::vector<double> rewards;
    std::vector<bool> blocked;
    std::vector<bool> loopDone;
  };
  /// One tick. Inactive AGVs ignore their action.
  StepResult step(std::span<const Action> actions);

  const std::vector<OrderId>& pickupSequence() const noexcept { return pickups_; }
  const std::vector<TraceEvent>& events() const noexcept { return events_; }

 private:
  void admitAndDispatch();

  Scenario scenario_;
  RewardConfig rewards_;
  ProfileSet profiles_;
  std::vector<int> stationDistance_;
  std::vector<AgentView> agents_;
  std::vector<double> payload_;
  DispatchQueue queue_;
  std::size_t nextArrival_ = 0;
  std::size_t delivered_ = 0;
  long tick_ = 0;
  std::vector<OrderId> pickups_;
  std::vector<TraceEvent> events_;
};

struct TrainConfig {
  std::size_t episodes = 500;
  double gamma = 0.95;
  double epsilonStart = 1.0;
  double epsilonDecay = 0.995;  // per environment step
  double epsilonMin = 0.05;
  double xiStart = 0.3;
  double xiDecay = 0.995;  // per environment step, no floor
  std::size_t bufferCapacity = 10000;
  std::size_t batchSize = 64;
  std::size_t targetSync = 200;  // steps
  std::size_t hidden = 64;
  double learningRate = 1e-3;
  /// Gradient steps happen every this many environment steps.
  std::size_t trainEvery = 1;
  double divergenceLoss = 1e6;
  std::uint64_t seed = 1;
  RewardConfig rewards;

  void validate() const;
};

struct EpisodeStats {
  std::size_t episode = 0;  // 1-based
  double reward = 0.0;      // summed over AGVs
  double meanLoss = 0.0;
  double epsilon = 0.0;     // at episode end
  double xi = 0.0;          // at episode end
  long steps = 0;
  bool completed = false;
};

struct TrainResult {
  QNetwork q;
  std::vector<EpisodeStats> curve;
};

/// Throws DivergenceError when a batch loss exceeds config.divergenceLoss.
TrainResult train(const TrainConfig& config, const Scenario& scenario);

/// Trailing moving average with the given window (shorter at the start).
std::vector<double> moving_average(std::span<const double> values, std::size_t window);

void write_curves_csv(std::ostream& out, std::span<const EpisodeStats> curve);
void save_params(std::ostream& out, const QNetwork& q);
QNetwork load_params(std::istream& in);

struct EvalOptions {
  /// Replace the greedy action with the A* step when it is invalid, stays
  /// put with work to do, or revisits a cell during the same leg.
  bool fallback = true;
  long maxSteps = 0;  // 0: the scenario's limit
};

struct EvalResult {
  bool completed = false;
  long steps = 0;
  double reward = 0.0;
  std::vector<OrderId> orderSequence;
  std::vector<std::vector<Cell>> paths;  // per AGV, one cell per tick
  std::vector<TraceEvent> events;
  std::size_t greedyMoves = 0;
  std::size_t fallbackMoves = 0;
  std::size_t collisions = 0;
};

EvalResult evaluate_policy(const QNetwork& q, const Scenario& scenario, const EvalOptions& options = {});

}  // namespace agvsb
