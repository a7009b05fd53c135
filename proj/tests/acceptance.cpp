// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <path-to-agvsb-tool> [work-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agvsb/agdqn.hpp"
#include "agvsb/routing.hpp"
#include "agvsb/simulator.hpp"

namespace fs = std::filesystem;
using namespace agvsb;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail, double seconds) {
  std::printf("%s %-3s %s (%.1fs)\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Every simulated report goes through here so the identities cover them all.
std::size_t identityRuns = 0;
std::vector<std::string> identityBreaks;

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(std::abs(a), std::abs(b)); }

void audit_identities(const KpiReport& k, double beta, const std::string& label) {
  ++identityRuns;
  if (!close_rel(k.OpT, k.TrT + k.WT)) identityBreaks.push_back(label + " OpT");
  if (!close_rel(k.E, k.E1 + k.E2)) identityBreaks.push_back(label + " E");
  if (!close_rel(k.CoT, k.CoI + beta * k.CoD)) identityBreaks.push_back(label + " CoT");
  if (!close_rel(k.CoS, k.CoE + k.CoT)) identityBreaks.push_back(label + " CoS");
}

SimResult simulate(const SimConfig& c) {
  auto r = run(c);
  audit_identities(r.kpi, c.cost.beta,
                   std::string(rule_label(c.rule)) + " seed " + std::to_string(c.seed));
  return r;
}

SimConfig base_config(WarehouseScale scale, std::size_t fleet, std::size_t orders, Rule rule, std::uint64_t seed) {
  SimConfig c;
  c.layoutScale = scale;
  c.fleetSize = fleet;
  c.orderQuantity = orders;
  c.rule = rule;
  c.seed = seed;
  return c;
}

// ---- 2: routing oracles

GridMap random_map(int w, int h, double obstacleShare, Rng& rng) {
  GridMap map(w, h, {w / 2, 0});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Cell c{x, y};
      if (c != map.station() && uniform01(rng) < obstacleShare) map.setObstacle(c);
    }
  return map;
}

Cell random_free(const GridMap& map, Rng& rng) {
  for (;;) {
    const Cell c{static_cast<int>(uniform_index(rng, map.width())), static_cast<int>(uniform_index(rng, map.height()))};
    if (map.passable(c)) return c;
  }
}

int brute_force_tour(const GridMap& map, const std::vector<Cell>& batch, Cell station) {
  std::vector<Cell> nodes{station};
  nodes.insert(nodes.end(), batch.begin(), batch.end());
  std::vector<std::vector<int>> d;
  for (const Cell c : nodes) d.push_back(bfs_distances(map, c));
  std::vector<std::size_t> perm(batch.size());
  std::iota(perm.begin(), perm.end(), std::size_t{1});
  int best = std::numeric_limits<int>::max();
  do {
    int total = d[0][map.index(nodes[perm.front()])] + d[perm.back()][map.index(station)];
    for (std::size_t k = 1; k < perm.size(); ++k) total += d[perm[k - 1]][map.index(nodes[perm[k]])];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

void routing() {
  Timer t;
  Rng rng(20240601);
  int queries = 0, astarBad = 0;
  for (int m = 0; m < 100; ++m) {
    const int w = 5 + static_cast<int>(uniform_index(rng, 21));
    const int h = 5 + static_cast<int>(uniform_index(rng, 21));
    const auto map = random_map(w, h, uniform_real(rng, 0.05, 0.35), rng);
    for (int q = 0; q < 5; ++q) {
      const Cell a = random_free(map, rng), b = random_free(map, rng);
      const int truth = bfs_distances(map, a)[map.index(b)];
      ++queries;
      try {
        const auto p = astar(map, a, b);
        bool valid = p.cells.front() == a && p.cells.back() == b;
        for (std::size_t i = 1; i < p.cells.size(); ++i)
          valid = valid && adjacent4(p.cells[i - 1], p.cells[i]) && map.passable(p.cells[i]);
        if (!valid || static_cast<int>(p.moves()) != truth) ++astarBad;
      } catch (const NoPathError&) {
        if (truth >= 0) ++astarBad;
      }
    }
  }
  int tourBad = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const auto map = random_map(8 + static_cast<int>(uniform_index(rng, 18)), 8 + static_cast<int>(uniform_index(rng, 18)), 0.15, rng);
    const auto reach = flood_fill(map, map.station());
    std::vector<Cell> batch;
    const std::size_t n = 1 + inst % 4;
    while (batch.size() < n) {
      const Cell c = random_free(map, rng);
      if (reach[map.index(c)]) batch.push_back(c);
    }
    const auto trip = order_stops(map, batch, map.station());
    if (trip.length() != brute_force_tour(map, batch, map.station())) ++tourBad;
  }
  report("2", astarBad == 0 && tourBad == 0,
         "routing optimality: A* vs BFS " + std::to_string(queries - astarBad) + "/" + std::to_string(queries) +
             " on 100 maps, order_stops vs permutations " + std::to_string(50 - tourBad) + "/50",
         t.seconds());
}

// ---- 3: constraint suite

std::set<ConstraintCode> codes(const std::vector<Violation>& v) {
  std::set<ConstraintCode> out;
  for (const auto& x : v) out.insert(x.code);
  return out;
}

void constraints() {
  Timer t;
  Rng rng(3303);
  int clean = 0;
  std::string firstBad;
  for (int i = 0; i < 30; ++i) {
    const auto rule = kAllRules[static_cast<std::size_t>(i % 6)];
    const auto scale = static_cast<WarehouseScale>((i / 6) % 3);
    auto c = base_config(scale, 1 + uniform_index(rng, 5), 30 + uniform_index(rng, 121), rule, 1 + uniform_index(rng, 100000));
    c.owt = {0.0, uniform_real(rng, 1.0, 20.0)};
    const double a = uniform_real(rng, 0.05, 2.0);
    c.dtw.hours = {a, a * uniform_real(rng, 1, 3), a * uniform_real(rng, 1, 5), a * uniform_real(rng, 1, 5)};
    const auto r = simulate(c);
    const auto v = validate_constraints(r.trace);
    if (v.empty())
      ++clean;
    else if (firstBad.empty())
      firstBad = "; scenario " + std::to_string(i) + ": " + v.front().detail;
  }

  auto cfg = base_config(WarehouseScale::Small, 3, 120, Rule::PDSP, 4);
  const auto nominal = simulate(cfg);
  const auto& trips = nominal.trace.trips;
  const auto full = std::find_if(trips.begin(), trips.end(), [](const TripRecord& tr) { return tr.orders.size() == 4; });
  int injected = 0;
  if (full != trips.end() && validate_constraints(nominal.trace).empty()) {
    const auto ti = static_cast<std::size_t>(full - trips.begin());
    {  // an order never served
      auto trace = nominal.trace;
      trace.trips[ti].orders.pop_back();
      injected += codes(validate_constraints(trace)) == std::set{ConstraintCode::Assignment};
    }
    {  // a fifth order in one manifest
      auto trace = nominal.trace;
      Order extra = trace.orders.front();
      extra.id = 100000;
      trace.orders.push_back(extra);
      trace.trips[ti].orders.push_back(extra.id);
      injected += codes(validate_constraints(trace)) == std::set{ConstraintCode::Capacity};
    }
    {  // a manifest over the payload limit
      auto trace = nominal.trace;
      const auto id = trace.trips[ti].orders.front();
      for (auto& o : trace.orders)
        if (o.id == id) o.weightKg = 300.0;
      injected += codes(validate_constraints(trace)) == std::set{ConstraintCode::Weight};
    }
    {  // battery budget below what an AGV actually ran
      auto trace = nominal.trace;
      std::map<AgvId, double> used;
      for (const auto& tr : trace.trips) used[tr.agv] += static_cast<double>(tr.endTick - tr.dispatchTick);
      double most = 0;
      for (const auto& [agv, s] : used) most = std::max(most, s);
      trace.cost.batteryBudget = most / 2.0;
      injected += codes(validate_constraints(trace)) == std::set{ConstraintCode::Battery};
    }
  }
  report("3", clean == 30 && injected == 4,
         "constraint suite: " + std::to_string(clean) + "/30 randomized runs clean, " + std::to_string(injected) +
             "/4 injected faults give exactly assignment, capacity, weight, battery" + firstBad,
         t.seconds());
}

// ---- 4: fleet-size trend

void fleet_trend() {
  Timer t;
  bool ok = true;
  std::string detail;
  for (const Rule rule : {Rule::PDSP, Rule::DCSP}) {
    std::map<std::size_t, std::vector<double>> wt;
    for (std::size_t k = 3; k <= 5; ++k)
      for (std::uint64_t s = 1; s <= 5; ++s) {
        auto c = base_config(WarehouseScale::Medium, k, 500, rule, s);
        c.recordEvents = false;
        wt[k].push_back(simulate(c).kpi.WT);
      }
    detail += std::string(rule_label(rule)) + " mean WT";
    for (std::size_t k = 3; k <= 5; ++k)
      detail += fmt(" %.0f", std::accumulate(wt[k].begin(), wt[k].end(), 0.0) / 5.0);
    for (std::size_t k = 3; k < 5; ++k) {
      int down = 0;
      for (std::size_t s = 0; s < 5; ++s) down += wt[k + 1][s] < wt[k][s];
      ok = ok && down >= 4;
      detail += " [" + std::to_string(k) + "->" + std::to_string(k + 1) + ": " + std::to_string(down) + "/5]";
    }
    detail += "; ";
  }
  report("4", ok, "fleet-size trend K 3->4->5: " + detail, t.seconds());
}

// ---- 5: relaxed deadlines

void relaxed_deadlines() {
  Timer t;
  bool ok = true;
  double worstSpan = 0, totalCoD = 0;
  for (const Rule rule : kAllRules)
    for (std::uint64_t s = 1; s <= 2; ++s) {
      auto c = base_config(WarehouseScale::Medium, 3, 200, rule, s);
      c.dtw.hours = {500, 1000, 2400, 2400};
      c.recordEvents = false;
      const auto r = simulate(c);
      worstSpan = std::max(worstSpan, r.kpi.makespan);
      totalCoD += std::abs(r.kpi.CoD);
      ok = ok && r.kpi.CoD == 0.0 && r.kpi.makespan < c.dtw.offsetSeconds(PriorityClass::A);
    }
  report("5", ok,
         "relaxed deadlines: CoD total " + fmt("%g", totalCoD) + " over 6 rules x 2 seeds, longest horizon " +
             fmt("%.0f s", worstSpan),
         t.seconds());
}

// ---- 6: rule orderings under peak load

void rule_orderings() {
  Timer t;
  int a = 0, b = 0, c = 0;
  std::vector<double> ratios;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    std::map<Rule, KpiReport> k;
    for (const Rule r : kAllRules) {
      auto cfg = base_config(WarehouseScale::Medium, 3, 500, r, s);
      cfg.owt = {0.0, 5.0};
      cfg.dtw.hours = {0.04, 0.08, 0.16, 0.16};
      cfg.recordEvents = false;
      k[r] = simulate(cfg).kpi;
    }
    bool lowestTrT = true, lowestWT = true;
    for (const Rule r : kAllRules) {
      if (r != Rule::FCFS && k[r].TrT <= k[Rule::FCFS].TrT) lowestTrT = false;
      if (r != Rule::SPT && k[r].WT <= k[Rule::SPT].WT) lowestWT = false;
    }
    const double num = std::min(k[Rule::PDSP].CoD, k[Rule::DCSP].CoD);
    const double den = std::min(k[Rule::FCFS].CoD, k[Rule::EDT].CoD);
    a += lowestTrT;
    b += lowestWT;
    c += num <= 0.5 * den;
    ratios.push_back(den > 0 ? num / den : 0.0);
  }
  const double secs = t.seconds();
  report("6a", a >= 8, "FCFS lowest mean TrT in " + std::to_string(a) + "/10 peak-load seeds", secs);
  report("6b", b >= 8, "SPT lowest mean WT in " + std::to_string(b) + "/10 peak-load seeds", secs);
  report("6c", c >= 8,
         "min(PDSP,DCSP) CoD <= 0.5 min(FCFS,EDT) CoD in " + std::to_string(c) + "/10 seeds, median ratio " +
             fmt("%.2f", median(ratios)),
         secs);
}

// ---- 7: service level

void service_levels() {
  Timer t;
  bool ok = true;
  std::string detail;
  for (const Rule rule : {Rule::PDSP, Rule::DCSP}) {
    double sum = 0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      auto c = base_config(WarehouseScale::Medium, 5, 300, rule, s);
      c.recordEvents = false;
      sum += simulate(c).kpi.serviceLevel;
    }
    ok = ok && sum / 5.0 >= 0.9;
    detail += " " + std::string(rule_label(rule)) + fmt(" %.3f", sum / 5.0);
  }
  report("7", ok, "mean service level, medium K=5 300 orders:" + detail, t.seconds());
}

// ---- 8: cost-model units

void cost_units() {
  Timer t;
  const CostParams p;
  const double w = power_unit(720.0, p);
  bool ok = std::abs(w - 201.6) <= 1e-9 * 201.6;
  std::string detail = "power_unit(720 kg) = " + fmt("%.6f W", w);
  const double pairs[2][2] = {{4112.59, 49.35}, {10075.67, 120.91}};
  for (const auto& pr : pairs) {
    const double coe = energy_cost(pr[0], p);
    const double rel = std::abs(coe - pr[1]) / pr[1];
    ok = ok && rel <= 0.005;
    detail += fmt(", %.2f Wh", pr[0]) + fmt(" -> $%.4f", coe) + fmt(" (%.3f%%)", 100 * rel);
  }
  report("8", ok, "cost-model units: " + detail, t.seconds());
}

// ---- 9: delay-curve shapes

void delay_curves() {
  Timer t;
  const ProfileParams params;
  int bad = 0;
  for (std::size_t cls = 0; cls < kClassCount; ++cls) {
    const auto profile = delay_profile_for(static_cast<PriorityClass>(cls), params);
    const double end = 2.0 * profile.saturationTime;
    double prev = -1.0;
    for (int i = 0; i < 10000; ++i) {
      const double w = end * i / 9999.0;
      const double v = delay_cost(profile, w);
      if (v < prev || v > profile.cap || v < 0.0) ++bad;
      if (profile.kind != DelayKind::Expedite && w < profile.deadlineOffset && v != 0.0) ++bad;
      if (w >= profile.saturationTime && v != profile.cap) ++bad;
      prev = v;
    }
    if (delay_cost(profile, profile.saturationTime) != profile.cap) ++bad;
  }
  report("9", bad == 0, "delay-curve shapes: " + std::to_string(bad) + " violations over 4 x 10000 points", t.seconds());
}

// ---- 10: guided DQN

void dqn_unit() {
  Timer t;
  bool ok = td_target(1.0, {0.5, 2.0, -1.0, 1.0, 0.0}, false, 0.9) == 1.0 + 0.9 * 2.0 &&
            td_target(1.0, {0.5, 2.0, -1.0, 1.0, 0.0}, true, 0.9) == 1.0 &&
            td_target(0.0, {-3.0, -2.0, -4.0, -5.0, -2.5}, false, 0.5) == -1.0;
  Rng rng(10);
  QNetwork net(12, 8, rng);
  for (auto& p : net.params()) p += uniform_real(rng, -0.2, 0.2);
  std::vector<std::vector<double>> states(6, std::vector<double>(12));
  for (auto& s : states)
    for (auto& v : s) v = uniform01(rng) < 0.3 ? 0.0 : uniform_real(rng, -1.0, 1.0);
  std::vector<TdSample> batch;
  for (std::size_t i = 0; i < states.size(); ++i) batch.push_back({&states[i], i % kActionCount, uniform_real(rng, -1, 1)});
  std::vector<double> grad;
  net.gradient(batch, grad);
  double worst = 0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    QNetwork plus = net, minus = net;
    plus.params()[i] += 1e-6;
    minus.params()[i] -= 1e-6;
    const double numeric = (plus.loss(batch) - minus.loss(batch)) / 2e-6;
    worst = std::max(worst, std::abs(numeric - grad[i]) / std::max({std::abs(numeric), std::abs(grad[i]), 1e-6}));
  }
  ok = ok && worst < 1e-4;
  report("10a", ok, "TD target and gradient check, worst relative error " + fmt("%.2e", worst), t.seconds());
}

void dqn_single_goal() {
  Timer t;
  const auto scenario = single_goal_scenario();
  const auto& map = scenario.map;
  const Cell pickup = scenario.orders.front().pickup;
  const auto optimal = astar(map, map.station(), pickup).moves() + astar(map, pickup, map.station()).moves();
  TrainConfig c;
  c.episodes = 1000;
  c.xiStart = 0.3;
  c.seed = 1;
  const auto result = train(c, scenario);
  EvalOptions o;
  o.fallback = false;
  const auto e = evaluate_policy(result.q, scenario, o);
  const std::size_t moves = e.paths.empty() || e.paths.front().empty() ? 0 : e.paths.front().size() - 1;
  report("10b", e.completed && moves == optimal,
         "5x5 single goal after 1000 episodes: greedy loop " + std::to_string(moves) + " moves (" +
             (e.completed ? "completed" : "incomplete") + "), A* " + std::to_string(optimal),
         t.seconds());
}

void dqn_warehouse() {
  Timer t;
  const auto scenario = small_warehouse_scenario(1);
  TrainConfig c;
  c.episodes = 30;
  c.seed = 1;
  const auto result = train(c, scenario);
  const auto e = evaluate_policy(result.q, scenario);
  const auto replayed = find_collisions(e.events, scenario.map.station());
  report("10c", e.completed && e.collisions == 0 && replayed.empty(),
         "small warehouse, 2 AGVs, 20 orders: " + std::string(e.completed ? "completed" : "incomplete") + " in " +
             std::to_string(e.steps) + " ticks, " + std::to_string(e.collisions + replayed.size()) +
             " collisions, " + std::to_string(e.greedyMoves) + " greedy / " + std::to_string(e.fallbackMoves) +
             " fallback moves",
         t.seconds());
}

void dqn_guidance_speedup() {
  Timer t;
  const std::size_t episodes = 500, window = 100;
  const auto scenario = single_goal_scenario();
  std::vector<std::vector<double>> curves[2];
  std::vector<double> finals;
  for (int guided = 0; guided < 2; ++guided)
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      TrainConfig c;
      c.episodes = episodes;
      c.seed = seed;
      c.xiStart = guided ? 0.3 : 0.0;
      const auto r = train(c, scenario);
      std::vector<double> rewards;
      for (const auto& s : r.curve) rewards.push_back(s.reward);
      curves[guided].push_back(moving_average(rewards, window));
      if (!guided) finals.push_back(curves[guided].back().back());
    }
  const double threshold = median(finals);
  std::vector<double> reach[2];
  for (int g = 0; g < 2; ++g)
    for (const auto& m : curves[g]) {
      const auto it = std::find_if(m.begin(), m.end(), [&](double v) { return v >= threshold; });
      reach[g].push_back(static_cast<double>(it - m.begin()) + 1.0);  // episodes + 1 when never
    }
  const double plain = median(reach[0]), guided = median(reach[1]);
  report("10d", guided < plain,
         "episodes to reach the plain final median reward " + fmt("%.3f", threshold) + ": guided median " +
             fmt("%.0f", guided) + " vs plain " + fmt("%.0f", plain),
         t.seconds());
}

// ---- 11: CLI determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

void cli_determinism(const std::string& tool, const fs::path& work) {
  Timer t;
  fs::remove_all(work);
  fs::create_directories(work);
  std::ofstream(work / "one.ini") << "seed = 9\n[scenario]\nlayout = small\nfleet = 2\norders = 40\nrule = dcsp\n";
  std::ofstream(work / "sweep.ini") << "seed = 9\nreplications = 2\n[scenario]\nlayout = small\nfleet = 2, 3\n"
                                       "orders = 40\nrule = fcfs, spt, dcsp\n";
  std::ofstream(work / "train.ini") << "seed = 9\n[train]\nscenario = single-goal\nepisodes = 20\nhidden = 16\n";

  bool ok = true;
  std::string detail;
  std::size_t files = 0;
  for (const std::string format : {"csv", "json"}) {
    for (const char* run : {"a", "b"}) {
      const auto out = work / (format + "-" + run);
      const std::string f = " --format " + format;
      const std::string q = " > " + (work / "log.txt").string() + " 2>&1";
      const std::string cmds[] = {
          tool + " simulate " + (work / "one.ini").string() + " --seed 4 --out-dir " + (out / "simulate").string() + f,
          tool + " sweep " + (work / "sweep.ini").string() + " --jobs 2 --out-dir " + (out / "sweep").string() + f,
          tool + " compare " + (work / ("csv-" + std::string(run)) / "sweep" / "results.csv").string() + " --out-dir " + (out / "compare").string() + f,
          tool + " train " + (work / "train.ini").string() + " --out-dir " + (out / "train").string() + f,
          tool + " replay " + (out / "simulate" / "trace.csv").string() + " --out-dir " + (out / "replay").string() + f,
      };
      for (const auto& cmd : cmds)
        if (std::system((cmd + q).c_str()) != 0) {
          ok = false;
          detail = "command failed: " + cmd + "; ";
        }
    }
  }
  for (const std::string format : {"csv", "json"}) {
    const auto a = tree(work / (format + "-a")), b = tree(work / (format + "-b"));
    files += a.size();
    if (a != b) {
      ok = false;
      for (const auto& [name, bytes] : a)
        if (!b.count(name) || b.at(name) != bytes) detail += format + "/" + name + " differs; ";
    }
  }
  report("11", ok && files > 0,
         "CLI determinism: " + detail + std::to_string(files) + " output files byte-identical across reruns",
         t.seconds());
}

void identities() {
  std::string detail = std::to_string(identityRuns) + " simulated reports checked";
  if (!identityBreaks.empty()) detail += ", first break: " + identityBreaks.front();
  report("1", identityBreaks.empty() && identityRuns > 0, "accounting identities to 1e-6: " + detail, 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <agvsb-tool> [work-dir]\n");
    return 2;
  }
  const std::string tool = argv[1];
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::current_path() / "acceptance-work";

  routing();
  constraints();
  fleet_trend();
  relaxed_deadlines();
  rule_orderings();
  service_levels();
  identities();
  cost_units();
  delay_curves();
  dqn_unit();
  dqn_single_goal();
  dqn_warehouse();
  dqn_guidance_speedup();
  cli_determinism(tool, work);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
