#include "agvsb/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "agvsb/csv.hpp"

extern char** environ;

namespace agvsb::cli {

namespace pt = boost::property_tree;
using ordered_json = nlohmann::ordered_json;

EnvVars process_environment() {
  EnvVars out;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view entry(*e);
    if (entry.rfind("AGVSB_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace_back(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- value parsing

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(csv::trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double number(const std::string& field, const std::string& v) {
  const auto d = csv::parse_double(csv::trim(v));
  if (!d || !std::isfinite(*d)) throw ValidationError(field, "expected a number, got '" + v + "'");
  return *d;
}

std::uint64_t count(const std::string& field, const std::string& v) {
  const auto i = csv::parse_int(csv::trim(v));
  if (!i || *i < 0) throw ValidationError(field, "expected a non-negative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(*i);
}

template <std::size_t N>
std::array<double, N> tuple(const std::string& field, const std::string& v) {
  const auto parts = split_list(v, '/');
  if (parts.size() != N)
    throw ValidationError(field, "expected " + std::to_string(N) + " values separated by '/', got '" + v + "'");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = number(field, parts[i]);
  return out;
}

Interval interval(const std::string& field, const std::string& v) {
  const auto parts = split_list(v, '-');
  if (parts.size() != 2) throw ValidationError(field, "expected lo-hi, got '" + v + "'");
  return {number(field, parts[0]), number(field, parts[1])};
}

template <class T, class F>
std::vector<T> list(const std::string& field, const std::string& v, F parse) {
  std::vector<T> out;
  for (const auto& item : split_list(v, ',')) {
    if (item.empty()) throw ValidationError(field, "empty list entry");
    out.push_back(parse(item));
  }
  return out;
}

bool is_section(std::string_view name) {
  static const std::set<std::string, std::less<>> sections{"scenario", "layout", "cost", "sim", "train", "reward"};
  return sections.count(name) > 0;
}

using Handler = std::function<void(const std::string&)>;

std::map<std::string, Handler> handlers(ScenarioSpec& s, std::optional<int>& width, std::optional<int>& height) {
  std::map<std::string, Handler> h;
  auto num = [&](const std::string& key, double& target) { h[key] = [&target, key](const std::string& v) { target = number(key, v); }; };
  auto cnt = [&](const std::string& key, auto& target) {
    h[key] = [&target, key](const std::string& v) { target = static_cast<std::remove_reference_t<decltype(target)>>(count(key, v)); };
  };
  SimConfig& b = s.base;
  CostParams& c = b.cost;
  TrainConfig& t = s.train.config;

  cnt("seed", s.seed);
  cnt("replications", s.replications);

  h["scenario.layout"] = [&s](const std::string& v) {
    s.layouts = list<WarehouseScale>("scenario.layout", v, [](const std::string& x) {
      try {
        return parse_scale(x);
      } catch (const Error&) {
        throw ValidationError("scenario.layout", "unknown layout '" + x + "' (small, medium, large)");
      }
    });
  };
  h["scenario.fleet"] = [&s](const std::string& v) {
    s.fleets = list<std::size_t>("scenario.fleet", v, [](const std::string& x) { return count("scenario.fleet", x); });
  };
  h["scenario.orders"] = [&s](const std::string& v) {
    s.orders = list<std::size_t>("scenario.orders", v, [](const std::string& x) { return count("scenario.orders", x); });
  };
  h["scenario.owt"] = [&s](const std::string& v) {
    s.owts = list<Interval>("scenario.owt", v, [](const std::string& x) { return interval("scenario.owt", x); });
  };
  h["scenario.dtw"] = [&s](const std::string& v) {
    s.dtws = list<DeadlineWindows>("scenario.dtw", v, [](const std::string& x) {
      DeadlineWindows w;
      w.hours = tuple<kClassCount>("scenario.dtw", x);
      return w;
    });
  };
  h["scenario.rule"] = [&s](const std::string& v) {
    if (lower(csv::trim(v)) == "all") {
      s.rules = {Rule::FCFS, Rule::SPT, Rule::EDT, Rule::LDC, Rule::PDSP, Rule::DCSP};
      return;
    }
    s.rules = list<Rule>("scenario.rule", v, [](const std::string& x) {
      try {
        return parse_rule(lower(x));
      } catch (const Error&) {
        throw ValidationError("scenario.rule", "unknown rule '" + x + "'");
      }
    });
  };
  h["scenario.class_mix"] = [&b](const std::string& v) { b.classMix = tuple<kClassCount>("scenario.class_mix", v); };
  h["scenario.stream"] = [&s](const std::string& v) { s.streamFile = csv::trim(v); };
  num("scenario.resort_interval", b.resortInterval);
  cnt("scenario.capacity", b.capacity);

  h["layout.width"] = [&width](const std::string& v) { width = static_cast<int>(count("layout.width", v)); };
  h["layout.height"] = [&height](const std::string& v) { height = static_cast<int>(count("layout.height", v)); };
  num("layout.cell_size", b.layout.cellSize);
  num("layout.obstacle_fraction", b.layout.obstacleFraction);
  num("layout.zone_f_fraction", b.layout.zoneFFraction);

  num("cost.delta1", c.delta1);
  num("cost.delta2", c.delta2);
  num("cost.electricity_price", c.electricityPrice);
  num("cost.holding_rate", c.holdingRate);
  h["cost.uihc"] = [&c](const std::string& v) { c.uihc = number("cost.uihc", v); };
  num("cost.beta", c.beta);
  num("cost.wt", c.wt);
  num("cost.self_weight", c.selfWeightKg);
  num("cost.payload_limit", c.payloadLimitKg);
  num("cost.speed", c.speed);
  num("cost.battery_budget", c.batteryBudget);
  h["cost.delay_caps"] = [&b](const std::string& v) { b.delayCaps = tuple<kClassCount>("cost.delay_caps", v); };
  num("cost.saturation_factor", b.saturationFactor);

  cnt("sim.replan_after", b.replanAfterTicks);
  cnt("sim.stall_limit", b.stallLimitTicks);
  num("sim.battery_margin", b.batteryMargin);

  h["train.scenario"] = [&s](const std::string& v) {
    const auto x = lower(csv::trim(v));
    if (x == "single-goal") s.train.scenario = TrainScenario::SingleGoal;
    else if (x == "small-warehouse") s.train.scenario = TrainScenario::SmallWarehouse;
    else throw ValidationError("train.scenario", "expected single-goal or small-warehouse, got '" + v + "'");
  };
  cnt("train.scenario_seed", s.train.scenarioSeed);
  h["train.rule"] = [&s](const std::string& v) {
    try {
      s.train.rule = parse_rule(lower(csv::trim(v)));
    } catch (const Error&) {
      throw ValidationError("train.rule", "unknown rule '" + v + "'");
    }
  };
  cnt("train.seed", t.seed);
  cnt("train.episodes", t.episodes);
  num("train.gamma", t.gamma);
  num("train.epsilon_start", t.epsilonStart);
  num("train.epsilon_decay", t.epsilonDecay);
  num("train.epsilon_min", t.epsilonMin);
  num("train.xi_start", t.xiStart);
  num("train.xi_decay", t.xiDecay);
  cnt("train.buffer", t.bufferCapacity);
  cnt("train.batch", t.batchSize);
  cnt("train.target_sync", t.targetSync);
  cnt("train.hidden", t.hidden);
  num("train.learning_rate", t.learningRate);
  cnt("train.train_every", t.trainEvery);
  num("train.divergence_loss", t.divergenceLoss);

  num("reward.tick", t.rewards.tick);
  num("reward.sub_goal", t.rewards.subGoal);
  num("reward.loop_complete", t.rewards.loopComplete);
  num("reward.blocked", t.rewards.blocked);
  num("reward.per_wh", t.rewards.perWh);
  return h;
}

}  // namespace

ScenarioSpec parse_spec(std::istream& in, const EnvVars& env) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }

  // flatten to "section.key" -> value; the environment wins
  std::map<std::string, std::string> values;
  for (const auto& [name, node] : tree) {
    if (is_section(name)) {
      for (const auto& [key, leaf] : node) values[name + "." + key] = leaf.data();
    } else if (node.empty()) {
      values[name] = node.data();
    } else {
      throw ValidationError(name, "unknown section");
    }
  }
  for (const auto& [var, value] : env) {
    if (var.rfind("AGVSB_", 0) != 0) continue;
    const std::string rest = lower(var.substr(6));
    const auto sep = rest.find("__");
    values[sep == std::string::npos ? rest : rest.substr(0, sep) + "." + rest.substr(sep + 2)] = value;
  }

  ScenarioSpec spec;
  spec.train.config.seed = 0;  // follows the top-level seed unless set
  std::optional<int> width, height;
  const auto table = handlers(spec, width, height);
  for (const auto& [key, value] : values) {
    const auto it = table.find(key);
    if (it == table.end()) throw ValidationError(key, "unknown key");
    it->second(value);
  }
  if (width.has_value() != height.has_value())
    throw ValidationError("layout", "width and height must be given together");
  if (width) spec.base.layout.dims = GridDims{*width, *height};
  if (!values.count("train.seed")) spec.train.config.seed = spec.seed;
  if (!values.count("train.scenario_seed")) spec.train.scenarioSeed = spec.seed;
  spec.validate();
  return spec;
}

ScenarioSpec load_spec(const std::filesystem::path& path, const EnvVars& env) {
  std::ifstream in(path);
  if (!in) throw ValidationError("spec", "cannot open " + path.string());
  return parse_spec(in, env);
}

void ScenarioSpec::validate() const {
  if (replications < 1) throw ValidationError("replications", "must be at least 1");
  if (layouts.empty() || fleets.empty() || orders.empty() || owts.empty() || dtws.empty() || rules.empty())
    throw ValidationError("scenario", "every sweep axis needs at least one value");
  if (base.layout.dims && (base.layout.dims->width < 3 || base.layout.dims->height < 3))
    throw ValidationError("layout", "grid must be at least 3 x 3");
  if (!(base.layout.obstacleFraction >= 0.0 && base.layout.obstacleFraction < 1.0))
    throw ValidationError("layout.obstacle_fraction", "must lie in [0, 1)");
  if (!(base.layout.zoneFFraction > 0.0 && base.layout.zoneFFraction < 1.0))
    throw ValidationError("layout.zone_f_fraction", "must lie in (0, 1)");
  if (!(base.layout.cellSize > 0.0)) throw ValidationError("layout.cell_size", "must be positive");
  for (const auto& p : expand(*this)) p.config.validate();
  train.config.validate();
}

std::size_t ScenarioSpec::pointCount() const {
  return layouts.size() * fleets.size() * orders.size() * owts.size() * dtws.size() * rules.size() * replications;
}

std::vector<SweepPoint> expand(const ScenarioSpec& spec) {
  std::vector<SweepPoint> out;
  out.reserve(spec.pointCount());
  std::size_t point = 0;
  for (const auto layout : spec.layouts)
    for (const auto fleet : spec.fleets)
      for (const auto n : spec.orders)
        for (const auto& owt : spec.owts)
          for (const auto& dtw : spec.dtws)
            for (std::size_t rep = 0; rep < spec.replications; ++rep, ++point)
              for (const auto rule : spec.rules) {
                SweepPoint p;
                p.index = out.size();
                p.point = point;
                p.replication = rep;
                p.config = spec.base;
                p.config.layoutScale = layout;
                p.config.fleetSize = fleet;
                p.config.orderQuantity = n;
                p.config.owt = owt;
                p.config.dtw = dtw;
                p.config.rule = rule;
                p.config.seed = mix_seed(spec.seed, point);
                out.push_back(std::move(p));
              }
  return out;
}

// ---------------------------------------------------------------- running

namespace {

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

std::string identity_failure(const KpiReport& k, const CostParams& c) {
  if (!close(k.OpT, k.TrT + k.WT)) return "OpT != TrT + WT";
  if (!close(k.E, k.E1 + k.E2)) return "E != E1 + E2";
  if (!close(k.CoT, k.CoI + c.beta * k.CoD)) return "CoT != CoI + beta*CoD";
  if (!close(k.CoS, k.CoE + k.CoT)) return "CoS != CoE + CoT";
  return {};
}

}  // namespace

SweepRow run_point(const ScenarioSpec& spec, const SweepPoint& point, SimTrace* traceOut) {
  SweepRow row;
  row.point = point;
  const SimConfig& cfg = point.config;
  try {
    const auto map = generate_layout(cfg.layoutScale, mix_seed(cfg.seed, 1), cfg.layout);
    OrderStream stream;
    if (spec.streamFile)
      stream = ingest_csv(*spec.streamFile, map, cfg.owt, cfg.dtw, mix_seed(cfg.seed, 2)).stream;
    else
      stream = synthesize_stream(cfg.orderQuantity, map, cfg.classMix, cfg.owt, cfg.dtw, mix_seed(cfg.seed, 2));
    row.streamSize = stream.orders.size();
    auto result = run(cfg, map, stream);
    const auto violations = validate_constraints(result.trace);
    if (!violations.empty()) {
      row.error = std::to_string(violations.size()) + " constraint violation(s), first " +
                  std::string(constraint_name(violations.front().code)) + ": " + violations.front().detail;
      return row;
    }
    if (auto bad = identity_failure(result.kpi, cfg.cost); !bad.empty()) {
      row.error = "accounting identity failed: " + bad;
      return row;
    }
    row.kpi = result.kpi;
    if (traceOut) *traceOut = std::move(result.trace);
  } catch (const DeadlockError& e) {
    row.error = e.what();
    row.aborted = true;
  } catch (const ValidationError& e) {
    row.error = e.what();
    row.invalid = true;
  } catch (const ParseError& e) {
    row.error = e.what();
    row.invalid = true;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::vector<SweepRow> run_sweep(const ScenarioSpec& spec, std::size_t jobs) {
  const auto points = expand(spec);
  std::vector<SweepRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) rows[i] = run_point(spec, points[i]);
  };
  const std::size_t n = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, points.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

// ---------------------------------------------------------------- results

std::string format_owt(const Interval& owt) { return csv::shortest(owt.lo) + "-" + csv::shortest(owt.hi); }

std::string format_dtw(const DeadlineWindows& dtw) {
  std::string out;
  for (std::size_t i = 0; i < kClassCount; ++i) out += (i ? "/" : "") + csv::shortest(dtw.hours[i]);
  return out;
}

Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ValidationError("format", "expected csv or json");
}

namespace {

std::array<double, 14> kpi_values(const KpiReport& k) {
  return {k.TrT, k.WT, k.OpT, k.E1, k.CoI, k.CoD, k.EmT, k.RT, k.E2, k.E, k.CoE, k.CoT, k.SRT, k.CoS};
}

void write_json(std::ostream& out, const ordered_json& j) { out << j.dump(2) << '\n'; }

}  // namespace

void write_results(std::ostream& out, const std::vector<SweepRow>& rows, Format format) {
  if (format == Format::Csv) {
    for (std::size_t i = 0; i < kResultColumns.size(); ++i) out << (i ? "," : "") << kResultColumns[i];
    out << '\n';
    for (const auto& r : rows) {
      if (!r.kpi) continue;
      const auto& c = r.point.config;
      out << scale_name(c.layoutScale) << ',' << c.fleetSize << ',' << r.streamSize << ',' << format_owt(c.owt) << ','
          << format_dtw(c.dtw);
      for (const double v : kpi_values(*r.kpi)) out << ',' << csv::shortest(v);
      out << ',' << rule_label(c.rule) << ',' << c.seed << ',' << csv::shortest(r.kpi->serviceLevel) << '\n';
    }
    return;
  }
  auto arr = ordered_json::array();
  for (const auto& r : rows) {
    if (!r.kpi) continue;
    const auto& c = r.point.config;
    ordered_json o;
    o["Layout"] = scale_name(c.layoutScale);
    o["FS"] = c.fleetSize;
    o["OQ"] = r.streamSize;
    o["OWT"] = format_owt(c.owt);
    o["DTW"] = format_dtw(c.dtw);
    const auto v = kpi_values(*r.kpi);
    for (std::size_t i = 0; i < v.size(); ++i) o[std::string(kResultColumns[5 + i])] = v[i];
    o["Rule"] = rule_label(c.rule);
    o["Seed"] = c.seed;
    o["ServiceLevel"] = r.kpi->serviceLevel;
    arr.push_back(std::move(o));
  }
  write_json(out, arr);
}

std::size_t write_errors(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "Layout,FS,OQ,OWT,DTW,Rule,Seed,Error\n";
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.kpi) continue;
    const auto& c = r.point.config;
    out << scale_name(c.layoutScale) << ',' << c.fleetSize << ',' << c.orderQuantity << ',' << format_owt(c.owt) << ','
        << format_dtw(c.dtw) << ',' << rule_label(c.rule) << ',' << c.seed << ',' << csv::escape(r.error) << '\n';
    ++n;
  }
  return n;
}

double ResultRow::value(std::string_view column) const {
  if (column == "ServiceLevel") return serviceLevel;
  for (std::size_t i = 0; i < kpi.size(); ++i)
    if (kResultColumns[5 + i] == column) return kpi[i];
  throw ValidationError("column", "unknown KPI '" + std::string(column) + "'");
}

std::vector<ResultRow> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = csv::split(line);
  if (header.size() != kResultColumns.size() || !std::equal(header.begin(), header.end(), kResultColumns.begin()))
    throw ParseError(1, "header does not match the results column order");
  std::vector<ResultRow> rows;
  std::size_t rowNo = 1;
  while (std::getline(in, line)) {
    ++rowNo;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != kResultColumns.size())
      throw ParseError(rowNo, "expected " + std::to_string(kResultColumns.size()) + " fields");
    auto num = [&](std::size_t i) {
      const auto v = csv::parse_double(f[i]);
      if (!v) throw ParseError(rowNo, std::string(kResultColumns[i]) + " is not a number");
      return *v;
    };
    ResultRow r;
    r.layout = f[0];
    r.fs = static_cast<long>(num(1));
    r.oq = static_cast<long>(num(2));
    r.owt = f[3];
    r.dtw = f[4];
    for (std::size_t i = 0; i < r.kpi.size(); ++i) r.kpi[i] = num(5 + i);
    r.rule = f[19];
    const auto seed = csv::parse_int(f[20]);
    if (!seed) {
      // seeds above 2^63 do not fit parse_int
      try {
        r.seed = std::stoull(f[20]);
      } catch (const std::exception&) {
        throw ParseError(rowNo, "Seed is not an integer");
      }
    } else {
      r.seed = static_cast<std::uint64_t>(*seed);
    }
    r.serviceLevel = num(21);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------- comparison

std::optional<double> percent_delta(double value, double baseline) {
  if (baseline == 0.0) return std::nullopt;
  return (value - baseline) / std::abs(baseline) * 100.0;
}

namespace {

constexpr std::array<Rule, 6> kRuleOrder{Rule::FCFS, Rule::SPT, Rule::EDT, Rule::LDC, Rule::PDSP, Rule::DCSP};

int rule_rank(const std::string& label) {
  for (std::size_t i = 0; i < kRuleOrder.size(); ++i)
    if (rule_label(kRuleOrder[i]) == label) return static_cast<int>(i);
  return static_cast<int>(kRuleOrder.size());
}

}  // namespace

Comparison compare_rules(const std::vector<ResultRow>& rows) {
  std::vector<std::string> scenarios;
  std::map<std::pair<std::string, std::string>, GroupSummary> acc;
  for (const auto& r : rows) {
    const std::string scenario = r.layout + " FS" + std::to_string(r.fs) + " OQ" + std::to_string(r.oq) + " OWT " +
                                 r.owt + " DTW " + r.dtw;
    if (std::find(scenarios.begin(), scenarios.end(), scenario) == scenarios.end()) scenarios.push_back(scenario);
    auto& g = acc[{scenario, r.rule}];
    if (g.runs == 0) {
      g.scenario = scenario;
      g.layout = r.layout;
      g.fs = r.fs;
      g.oq = r.oq;
      g.owt = r.owt;
      g.dtw = r.dtw;
      g.rule = r.rule;
    }
    ++g.runs;
    for (std::size_t i = 0; i < kKpiColumns.size(); ++i) g.mean[i] += r.value(kKpiColumns[i]);
  }

  Comparison c;
  for (const auto& s : scenarios) {
    std::vector<GroupSummary> here;
    for (auto& [key, g] : acc)
      if (key.first == s) here.push_back(g);
    std::stable_sort(here.begin(), here.end(), [](const GroupSummary& a, const GroupSummary& b) {
      const int ra = rule_rank(a.rule), rb = rule_rank(b.rule);
      return ra != rb ? ra < rb : a.rule < b.rule;
    });
    for (auto& g : here)
      for (auto& m : g.mean) m /= static_cast<double>(g.runs);

    for (const auto proposed : {Rule::PDSP, Rule::DCSP}) {
      const auto p = std::find_if(here.begin(), here.end(), [&](const GroupSummary& g) { return g.rule == rule_label(proposed); });
      if (p == here.end()) continue;
      for (std::size_t k = 0; k < kKpiColumns.size(); ++k) {
        const bool higherBetter = kKpiColumns[k] == "ServiceLevel";
        const GroupSummary* best = nullptr;
        for (const auto& g : here) {
          const int rank = rule_rank(g.rule);
          if (rank > 3) continue;  // only the four baselines
          if (!best || (higherBetter ? g.mean[k] > best->mean[k] : g.mean[k] < best->mean[k])) best = &g;
        }
        if (!best) continue;
        Delta d;
        d.scenario = s;
        d.rule = p->rule;
        d.kpi = std::string(kKpiColumns[k]);
        d.baseline = best->rule;
        d.value = p->mean[k];
        d.baselineValue = best->mean[k];
        d.percent = percent_delta(d.value, d.baselineValue);
        c.deltas.push_back(std::move(d));
      }
    }
    for (auto& g : here) c.groups.push_back(std::move(g));
  }
  return c;
}

void write_summary(std::ostream& out, const Comparison& c, Format format) {
  if (format == Format::Json) {
    auto arr = ordered_json::array();
    for (const auto& g : c.groups) {
      ordered_json o;
      o["Layout"] = g.layout;
      o["FS"] = g.fs;
      o["OQ"] = g.oq;
      o["OWT"] = g.owt;
      o["DTW"] = g.dtw;
      o["Rule"] = g.rule;
      o["Runs"] = g.runs;
      for (std::size_t i = 0; i < kKpiColumns.size(); ++i) o[std::string(kKpiColumns[i])] = g.mean[i];
      arr.push_back(std::move(o));
    }
    write_json(out, arr);
    return;
  }
  out << "Layout,FS,OQ,OWT,DTW,Rule,Runs";
  for (const auto k : kKpiColumns) out << ',' << k;
  out << '\n';
  for (const auto& g : c.groups) {
    out << csv::escape(g.layout) << ',' << g.fs << ',' << g.oq << ',' << csv::escape(g.owt) << ','
        << csv::escape(g.dtw) << ',' << csv::escape(g.rule) << ',' << g.runs;
    for (const double m : g.mean) out << ',' << csv::shortest(m);
    out << '\n';
  }
}

void write_deltas(std::ostream& out, const Comparison& c, Format format) {
  if (format == Format::Json) {
    auto arr = ordered_json::array();
    for (const auto& d : c.deltas) {
      ordered_json o;
      o["Scenario"] = d.scenario;
      o["Rule"] = d.rule;
      o["KPI"] = d.kpi;
      o["Value"] = d.value;
      o["Baseline"] = d.baseline;
      o["BaselineValue"] = d.baselineValue;
      o["DeltaPct"] = d.percent ? ordered_json(*d.percent) : ordered_json(nullptr);
      arr.push_back(std::move(o));
    }
    write_json(out, arr);
    return;
  }
  out << "Scenario,Rule,KPI,Value,Baseline,BaselineValue,DeltaPct\n";
  for (const auto& d : c.deltas)
    out << csv::escape(d.scenario) << ',' << d.rule << ',' << d.kpi << ',' << csv::shortest(d.value) << ','
        << d.baseline << ',' << csv::shortest(d.baselineValue) << ',' << (d.percent ? csv::fixed(*d.percent, 2) : "")
        << '\n';
}

namespace {

std::string xml(std::string_view s) {
  std::string out;
  for (const char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

double nice_ceiling(double x) {
  if (!(x > 0.0)) return 1.0;
  const double e = std::pow(10.0, std::floor(std::log10(x)));
  const double f = x / e;
  const double n = f <= 1.0 ? 1.0 : f <= 2.0 ? 2.0 : f <= 5.0 ? 5.0 : 10.0;
  return n * e;
}

std::string_view rule_colour(const std::string& label) {
  static constexpr std::array<std::string_view, 7> colours{"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                                          "#59a14f", "#edc948", "#9c755f"};
  return colours[static_cast<std::size_t>(rule_rank(label))];
}

}  // namespace

std::string render_svg(const Comparison& c, std::string_view kpi) {
  std::size_t k = 0;
  while (k < kKpiColumns.size() && kKpiColumns[k] != kpi) ++k;
  if (k == kKpiColumns.size()) throw ValidationError("kpi", "unknown KPI '" + std::string(kpi) + "'");

  std::vector<std::string> scenarios, rules;
  double top = 0.0;
  for (const auto& g : c.groups) {
    if (std::find(scenarios.begin(), scenarios.end(), g.scenario) == scenarios.end()) scenarios.push_back(g.scenario);
    if (std::find(rules.begin(), rules.end(), g.rule) == rules.end()) rules.push_back(g.rule);
    top = std::max(top, g.mean[k]);
  }
  std::stable_sort(rules.begin(), rules.end(), [](const std::string& a, const std::string& b) { return rule_rank(a) < rule_rank(b); });
  const double yMax = nice_ceiling(top);

  const double bar = 18.0, gap = 36.0, left = 80.0, right = 130.0, plotTop = 50.0, plotH = 260.0;
  const double groupW = std::max<double>(1, static_cast<double>(rules.size())) * bar + gap;
  const double width = left + right + std::max<double>(1, static_cast<double>(scenarios.size())) * groupW;
  const double height = plotTop + plotH + 70.0;
  const double base = plotTop + plotH;
  auto f = [](double v) { return csv::fixed(v, 2); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f(width) << "\" height=\"" << f(height)
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << f(left) << "\" y=\"24\" font-size=\"15\">" << xml(kpi) << " by rule</text>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = yMax * t / 5.0;
    const double y = base - plotH * t / 5.0;
    s << "<line x1=\"" << f(left) << "\" y1=\"" << f(y) << "\" x2=\"" << f(width - right) << "\" y2=\"" << f(y)
      << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << f(left - 6) << "\" y=\"" << f(y + 4) << "\" text-anchor=\"end\">" << csv::shortest(v)
      << "</text>\n";
  }
  for (std::size_t gi = 0; gi < scenarios.size(); ++gi) {
    const double gx = left + gap / 2 + static_cast<double>(gi) * groupW;
    for (std::size_t ri = 0; ri < rules.size(); ++ri) {
      const auto it = std::find_if(c.groups.begin(), c.groups.end(), [&](const GroupSummary& g) {
        return g.scenario == scenarios[gi] && g.rule == rules[ri];
      });
      if (it == c.groups.end()) continue;
      const double h = plotH * std::max(0.0, it->mean[k]) / yMax;
      s << "<rect x=\"" << f(gx + static_cast<double>(ri) * bar) << "\" y=\"" << f(base - h) << "\" width=\""
        << f(bar - 2) << "\" height=\"" << f(h) << "\" fill=\"" << rule_colour(rules[ri]) << "\"><title>"
        << xml(rules[ri]) << ' ' << csv::shortest(it->mean[k]) << "</title></rect>\n";
    }
    s << "<text x=\"" << f(gx + static_cast<double>(rules.size()) * bar / 2) << "\" y=\"" << f(base + 18)
      << "\" text-anchor=\"middle\" font-size=\"9\">" << xml(scenarios[gi]) << "</text>\n";
  }
  s << "<line x1=\"" << f(left) << "\" y1=\"" << f(base) << "\" x2=\"" << f(width - right) << "\" y2=\"" << f(base)
    << "\" stroke=\"black\"/>\n";
  for (std::size_t ri = 0; ri < rules.size(); ++ri) {
    const double y = plotTop + 16.0 * static_cast<double>(ri);
    s << "<rect x=\"" << f(width - right + 16) << "\" y=\"" << f(y) << "\" width=\"12\" height=\"12\" fill=\""
      << rule_colour(rules[ri]) << "\"/>\n";
    s << "<text x=\"" << f(width - right + 34) << "\" y=\"" << f(y + 10) << "\">" << xml(rules[ri]) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// ---------------------------------------------------------------- replay

ReplaySummary replay(const std::vector<TraceEvent>& events, std::optional<Cell> station) {
  ReplaySummary out;
  if (!station) {
    const auto it = std::find_if(events.begin(), events.end(), [](const TraceEvent& e) { return e.kind == EventKind::Dispatch; });
    station = it != events.end() ? it->cell : Cell{};
  }
  out.station = *station;
  std::map<AgvId, ReplaySummary::Agv> agvs;
  for (const auto& e : events) {
    auto& a = agvs[e.agv];
    a.id = e.agv;
    a.lastTick = std::max(a.lastTick, e.tick);
    switch (e.kind) {
      case EventKind::Move: ++a.moves; break;
      case EventKind::Wait: ++a.waits; break;
      case EventKind::Pickup: ++a.pickups; break;
      case EventKind::Deliver: ++a.deliveries; break;
      case EventKind::Recharge: ++a.recharges; break;
      case EventKind::Replan: ++a.replans; break;
      case EventKind::Dispatch: break;
    }
  }
  for (auto& [id, a] : agvs) out.agvs.push_back(a);
  out.collisions = find_collisions(events, out.station).size();
  return out;
}

void write_replay(std::ostream& out, const ReplaySummary& s, Format format) {
  if (format == Format::Json) {
    ordered_json o;
    o["station"] = {s.station.x, s.station.y};
    o["collisions"] = s.collisions;
    auto arr = ordered_json::array();
    for (const auto& a : s.agvs) {
      ordered_json j;
      j["agv"] = a.id;
      j["moves"] = a.moves;
      j["waits"] = a.waits;
      j["pickups"] = a.pickups;
      j["deliveries"] = a.deliveries;
      j["recharges"] = a.recharges;
      j["replans"] = a.replans;
      j["lastTick"] = a.lastTick;
      arr.push_back(std::move(j));
    }
    o["agvs"] = std::move(arr);
    write_json(out, o);
    return;
  }
  out << "agv,moves,waits,pickups,deliveries,recharges,replans,lastTick\n";
  for (const auto& a : s.agvs)
    out << a.id << ',' << a.moves << ',' << a.waits << ',' << a.pickups << ',' << a.deliveries << ',' << a.recharges
        << ',' << a.replans << ',' << a.lastTick << '\n';
}

Scenario make_train_scenario(const TrainSpec& spec) {
  Scenario s = spec.scenario == TrainScenario::SingleGoal ? single_goal_scenario()
                                                           : small_warehouse_scenario(spec.scenarioSeed);
  s.rule = spec.rule;
  return s;
}

}  // namespace agvsb::cli
