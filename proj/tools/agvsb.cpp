// agvsb: warehouse AGV scheduling benchmark harness.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "agvsb/cli.hpp"
#include "agvsb/csv.hpp"

namespace fs = std::filesystem;
using namespace agvsb;
using namespace agvsb::cli;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kAbort = 2 };

struct Options {
  std::string input;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string outDir = ".";
  std::string format = "csv";
  std::string station;
};

std::ofstream open_out(const Options& o, const std::string& name) {
  fs::create_directories(o.outDir);
  const auto path = fs::path(o.outDir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("out-dir", "cannot write " + path.string());
  return out;
}

std::string ext(Format f) { return f == Format::Json ? ".json" : ".csv"; }

ScenarioSpec spec_for(const Options& o) {
  auto spec = load_spec(o.input, process_environment());
  if (o.seed) {
    spec.seed = *o.seed;
    spec.train.config.seed = *o.seed;
    spec.train.scenarioSeed = *o.seed;
  }
  return spec;
}

int exit_for(const std::vector<SweepRow>& rows) {
  int code = kOk;
  for (const auto& r : rows) {
    if (r.kpi) continue;
    if (r.aborted || !r.invalid) return kAbort;
    code = kInvalid;
  }
  return code;
}

void print_kpi(const SweepRow& r) {
  const auto& k = *r.kpi;
  std::cout << rule_label(r.point.config.rule) << " seed " << r.point.config.seed << ": TrT " << csv::fixed(k.TrT, 2)
            << " s, WT " << csv::fixed(k.WT, 2) << " s, E " << csv::fixed(k.E, 2) << " Wh, CoS $"
            << csv::fixed(k.CoS, 2) << ", service level " << csv::fixed(k.serviceLevel, 3) << '\n';
}

int simulate(const Options& o) {
  const auto spec = spec_for(o);
  const auto points = expand(spec);
  if (points.size() != 1)
    throw ValidationError("scenario", "simulate runs exactly one point (got " + std::to_string(points.size()) +
                                          "); use sweep");
  const Format f = parse_format(o.format);
  SimTrace trace;
  const auto row = run_point(spec, points.front(), &trace);
  const std::vector<SweepRow> rows{row};
  auto results = open_out(o, "results" + ext(f));
  write_results(results, rows, f);
  if (!row.kpi) {
    std::cerr << "error: " << row.error << '\n';
    return exit_for(rows);
  }
  auto traceFile = open_out(o, "trace.csv");
  write_trace(traceFile, trace.events);
  print_kpi(row);
  return kOk;
}

int sweep(const Options& o) {
  const auto spec = spec_for(o);
  const Format f = parse_format(o.format);
  const auto rows = run_sweep(spec, o.jobs);
  auto results = open_out(o, "results" + ext(f));
  write_results(results, rows, f);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.kpi ? 0 : 1;
  if (failed) {
    auto errors = open_out(o, "errors.csv");
    write_errors(errors, rows);
    for (const auto& r : rows)
      if (!r.kpi) std::cerr << "point " << r.point.index << " failed: " << r.error << '\n';
  }
  std::cout << rows.size() - failed << " of " << rows.size() << " points written to "
            << (fs::path(o.outDir) / ("results" + ext(f))).string() << '\n';
  return exit_for(rows);
}

int compare(const Options& o) {
  std::ifstream in(o.input);
  if (!in) throw ValidationError("input", "cannot open " + o.input);
  const Format f = parse_format(o.format);
  const auto c = compare_rules(read_results(in));
  auto summary = open_out(o, "summary" + ext(f));
  write_summary(summary, c, f);
  auto deltas = open_out(o, "deltas" + ext(f));
  write_deltas(deltas, c, f);
  fs::create_directories(fs::path(o.outDir) / "charts");
  for (const auto kpi : kKpiColumns) {
    auto svg = open_out(o, "charts/" + std::string(kpi) + ".svg");
    svg << render_svg(c, kpi);
  }
  for (const auto& d : c.deltas) {
    if (d.kpi != "CoD" && d.kpi != "CoS" && d.kpi != "ServiceLevel") continue;
    std::cout << d.scenario << ": " << d.rule << ' ' << d.kpi << ' '
              << (d.percent ? csv::fixed(*d.percent, 2) + "%" : std::string("n/a")) << " vs " << d.baseline << '\n';
  }
  return kOk;
}

int train_verb(const Options& o) {
  const auto spec = spec_for(o);
  const Format f = parse_format(o.format);
  const auto scenario = make_train_scenario(spec.train);
  const auto result = train(spec.train.config, scenario);
  if (f == Format::Csv) {
    auto curves = open_out(o, "curves.csv");
    write_curves_csv(curves, result.curve);
  } else {
    auto curves = open_out(o, "curves.json");
    curves << "[\n";
    for (std::size_t i = 0; i < result.curve.size(); ++i) {
      const auto& s = result.curve[i];
      curves << "  {\"episode\": " << s.episode << ", \"cumulativeReward\": " << csv::shortest(s.reward)
             << ", \"meanLoss\": " << csv::shortest(s.meanLoss) << ", \"epsilon\": " << csv::shortest(s.epsilon)
             << (i + 1 < result.curve.size() ? "},\n" : "}\n");
    }
    curves << "]\n";
  }
  auto params = open_out(o, "policy.qnet");
  save_params(params, result.q);
  const auto eval = evaluate_policy(result.q, scenario);
  std::cout << "episodes " << result.curve.size() << ", final reward " << csv::fixed(result.curve.back().reward, 3)
            << "; evaluation " << (eval.completed ? "completed" : "incomplete") << " in " << eval.steps
            << " ticks, " << eval.greedyMoves << " greedy / " << eval.fallbackMoves << " fallback moves, "
            << eval.collisions << " collisions\n";
  return kOk;
}

int replay_verb(const Options& o) {
  std::ifstream in(o.input);
  if (!in) throw ValidationError("input", "cannot open " + o.input);
  const Format f = parse_format(o.format);
  std::optional<Cell> station;
  if (!o.station.empty()) {
    const auto parts = csv::split(o.station);
    const auto x = parts.size() == 2 ? csv::parse_int(parts[0]) : std::nullopt;
    const auto y = parts.size() == 2 ? csv::parse_int(parts[1]) : std::nullopt;
    if (!x || !y) throw ValidationError("station", "expected x,y");
    station = Cell{static_cast<int>(*x), static_cast<int>(*y)};
  }
  const auto summary = replay(read_trace(in), station);
  auto out = open_out(o, "replay" + ext(f));
  write_replay(out, summary, f);
  std::cout << summary.agvs.size() << " AGVs, " << summary.collisions << " collisions\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AGV warehouse scheduling benchmark"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("input", o.input, what)->required();
    sub->add_option("--out-dir", o.outDir, "Directory for output files");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* sim = app.add_subcommand("simulate", "Run one scenario point");
  common(sim, "Scenario file");
  sim->add_option("--seed", o.seed, "Override the scenario seed");
  auto* sw = app.add_subcommand("sweep", "Run every point of a scenario sweep");
  common(sw, "Scenario file");
  sw->add_option("--seed", o.seed, "Override the scenario seed");
  sw->add_option("--jobs", o.jobs, "Concurrent simulations")->check(CLI::PositiveNumber);
  auto* cmp = app.add_subcommand("compare", "Summarise a results CSV and draw charts");
  common(cmp, "Results CSV");
  auto* tr = app.add_subcommand("train", "Train the guided DQN agent");
  common(tr, "Scenario file");
  tr->add_option("--seed", o.seed, "Override the training seed");
  auto* rp = app.add_subcommand("replay", "Summarise an event trace");
  common(rp, "Trace file");
  rp->add_option("--station", o.station, "Station cell x,y (default: first dispatch cell)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*sim) return simulate(o);
    if (*sw) return sweep(o);
    if (*cmp) return compare(o);
    if (*tr) return train_verb(o);
    if (*rp) return replay_verb(o);
  } catch (const ValidationError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kInvalid;
  } catch (const ParseError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kInvalid;
  } catch (const DeadlockError& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kAbort;
  } catch (const DivergenceError& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAbort;
  }
  return kOk;
}
