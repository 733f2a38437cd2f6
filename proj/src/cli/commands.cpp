#include "mibo/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mibo/csi/dataset.hpp"
#include "mibo/io.hpp"
#include "mibo/metrics/metrics.hpp"
#include "mibo/metrics/report.hpp"
#include "mibo/metrics/stationarity.hpp"
#include "mibo/models/checkpoint.hpp"
#include "mibo/models/features.hpp"

namespace mibo::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Method m) {
  switch (m) {
    case Method::spg_mibo: return "spg-mibo";
    case Method::penalty: return "penalty";
    case Method::single_task: return "single-task";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "spg-mibo") return Method::spg_mibo;
  if (s == "penalty") return Method::penalty;
  if (s == "single-task") return Method::single_task;
  throw std::invalid_argument("unknown method '" + s + "'");
}

namespace {

std::string task_name(solver::Task t) { return t == solver::Task::localization ? "loc" : "sen"; }

std::string method_label(Method m, std::optional<solver::Task> task) {
  return m == Method::single_task ? to_string(m) + ":" + task_name(*task) : to_string(m);
}

// Prepares an output directory: refuses to clobber existing content unless
// forced, and never touches a directory that contains `protect`.
void prepare_out(const fs::path& out, bool force, const fs::path& protect = {}) {
  if (out.empty()) throw IoError("no output directory given (--out)");
  if (!protect.empty() && fs::exists(out) && fs::exists(protect)) {
    const auto o = fs::weakly_canonical(out);
    const auto p = fs::weakly_canonical(protect);
    const auto [end, _] = std::mismatch(o.begin(), o.end(), p.begin(), p.end());
    if (end == o.end()) throw IoError("refusing to write into '" + out.string() + "': it holds the input dataset");
  }
  if (fs::exists(out) && !fs::is_directory(out)) throw IoError("'" + out.string() + "' exists and is not a directory");
  if (fs::exists(out) && !fs::is_empty(out)) {
    if (!force) throw IoError("output directory '" + out.string() + "' is not empty; pass --force to overwrite");
    fs::remove_all(out);
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create '" + out.string() + "': " + ec.message());
}

void fnv1a(std::uint64_t& h, const std::string& bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw IoError(what + ": missing " + p.string());
}

json read_json(const fs::path& p) {
  require_file(p, "cannot read JSON");
  try {
    return json::parse(io::read_text(p));
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + p.string() + ": " + e.what());
  }
}

fs::path seed_dir(const fs::path& run, std::uint64_t seed) { return run / ("seed-" + std::to_string(seed)); }
fs::path fold_dir(const fs::path& run, std::uint64_t seed, std::size_t fold) {
  return seed_dir(run, seed) / ("fold-" + std::to_string(fold));
}

struct FoldOutcome {
  metrics::NamedMetrics metrics;
};

void add_slopes(const std::vector<solver::HistoryRow>& history, metrics::NamedMetrics& out) {
  if (history.size() < 20) return;
  const auto series = metrics::stationarity_series(history);
  auto add = [&](const char* name, const std::vector<double>& s) {
    try {
      out.emplace_back(name, metrics::fit_convergence_slope(s));
    } catch (const std::invalid_argument&) {
      // Identically zero tails (e.g. no active dual constraint) have no slope.
    }
  };
  add("slope_S_w", series.s_w);
  add("slope_S_u", series.s_u);
  add("slope_S_v", series.s_v);
}

FoldOutcome train_fold(const RunConfig& config, const TrainRequest& req, const models::TaskTable& base,
                       std::uint64_t seed, std::size_t fold, const std::vector<std::size_t>& train,
                       const std::vector<std::size_t>& test) {
  const fs::path dir = fold_dir(req.out, seed, fold);
  fs::create_directories(dir);
  models::TaskTable table = base;
  table.standardize(train);

  solver::SolverConfig sc = config.solver;
  sc.seed = seed;
  sc.history_path = dir / "history.csv.partial";
  solver::BilevelProblem problem(table, train, sc);
  const auto loc_test = table.batch(test, models::HeadKind::position);
  const auto sen_test = table.batch(test, problem.sensing_head);
  const bool has_loc = req.method != Method::single_task || *req.task == solver::Task::localization;
  const bool has_sen = req.method != Method::single_task || *req.task == solver::Task::sensing;

  // Best-validation snapshot of w for the gap, scored on the held-out fold.
  std::vector<double> best_w;
  double best_score = std::numeric_limits<double>::infinity();
  if (config.gap_snapshot == GapSnapshot::best_validation) {
    sc.observe_every = config.validate_every;
    sc.observer = [&](std::size_t, const std::vector<double>& t1, const std::vector<double>& t2,
                      const std::vector<double>& w) {
      double score = 0.0;
      if (has_loc) score += problem.localization.loss(loc_test, t1, w);
      if (has_sen) score += problem.sensing.loss(sen_test, t2, w);
      if (score < best_score) {
        best_score = score;
        best_w = w;
      }
    };
  }

  solver::RunResult r;
  switch (req.method) {
    case Method::spg_mibo: r = solver::run_spg_mibo(problem, sc); break;
    case Method::penalty: r = solver::run_penalty_baseline(problem, sc, sc.lambda_p); break;
    case Method::single_task: r = solver::run_single_task(problem, *req.task, sc); break;
  }

  io::write_file_atomic(dir / "history.csv", solver::history_csv(r.history));
  io::write_file_atomic(dir / "diagnostics.csv", solver::diagnostics_csv(r.history));
  if (has_loc) models::write_checkpoint({problem.localization.spec(), r.theta1, r.w}, dir / "localization");
  if (has_sen) models::write_checkpoint({problem.sensing.spec(), r.theta2, r.w}, dir / "sensing");

  FoldOutcome o;
  if (has_loc) {
    const auto pred = problem.localization.predict(loc_test.features, r.theta1, r.w);
    o.metrics.emplace_back("loc_mse", metrics::task_metric(pred, loc_test.targets, models::HeadKind::position));
  }
  if (has_sen) {
    const auto pred = problem.sensing.predict(sen_test.features, r.theta2, r.w);
    if (problem.sensing_head != models::HeadKind::classification) {
      o.metrics.emplace_back("sen_mse", metrics::task_metric(pred, sen_test.targets, problem.sensing_head));
    }
    o.metrics.emplace_back("sen_acc", metrics::accuracy(pred, sen_test.targets));
  }
  const auto& gap_w = best_w.empty() ? r.w : best_w;
  o.metrics.emplace_back("gap", metrics::integer_feasibility_gap(gap_w));
  add_slopes(r.history, o.metrics);
  return o;
}

metrics::EvalReport train_seed(const RunConfig& config, const TrainRequest& req, const models::TaskTable& table,
                               std::uint64_t seed) {
  auto report = metrics::kfold_evaluate(
      table.size(), config.folds, seed,
      [&, fold = std::size_t{0}](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test) mutable {
        return train_fold(config, req, table, seed, fold++, train, test).metrics;
      });
  report.method = method_label(req.method, req.task);
  io::write_file_atomic(seed_dir(req.out, seed) / "report.json", metrics::report_to_json(report));
  return report;
}

}  // namespace

std::uint64_t dataset_fingerprint(const fs::path& dir) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char* name : {"manifest.json", "h.bin", "m.bin", "p.bin"}) {
    require_file(dir / name, "incomplete dataset");
    fnv1a(h, io::read_text(dir / name));
  }
  return h;
}

std::vector<std::size_t> histogram10(const std::vector<double>& values) {
  std::vector<std::size_t> bins(10, 0);
  for (double v : values) {
    const auto b = static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * 10.0);
    ++bins[std::min<std::size_t>(b, 9)];
  }
  return bins;
}

void cmd_simulate(const RunConfig& config, const fs::path& out, bool force, std::ostream& log) {
  prepare_out(out, force);
  const auto ds = csi::generate_dataset(config.scenario, config.dataset_seed, config.featurization);
  csi::write_dataset(ds, out);
  log << "samples: " << ds.size() << "\n"
      << "subcarriers: " << ds.total_subcarriers() << "\n"
      << "manifest: " << (out / "manifest.json").string() << "\n";
}

metrics::EvalReport cmd_train(const RunConfig& config, const TrainRequest& req, std::ostream& log) {
  if (req.method == Method::single_task && !req.task) throw std::invalid_argument("single-task training needs --task loc|sen");
  if (req.method != Method::single_task && req.task) throw std::invalid_argument("--task only applies to --method single-task");
  csi::Dataset ds;
  try {
    ds = csi::read_dataset(req.data);
  } catch (const std::exception& e) {
    throw IoError("cannot load dataset '" + req.data.string() + "': " + e.what());
  }
  const auto fingerprint = dataset_fingerprint(req.data);
  if (ds.total_subcarriers() != config.scenario.total_subcarriers()) {
    // Solver bounds were validated against the config scenario; recheck for the dataset's.
    try {
      config.solver.validate(ds.total_subcarriers());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ConfigErrorKind::constraint, e.what());
    }
  }
  if (ds.size() < config.folds) {
    throw ConfigError(ConfigErrorKind::constraint, "run.folds (" + std::to_string(config.folds) +
                                                       ") exceeds dataset size (" + std::to_string(ds.size()) + ")");
  }
  prepare_out(req.out, req.force, req.data);
  const auto table = models::TaskTable::from_dataset(ds);

  ordered_json run;
  run["method"] = to_string(req.method);
  run["task"] = req.task ? ordered_json(task_name(*req.task)) : ordered_json(nullptr);
  run["dataset"] = {{"seed", ds.seed}, {"samples", ds.size()}, {"fingerprint", hex(fingerprint)}};
  run["config"] = config_to_json(config);
  io::write_file_atomic(req.out / "run.json", run.dump(2) + "\n");

  std::vector<metrics::EvalReport> per_seed(config.seeds.size());
  std::vector<std::exception_ptr> errors(config.seeds.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < config.seeds.size();) {
      try {
        per_seed[i] = train_seed(config, req, table, config.seeds[i]);
        std::lock_guard lock(log_mutex);
        log << "seed " << config.seeds[i] << " done\n";
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(req.jobs, 1, config.seeds.size());
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  auto merged = metrics::merge_reports(per_seed);
  io::write_file_atomic(req.out / "report.json", metrics::report_to_json(merged));
  log << metrics::render_table({merged});
  return merged;
}

namespace {

struct LoadedRun {
  fs::path dir;
  json run;
  metrics::EvalReport report;
  std::map<std::uint64_t, metrics::EvalReport> seeds;
};

LoadedRun load_run(const fs::path& dir) {
  LoadedRun r;
  r.dir = dir;
  r.run = read_json(dir / "run.json");
  r.report = metrics::report_from_json(io::read_text(dir / "report.json"));
  for (auto seed : r.report.seeds) {
    const auto p = seed_dir(dir, seed) / "report.json";
    require_file(p, "incomplete run directory");
    r.seeds[seed] = metrics::report_from_json(io::read_text(p));
  }
  return r;
}

bool higher_is_better(const std::string& metric) { return metric.size() > 4 && metric.ends_with("_acc"); }

}  // namespace

void cmd_compare(const std::vector<fs::path>& dirs, const fs::path& out, std::ostream& log) {
  if (dirs.size() < 2) throw std::invalid_argument("compare needs at least two run directories");
  std::vector<LoadedRun> runs;
  for (const auto& d : dirs) runs.push_back(load_run(d));
  const auto& fp = runs.front().run.at("dataset").at("fingerprint");
  for (const auto& r : runs) {
    if (r.run.at("dataset").at("fingerprint") != fp) {
      throw IoError("incompatible datasets: '" + runs.front().dir.string() + "' and '" + r.dir.string() +
                    "' were trained on different data");
    }
  }

  std::vector<metrics::EvalReport> labelled;
  for (const auto& r : runs) {
    auto rep = r.report;
    rep.method = rep.method + " (" + r.dir.filename().string() + ")";
    labelled.push_back(std::move(rep));
  }
  log << metrics::render_table(labelled);

  ordered_json doc;
  doc["runs"] = ordered_json::array();
  for (const auto& r : runs) {
    ordered_json e;
    e["dir"] = r.dir.string();
    e["method"] = r.report.method;
    e["metrics"] = ordered_json::object();
    for (const auto& m : r.report.metrics) e["metrics"][m.name] = {{"mean", m.mean}, {"std", m.stddev}};
    doc["runs"].push_back(e);
  }

  // Pairwise against the first run: mean deltas and seed-paired win counts.
  const auto& ref = runs.front();
  doc["pairs"] = ordered_json::array();
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const auto& other = runs[i];
    ordered_json pair;
    pair["reference"] = ref.dir.string();
    pair["other"] = other.dir.string();
    pair["metrics"] = ordered_json::object();
    log << "\n" << ref.dir.filename().string() << " vs " << other.dir.filename().string() << "\n";
    for (const auto& m : ref.report.metrics) {
      const auto* o = other.report.find(m.name);
      if (!o) continue;
      std::size_t wins = 0, paired = 0;
      const bool slope = m.name.rfind("slope_", 0) == 0;
      for (const auto& [seed, rep] : ref.seeds) {
        const auto it = other.seeds.find(seed);
        if (it == other.seeds.end()) continue;
        const auto* a = rep.find(m.name);
        const auto* b = it->second.find(m.name);
        if (!a || !b) continue;
        ++paired;
        wins += higher_is_better(m.name) ? a->mean > b->mean : a->mean < b->mean;
      }
      ordered_json e;
      e["delta"] = m.mean - o->mean;
      e["paired_seeds"] = paired;
      if (!slope) e["reference_wins"] = wins;
      pair["metrics"][m.name] = e;
      char line[160];
      if (slope) {
        std::snprintf(line, sizeof line, "  %-10s delta %+.6f\n", m.name.c_str(), m.mean - o->mean);
      } else {
        std::snprintf(line, sizeof line, "  %-10s delta %+.6f  reference better in %zu/%zu seeds\n", m.name.c_str(),
                      m.mean - o->mean, wins, paired);
      }
      log << line;
    }
    doc["pairs"].push_back(pair);
  }
  if (!out.empty()) {
    fs::create_directories(out);
    io::write_file_atomic(out / "compare.json", doc.dump(2) + "\n");
  }
}

void cmd_report(const fs::path& dir, std::ostream& log) {
  if (!fs::is_directory(dir)) throw IoError("no run directory at '" + dir.string() + "'");
  require_file(dir / "run.json", "incomplete run directory");
  require_file(dir / "report.json", "incomplete run directory");
  const auto run = load_run(dir);
  const std::size_t folds = run.report.folds;

  // Validate everything before writing anything.
  for (const auto& [seed, _] : run.seeds) {
    for (std::size_t f = 0; f < folds; ++f) {
      require_file(fold_dir(dir, seed, f) / "history.csv", "incomplete run directory");
    }
  }

  fs::create_directories(dir / "curves");
  std::vector<double> selections;
  for (const auto& [seed, _] : run.seeds) {
    for (std::size_t f = 0; f < folds; ++f) {
      const auto fd = fold_dir(dir, seed, f);
      const auto history = solver::read_history(fd / "history.csv");
      std::string csv = "iter,loss_s,loss_l\n";
      for (const auto& row : history) {
        csv += std::to_string(row.iter) + "," + io::format17(row.loss_s) + "," + io::format17(row.loss_l) + "\n";
      }
      io::write_file_atomic(dir / "curves" / ("seed-" + std::to_string(seed) + "-fold-" + std::to_string(f) + ".csv"),
                            csv);
      for (const char* part : {"localization", "sensing"}) {
        if (fs::exists(fd / part / "manifest.json")) {
          const auto ck = models::read_checkpoint(fd / part);
          selections.insert(selections.end(), ck.selection.begin(), ck.selection.end());
          break;
        }
      }
    }
  }

  const auto bins = histogram10(selections);
  std::string hist = "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < bins.size(); ++b) {
    char line[64];
    std::snprintf(line, sizeof line, "%.1f,%.1f,%zu\n", b / 10.0, (b + 1) / 10.0, bins[b]);
    hist += line;
  }
  io::write_file_atomic(dir / "w_histogram.csv", hist);

  log << "method: " << run.report.method << "\n"
      << "seeds: " << run.seeds.size() << "  folds: " << folds << "\n\n"
      << metrics::render_table({run.report}) << "\nfinal selection weights (all folds), 10 bins:\n";
  const std::size_t peak = std::max<std::size_t>(1, *std::max_element(bins.begin(), bins.end()));
  for (std::size_t b = 0; b < bins.size(); ++b) {
    char line[64];
    std::snprintf(line, sizeof line, "  [%.1f, %.1f%c %6zu ", b / 10.0, (b + 1) / 10.0, b == 9 ? ']' : ')', bins[b]);
    log << line << std::string(bins[b] * 40 / peak, '#') << "\n";
  }
  log << "\nloss curves: " << (dir / "curves").string() << "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed-integer bilevel subcarrier selection for joint Wi-Fi localization and sensing"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool print_defaults = false;
  bool force = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Run only this seed (overrides run.seeds); dataset seed for simulate");
  app.add_option("--jobs", jobs, "Seeds trained concurrently")->check(CLI::PositiveNumber);
  app.add_flag("--print-defaults", print_defaults, "Print the default config and exit");
  app.add_flag("--force", force, "Overwrite a non-empty output directory");

  auto* simulate = app.add_subcommand("simulate", "Generate a simulated CSI dataset");

  auto* train = app.add_subcommand("train", "Train one method under K-fold evaluation");
  std::string method = "spg-mibo";
  std::string task;
  std::string data;
  train->add_option("--method", method, "spg-mibo | penalty | single-task")
      ->check(CLI::IsMember({"spg-mibo", "penalty", "single-task"}));
  train->add_option("--task", task, "loc | sen (single-task only)")->check(CLI::IsMember({"loc", "sen"}));
  train->add_option("--data", data, "Dataset directory")->required();

  auto* compare = app.add_subcommand("compare", "Compare two or more run directories");
  std::vector<std::string> run_dirs;
  compare->add_option("runs", run_dirs, "Run directories")->required()->expected(2, -1);

  auto* report = app.add_subcommand("report", "Summarize a run and export loss curves");
  std::string report_dir;
  report->add_option("run", report_dir, "Run directory")->required();

  // CLI11 reads options from any subcommand position, so global flags may follow the subcommand.
  for (auto* sub : {simulate, train, compare, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, r;
    const int code = app.exit(e, o, r);
    out << o.str();
    err << r.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig config = config_path.empty() ? parse_config_text("") : parse_config(config_path);
    if (seed) config.seeds = {*seed};
    if (print_defaults) {
      out << config_to_json(config).dump(2) << "\n";
      return kOk;
    }
    if (simulate->parsed()) {
      if (seed) config.dataset_seed = *seed;
      cmd_simulate(config, out_dir, force, out);
    } else if (train->parsed()) {
      TrainRequest req;
      req.method = method_from_string(method);
      if (!task.empty()) req.task = task == "loc" ? solver::Task::localization : solver::Task::sensing;
      req.data = data;
      req.out = out_dir;
      req.jobs = jobs;
      req.force = force;
      if (req.method == Method::single_task && !req.task) {
        err << "error: --method single-task requires --task loc|sen\n";
        return kUsage;
      }
      if (req.method != Method::single_task && req.task) {
        err << "error: --task only applies to --method single-task\n";
        return kUsage;
      }
      cmd_train(config, req, out);
    } else if (compare->parsed()) {
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      cmd_compare(dirs, out_dir, out);
    } else if (report->parsed()) {
      cmd_report(report_dir, out);
    } else {
      err << app.help();
      return kUsage;
    }
  } catch (const ConfigError& e) {
    err << "config error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kConfigError;
  } catch (const solver::SolverAbort& e) {
    err << "solver aborted: " << e.what() << "\n";
    return kSolverAbort;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

}  // namespace mibo::cli
