// alr: command-line front end for pool-based active learning experiments.
//
// Subcommands: synth, normalize, run, compare, saved-queries, unique-queries.
// Exit status: 0 success, 1 data/IO errors, 2 argument errors.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "alr/alr.hpp"

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("ALR_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid ALR_THREADS=\"" << env << "\"\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw alr::DataError("cannot write file: " + path);
  return out;
}

std::vector<alr::LearningCurve> load_curves(const std::vector<std::string>& files) {
  std::vector<alr::LearningCurve> curves;
  for (const auto& f : files) {
    auto part = alr::read_curves_csv(f);
    curves.insert(curves.end(), std::make_move_iterator(part.begin()),
                  std::make_move_iterator(part.end()));
  }
  return curves;
}

// Exact canonical match first, then a unique match on the strategy kind.
const alr::LearningCurve& find_curve(const std::vector<alr::LearningCurve>& curves,
                                     const std::string& name) {
  for (const auto& c : curves) {
    if (c.strategy == name) return c;
  }
  const auto wanted = alr::parse_strategy(name);
  const alr::LearningCurve* found = nullptr;
  for (const auto& c : curves) {
    if (alr::parse_strategy(c.strategy).kind != wanted.kind) continue;
    if (found) throw UsageError("strategy \"" + name + "\" matches several curves; be specific");
    found = &c;
  }
  if (!found) throw alr::DataError("no curve for strategy \"" + name + "\"");
  return *found;
}

void require_same_axis(const alr::LearningCurve& a, const alr::LearningCurve& b) {
  if (a.ks != b.ks || a.task_names != b.task_names) {
    throw alr::DataError("curves \"" + a.strategy + "\" and \"" + b.strategy +
                         "\" have mismatched K axes or task lists");
  }
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t n = 300, d = 10, p = 3;
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::string out, coefficients;
};

int cmd_synth(const SynthArgs& a) {
  const auto synth = alr::gen_synthetic(a.n, a.d, a.p, a.noise, a.seed);
  alr::write_csv(synth.data, a.out);
  if (!a.coefficients.empty()) {
    auto out = open_output(a.coefficients);
    out << "{\n";
    for (std::size_t t = 0; t < synth.coefficients.size(); ++t) {
      out << "  \"" << synth.data.task_names()[t] << "\": [";
      for (Eigen::Index j = 0; j < synth.coefficients[t].size(); ++j) {
        out << (j ? ", " : "") << alr::csv_number(synth.coefficients[t](j));
      }
      out << "]" << (t + 1 < synth.coefficients.size() ? "," : "") << "\n";
    }
    out << "}\n";
  }
  std::cout << "synth: wrote " << a.n << " x " << a.d << " features, " << a.p << " task(s) to "
            << a.out << "\n";
  return 0;
}

struct NormalizeArgs {
  std::string data, out, params, group_column;
  std::size_t tasks = 1;
};

int cmd_normalize(const NormalizeArgs& a) {
  const auto data = alr::load_csv(
      a.data, a.tasks,
      a.group_column.empty() ? std::nullopt : std::optional<std::string>(a.group_column));
  const auto norm = alr::normalize_features(data);
  alr::write_csv(norm.data, a.out);
  if (!a.params.empty()) open_output(a.params) << norm.params.to_json() << "\n";
  std::cout << "normalize: " << data.size() << " rows, " << data.dims() << " features -> "
            << a.out << "\n";
  return 0;
}

struct RunArgs {
  std::string data, out, json, group_column, group_value, solver = "ridge";
  std::string normalize = "global", lambda_k = "labeled";
  std::vector<std::string> strategies;
  std::optional<std::size_t> focus_task, k_max, committee;
  std::size_t tasks = 1, runs = 100;
  std::optional<std::size_t> threads;
  std::uint64_t seed = 0;
  double train_fraction = 0.3;
};

int cmd_run(const RunArgs& a) {
  std::vector<alr::StrategySpec> specs;
  for (const auto& s : a.strategies) {
    auto spec = alr::parse_strategy(s);
    if (a.focus_task && spec.single_task() && !spec.focus_task) spec.focus_task = a.focus_task;
    if (a.committee) spec.committee_size = *a.committee;
    specs.push_back(spec);
  }
  const auto solver = alr::parse_solver(a.solver);
  const auto data = alr::load_csv(
      a.data, a.tasks,
      a.group_column.empty() ? std::nullopt : std::optional<std::string>(a.group_column));
  for (const auto& spec : specs) {
    if (spec.single_task() && !spec.focus_task && data.tasks() > 1) {
      throw UsageError("--focus-task is required for strategy " + spec.to_string() + " on " +
                       std::to_string(data.tasks()) + "-task data");
    }
  }

  std::vector<alr::LearningCurve> curves;
  for (const auto& spec : specs) {
    alr::ExperimentConfig cfg;
    cfg.strategy = spec;
    cfg.solver = solver;
    cfg.train_fraction = a.train_fraction;
    cfg.runs = a.runs;
    cfg.k_max = a.k_max;
    cfg.normalize_before_split = a.normalize == "global";
    cfg.seed = a.seed;
    if (!a.group_value.empty()) cfg.group_value = a.group_value;
    cfg.lambda_reference =
        a.lambda_k == "budget" ? alr::LambdaReference::budget : alr::LambdaReference::labeled_count;
    cfg.threads = a.threads.value_or(default_threads());
    curves.push_back(alr::run_experiment(data, cfg));

    const auto& c = curves.back();
    double first = 0.0, last = 0.0;
    for (const auto& t : c.task_names) {
      first += c.at("rmse", t).values.front().mean;
      last += c.at("rmse", t).values.back().mean;
    }
    const auto p = static_cast<double>(c.task_names.size());
    std::cout << c.strategy << " [" << c.solver << "] runs=" << c.runs << " K=" << c.ks.front()
              << ".." << c.ks.back() << " mean RMSE " << fixed(first / p, 4) << " -> "
              << fixed(last / p, 4) << "\n";
  }
  alr::write_curves_csv(curves, std::filesystem::path(a.out));
  if (!a.json.empty()) open_output(a.json) << alr::curves_to_json(curves) << "\n";
  return 0;
}

struct CompareArgs {
  std::vector<std::string> curves;
  std::string baseline = "random", out, measure = "both";
  std::vector<std::size_t> ks{50, 100, 150, 200, 250};
};

int cmd_compare(const CompareArgs& a) {
  const auto curves = load_curves(a.curves);
  if (curves.size() < 2) throw alr::DataError("compare needs at least two curves");
  const auto& base = find_curve(curves, a.baseline);
  std::vector<alr::Measure> measures;
  if (a.measure == "both") {
    measures = {alr::Measure::rmse, alr::Measure::cc};
  } else {
    measures = {alr::parse_measure(a.measure)};
  }
  for (const auto& c : curves) require_same_axis(base, c);
  for (std::size_t k : a.ks) {
    if (!base.position_of(k)) {
      throw alr::DataError("K=" + std::to_string(k) + " is not on the curve axis (" +
                           std::to_string(base.ks.front()) + ".." +
                           std::to_string(base.ks.back()) + "); pass --k");
    }
  }

  auto out = open_output(a.out);
  out << "task,measure,K,baseline,baseline_value,strategy,value,improvement_pct\n";
  for (const auto& task : base.task_names) {
    for (auto m : measures) {
      const char* metric = m == alr::Measure::rmse ? "rmse" : "cc";
      for (std::size_t k : a.ks) {
        const std::size_t i = *base.position_of(k);
        const double bv = base.at(metric, task).values[i].mean;
        for (const auto& c : curves) {
          if (&c == &base) continue;
          const double v = c.at(metric, task).values[i].mean;
          out << alr::csv_field(task) << ',' << metric << ',' << k << ','
              << alr::csv_field(base.strategy) << ',' << fixed(bv, 6) << ','
              << alr::csv_field(c.strategy) << ',' << fixed(v, 6) << ','
              << fixed(alr::improvement_percent(m, bv, v), 2) << '\n';
        }
      }
    }
  }
  std::cout << "compare: " << curves.size() - 1 << " strategies vs " << base.strategy << " at "
            << a.ks.size() << " K values -> " << a.out << "\n";
  return 0;
}

struct SavedArgs {
  std::vector<std::string> curves;
  std::string reference = "random", out, measure = "both";
  std::vector<double> alphas{1, 2, 3, 5, 10};
};

int cmd_saved_queries(const SavedArgs& a) {
  const auto curves = load_curves(a.curves);
  const auto& ref = find_curve(curves, a.reference);
  std::vector<alr::Measure> measures;
  if (a.measure == "both") {
    measures = {alr::Measure::rmse, alr::Measure::cc};
  } else {
    measures = {alr::parse_measure(a.measure)};
  }
  for (const auto& c : curves) require_same_axis(ref, c);

  auto out = open_output(a.out);
  out << "task,measure,alpha,reference,reference_k,strategy,strategy_k,saving_pct\n";
  auto k_text = [](const std::optional<std::size_t>& k) {
    return k ? std::to_string(*k) : std::string("not_reached");
  };
  for (auto m : measures) {
    for (double alpha : a.alphas) {
      for (const auto& c : curves) {
        if (&c == &ref) continue;
        for (const auto& row : alr::saved_queries(c, ref, alpha, m)) {
          const auto pct = row.saving_percent();
          out << alr::csv_field(row.task) << ',' << (m == alr::Measure::rmse ? "rmse" : "cc")
              << ',' << alr::csv_number(alpha) << ',' << alr::csv_field(ref.strategy) << ','
              << k_text(row.k_reference) << ',' << alr::csv_field(c.strategy) << ','
              << k_text(row.k_candidate) << ',' << (pct ? fixed(*pct, 2) : "nan") << '\n';
        }
      }
    }
  }
  std::cout << "saved-queries: reference " << ref.strategy << ", " << a.alphas.size()
            << " alpha value(s) -> " << a.out << "\n";
  return 0;
}

struct UniqueArgs {
  std::string data, out, solver = "ridge", mt_strategy = "mt_igs", st_strategy = "gsy";
  std::size_t tasks = 1, runs = 1;
  std::optional<std::size_t> k;
  std::uint64_t seed = 0;
  double train_fraction = 0.3;
};

int cmd_unique_queries(const UniqueArgs& a) {
  const auto mt_spec = alr::parse_strategy(a.mt_strategy);
  const auto st_base = alr::parse_strategy(a.st_strategy);
  const auto solver = alr::parse_solver(a.solver);
  const auto data = alr::normalize_features(alr::load_csv(a.data, a.tasks)).data;

  std::vector<std::vector<double>> unions;  // [K-1][run]
  std::size_t k_end = 0;
  for (std::size_t r = 0; r < a.runs; ++r) {
    const auto s = alr::run_seed(a.seed, r);
    const auto split = alr::split_train_test(data, {a.train_fraction, s});
    const std::size_t k = std::min(a.k.value_or(split.pool.size()), split.pool.size());
    k_end = k;
    const auto mt = alr::selection_sequence(split.pool, mt_spec, solver, k, s);
    std::vector<std::vector<alr::Index>> st;
    for (std::size_t t = 0; t < data.tasks(); ++t) {
      auto spec = st_base;
      if (spec.single_task()) spec.focus_task = t;
      st.push_back(alr::selection_sequence(split.pool, spec, solver, k, s));
    }
    unions.resize(k);
    for (std::size_t kk = 1; kk <= k; ++kk) {
      std::vector<std::vector<alr::Index>> prefixes;
      for (const auto& seq : st) prefixes.emplace_back(seq.begin(), seq.begin() + kk);
      const auto count = alr::unique_query_count(
          std::span<const alr::Index>(mt.data(), kk), prefixes);
      unions[kk - 1].push_back(static_cast<double>(count.st_union));
    }
  }

  auto out = open_output(a.out);
  out << "K,mt,st_union_mean,st_union_std,n_runs\n";
  for (std::size_t kk = 1; kk <= k_end; ++kk) {
    const auto& v = unions[kk - 1];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    out << kk << ',' << kk << ',' << alr::csv_number(mean) << ',' << alr::csv_number(sd) << ','
        << v.size() << '\n';
  }
  double last_union = 0.0;
  if (!unions.empty()) {
    for (double x : unions.back()) last_union += x;
    last_union /= static_cast<double>(unions.back().size());
  }
  std::cout << "unique-queries: K=" << k_end << " mt=" << k_end << " st_union(mean)="
            << fixed(last_union, 2) << " -> " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pool-based single- and multi-task active learning for regression"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic linear multi-task dataset");
  s->add_option("--n", synth.n, "Samples")->check(CLI::PositiveNumber);
  s->add_option("--d", synth.d, "Features")->check(CLI::PositiveNumber);
  s->add_option("--p", synth.p, "Tasks")->check(CLI::PositiveNumber);
  s->add_option("--noise", synth.noise, "Label noise standard deviation")->check(CLI::NonNegativeNumber);
  s->add_option("--seed", synth.seed, "Random seed");
  s->add_option("--out", synth.out, "Output CSV")->required();
  s->add_option("--coefficients", synth.coefficients, "Write ground-truth coefficients (JSON)");

  NormalizeArgs norm;
  auto* n = app.add_subcommand("normalize", "Z-score feature columns of a CSV dataset");
  n->add_option("--data", norm.data, "Input CSV")->required();
  n->add_option("--tasks", norm.tasks, "Number of trailing label columns")->check(CLI::PositiveNumber);
  n->add_option("--group-column", norm.group_column, "Categorical column to carry through");
  n->add_option("--out", norm.out, "Output CSV")->required();
  n->add_option("--params", norm.params, "Write per-column mean/std (JSON)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run repeated active-learning experiments");
  r->add_option("--data", run.data, "Dataset CSV")->required();
  r->add_option("--tasks", run.tasks, "Number of trailing label columns")->check(CLI::PositiveNumber);
  r->add_option("--strategy", run.strategies,
                "Strategy, repeatable (random, gsx, gsy, igs, mt_gsy, mt_igs, qbc, emcm; "
                "e.g. gsy:task=1, qbc:task=0,committee=4)")
      ->required();
  r->add_option("--focus-task", run.focus_task, "Task index for single-task strategies");
  r->add_option("--committee", run.committee, "Committee size for qbc/emcm")->check(CLI::Range(2, 1000));
  r->add_option("--solver", run.solver, "ols, ridge (10/K), ridge:lambda=.., lasso, elastic_net")
      ->capture_default_str();
  r->add_option("--runs", run.runs, "Repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  r->add_option("--seed", run.seed, "Master seed");
  r->add_option("--train-fraction", run.train_fraction, "Pool share of each split")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  r->add_option("--k-max", run.k_max, "Stop after this many labels")->check(CLI::PositiveNumber);
  r->add_option("--normalize", run.normalize, "global (before split) or pool (per split)")
      ->check(CLI::IsMember({"global", "pool"}))
      ->capture_default_str();
  r->add_option("--lambda-k", run.lambda_k, "K in lambda/K: labeled (growing) or budget")
      ->check(CLI::IsMember({"labeled", "budget"}))
      ->capture_default_str();
  r->add_option("--group-column", run.group_column, "Categorical column (e.g. gender)");
  r->add_option("--group-value", run.group_value, "Track the selected share of this group tag");
  r->add_option("--threads", run.threads, "Worker threads (default ALR_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  r->add_option("--out", run.out, "Learning-curve CSV")->required();
  r->add_option("--json", run.json, "Also write learning curves as JSON");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Improvement over a baseline at fixed K values");
  c->add_option("--curves", cmp.curves, "Curve CSV files")->required()->expected(1, -1);
  c->add_option("--baseline", cmp.baseline, "Baseline strategy")->capture_default_str();
  c->add_option("--k", cmp.ks, "K values")->delimiter(',')->expected(1, -1);
  c->add_option("--measure", cmp.measure, "rmse, cc or both")
      ->check(CLI::IsMember({"rmse", "cc", "both"}))
      ->capture_default_str();
  c->add_option("--out", cmp.out, "Output CSV")->required();

  SavedArgs saved;
  auto* q = app.add_subcommand("saved-queries", "Labels needed to approach the full-pool model");
  q->add_option("--curves", saved.curves, "Curve CSV files")->required()->expected(1, -1);
  q->add_option("--reference", saved.reference, "Reference strategy")->capture_default_str();
  q->add_option("--alpha", saved.alphas, "Tolerance(s) in percent")->delimiter(',')->expected(1, -1);
  q->add_option("--measure", saved.measure, "rmse, cc or both")
      ->check(CLI::IsMember({"rmse", "cc", "both"}))
      ->capture_default_str();
  q->add_option("--out", saved.out, "Output CSV")->required();

  UniqueArgs uniq;
  auto* u = app.add_subcommand("unique-queries",
                               "Distinct samples queried by one multi-task vs P single-task runs");
  u->add_option("--data", uniq.data, "Dataset CSV")->required();
  u->add_option("--tasks", uniq.tasks, "Number of trailing label columns")->check(CLI::PositiveNumber);
  u->add_option("--mt-strategy", uniq.mt_strategy, "Multi-task strategy")->capture_default_str();
  u->add_option("--st-strategy", uniq.st_strategy, "Single-task strategy, run once per task")
      ->capture_default_str();
  u->add_option("--solver", uniq.solver, "Solver")->capture_default_str();
  u->add_option("--k", uniq.k, "Labels per sequence (default: pool size)")->check(CLI::PositiveNumber);
  u->add_option("--runs", uniq.runs, "Random splits")->check(CLI::PositiveNumber);
  u->add_option("--seed", uniq.seed, "Master seed");
  u->add_option("--train-fraction", uniq.train_fraction, "Pool share")->check(CLI::Range(0.0, 1.0));
  u->add_option("--out", uniq.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*n) return cmd_normalize(norm);
    if (*r) return cmd_run(run);
    if (*c) return cmd_compare(cmp);
    if (*q) return cmd_saved_queries(saved);
    if (*u) return cmd_unique_queries(uniq);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const alr::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
