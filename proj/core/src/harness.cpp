#include "alr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "alr/error.hpp"

namespace alr {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Stat summarize(const std::vector<double>& values) {
  Stat s;
  s.n = values.size();
  if (s.n == 0) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

const char* lambda_reference_name(LambdaReference r) {
  return r == LambdaReference::budget ? "budget" : "labeled_count";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  if (k_max && *k_max < 1) throw ConfigError("k_max must be positive");
  if (strategy.committee_size < 2) throw ConfigError("committee size must be at least 2");
  solver.validate();
}

std::string ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["strategy"] = strategy.to_string();
  j["solver"] = solver.to_string();
  j["train_fraction"] = train_fraction;
  j["runs"] = runs;
  j["k_max"] = k_max ? nlohmann::ordered_json(*k_max) : nlohmann::ordered_json(nullptr);
  j["normalize_before_split"] = normalize_before_split;
  j["seed"] = seed;
  j["group_value"] =
      group_value ? nlohmann::ordered_json(*group_value) : nlohmann::ordered_json(nullptr);
  j["lambda_reference"] = lambda_reference_name(lambda_reference);
  return j.dump();
}

std::uint64_t run_seed(std::uint64_t seed, std::size_t run) {
  return seed ^ static_cast<std::uint64_t>(run);
}

std::vector<LinearModel> full_pool_models(const Dataset& pool, const SolverConfig& solver) {
  std::vector<LinearModel> models;
  for (std::size_t t = 0; t < pool.tasks(); ++t) {
    models.push_back(fit(pool.features(), pool.labels().col(static_cast<Eigen::Index>(t)), solver));
  }
  return models;
}

RunResult run_single(const Dataset& pool, const Dataset& test, const ExperimentConfig& cfg,
                     std::uint64_t seed) {
  if (pool.dims() != test.dims() || pool.tasks() != test.tasks()) {
    throw std::invalid_argument("pool and test sets must share d and P");
  }
  const std::size_t tasks = pool.tasks();
  const std::size_t k0 = k0_default(pool.dims());
  const std::size_t k_end = std::min(cfg.k_max.value_or(pool.size()), pool.size());
  if (k_end < k0) {
    throw ConfigError("k_max (" + std::to_string(k_end) + ") is below K0 (" + std::to_string(k0) +
                      ")");
  }
  if (cfg.group_value && !pool.has_group()) {
    throw DataError("group value given but the dataset has no group column");
  }
  cfg.strategy.task_for(tasks);

  PoolState::Options options;
  options.k0 = k0;
  if (cfg.lambda_reference == LambdaReference::budget) options.lambda_k = k_end;
  PoolState state(pool, cfg.solver, seed, options);

  RunResult result;
  const auto bl2 = full_pool_models(pool, cfg.solver);
  std::vector<Vector> truth;
  for (std::size_t t = 0; t < tasks; ++t) {
    truth.push_back(test.labels().col(static_cast<Eigen::Index>(t)));
    const Vector pred = predict(bl2[t], test.features());
    result.bl2_rmse.push_back(rmse(pred, truth[t]));
    result.bl2_cc.push_back(test.size() >= 2 ? pearson_cc(pred, truth[t]) : std::nullopt);
  }

  while (state.labeled_count() < k_end) {
    const Index next = select_next(state, cfg.strategy);
    state.label(next);
    result.selection.push_back(next);
    if (state.labeled_count() < k0) continue;

    MetricRecord rec;
    rec.k = state.labeled_count();
    for (std::size_t t = 0; t < tasks; ++t) {
      const Vector pred = predict(state.model(t), test.features());
      rec.rmse.push_back(rmse(pred, truth[t]));
      rec.cc.push_back(test.size() >= 2 ? pearson_cc(pred, truth[t]) : std::nullopt);
      rec.coef_mae.push_back(coefficient_mae(state.model(t), bl2[t]));
      rec.label_std.push_back(state.labeled_count() >= 2
                                  ? std::optional(label_std(pool, state.labeled(), t))
                                  : std::nullopt);
    }
    if (cfg.group_value) rec.group_fraction = group_fraction(pool, state.labeled(), *cfg.group_value);
    result.records.push_back(std::move(rec));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Aggregation

const CurveSeries* LearningCurve::find(std::string_view metric, std::string_view task) const {
  for (const auto& s : series) {
    if (s.metric == metric && s.task == task) return &s;
  }
  return nullptr;
}

const CurveSeries& LearningCurve::at(std::string_view metric, std::string_view task) const {
  if (const auto* s = find(metric, task)) return *s;
  throw std::out_of_range("curve has no series " + std::string(metric) + "/" + std::string(task));
}

std::optional<std::size_t> LearningCurve::position_of(std::size_t k) const {
  const auto it = std::lower_bound(ks.begin(), ks.end(), k);
  if (it == ks.end() || *it != k) return std::nullopt;
  return static_cast<std::size_t>(it - ks.begin());
}

LearningCurve aggregate_runs(std::span<const RunResult> runs,
                             const std::vector<std::string>& task_names,
                             const std::optional<std::string>& group_value) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");
  LearningCurve curve;
  curve.task_names = task_names;
  curve.runs = runs.size();
  for (const auto& rec : runs.front().records) curve.ks.push_back(rec.k);
  for (const auto& run : runs) {
    if (run.records.size() != curve.ks.size()) {
      throw std::invalid_argument("aggregate_runs: runs disagree on the K axis");
    }
    for (std::size_t i = 0; i < curve.ks.size(); ++i) {
      if (run.records[i].k != curve.ks[i]) {
        throw std::invalid_argument("aggregate_runs: runs disagree on the K axis");
      }
    }
  }

  const std::size_t nk = curve.ks.size();
  auto per_k = [&](const std::string& metric, const std::string& task, auto&& value_of) {
    CurveSeries s{metric, task, {}};
    s.values.reserve(nk);
    std::vector<double> values;
    for (std::size_t i = 0; i < nk; ++i) {
      values.clear();
      for (const auto& run : runs) {
        const std::optional<double> v = value_of(run, i);
        if (v) values.push_back(*v);
      }
      s.values.push_back(summarize(values));
    }
    curve.series.push_back(std::move(s));
  };

  for (std::size_t t = 0; t < task_names.size(); ++t) {
    const auto& name = task_names[t];
    per_k("rmse", name, [t](const RunResult& r, std::size_t i) {
      return std::optional(r.records[i].rmse[t]);
    });
    per_k("cc", name, [t](const RunResult& r, std::size_t i) { return r.records[i].cc[t]; });
    per_k("coef_mae", name, [t](const RunResult& r, std::size_t i) {
      return std::optional(r.records[i].coef_mae[t]);
    });
    per_k("label_std", name,
          [t](const RunResult& r, std::size_t i) { return r.records[i].label_std[t]; });
    per_k("bl2_rmse", name,
          [t](const RunResult& r, std::size_t) { return std::optional(r.bl2_rmse[t]); });
    per_k("bl2_cc", name, [t](const RunResult& r, std::size_t) { return r.bl2_cc[t]; });
  }
  if (group_value) {
    per_k("group_fraction", "all",
          [](const RunResult& r, std::size_t i) { return r.records[i].group_fraction; });
  }
  return curve;
}

LearningCurve run_experiment(const Dataset& data, const ExperimentConfig& cfg) {
  cfg.validate();
  cfg.strategy.task_for(data.tasks());
  // Reject degenerate splits before spawning workers.
  split_indices(data.size(), SplitConfig{cfg.train_fraction, cfg.seed});

  std::optional<Dataset> normalized;
  if (cfg.normalize_before_split) normalized = normalize_features(data).data;
  const Dataset& source = normalized ? *normalized : data;

  std::vector<RunResult> results(cfg.runs);
  std::vector<std::exception_ptr> errors(cfg.runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.runs; r = next++) {
      try {
        const std::uint64_t s = run_seed(cfg.seed, r);
        auto split = split_train_test(source, SplitConfig{cfg.train_fraction, s});
        if (!cfg.normalize_before_split) {
          auto norm = normalize_features(split.pool);
          split.test = norm.params.apply(split.test);
          split.pool = std::move(norm.data);
        }
        results[r] = run_single(split.pool, split.test, cfg, splitmix64(s));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, cfg.runs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  LearningCurve curve = aggregate_runs(results, data.task_names(), cfg.group_value);
  curve.strategy = cfg.strategy.to_string();
  curve.solver = cfg.solver.to_string();
  curve.config_json = cfg.to_json();
  return curve;
}

// ---------------------------------------------------------------------------
// Analyses

Measure parse_measure(std::string_view text) {
  if (text == "rmse" || text == "RMSE") return Measure::rmse;
  if (text == "cc" || text == "CC") return Measure::cc;
  throw ConfigError("unknown measure \"" + std::string(text) + "\" (expected rmse or cc)");
}

std::optional<double> SavedQueries::saving_percent() const {
  if (!k_candidate || !k_reference || *k_candidate == 0) return std::nullopt;
  return (static_cast<double>(*k_reference) - static_cast<double>(*k_candidate)) /
         static_cast<double>(*k_candidate) * 100.0;
}

std::vector<SavedQueries> saved_queries(const LearningCurve& candidate,
                                        const LearningCurve& reference, double alpha,
                                        Measure measure) {
  if (candidate.ks != reference.ks) throw std::invalid_argument("saved_queries: K axes differ");
  if (candidate.task_names != reference.task_names) {
    throw std::invalid_argument("saved_queries: task lists differ");
  }
  const std::string metric = measure == Measure::rmse ? "rmse" : "cc";
  const std::string bl2_metric = "bl2_" + metric;

  std::vector<SavedQueries> out;
  for (const auto& task : reference.task_names) {
    const auto& bl2 = reference.at(bl2_metric, task);
    if (bl2.values.empty()) throw std::invalid_argument("saved_queries: empty curve");
    const double base = bl2.values.front().mean;
    const double threshold =
        measure == Measure::rmse ? base * (1.0 + alpha / 100.0) : base * (1.0 - alpha / 100.0);
    auto first_reaching = [&](const LearningCurve& c) -> std::optional<std::size_t> {
      const auto& s = c.at(metric, task);
      for (std::size_t i = 0; i < c.ks.size(); ++i) {
        const double v = s.values[i].mean;
        if (std::isnan(v)) continue;
        if (measure == Measure::rmse ? v <= threshold : v >= threshold) return c.ks[i];
      }
      return std::nullopt;
    };
    out.push_back({task, first_reaching(candidate), first_reaching(reference)});
  }
  return out;
}

double improvement_percent(Measure measure, double baseline, double value) {
  const double diff = measure == Measure::rmse ? baseline - value : value - baseline;
  return diff / std::abs(baseline) * 100.0;
}

UniqueQueryCount unique_query_count(std::span<const Index> mt_sequence,
                                    std::span<const std::vector<Index>> st_sequences) {
  std::set<Index> st;
  for (const auto& seq : st_sequences) st.insert(seq.begin(), seq.end());
  return {mt_sequence.size(), st.size()};
}

std::vector<Index> selection_sequence(const Dataset& pool, const StrategySpec& spec,
                                      const SolverConfig& solver, std::size_t count,
                                      std::uint64_t seed) {
  PoolState state(pool, solver, seed);
  return run_selection(state, spec, count);
}

}  // namespace alr
