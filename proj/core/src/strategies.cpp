#include "alr/strategies.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "alr/error.hpp"
#include "csv.hpp"

namespace alr {
namespace {

struct KindName {
  StrategyKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {StrategyKind::random, "random"}, {StrategyKind::gsx, "gsx"},
    {StrategyKind::gsy, "gsy"},       {StrategyKind::igs, "igs"},
    {StrategyKind::mt_gsy, "mt_gsy"}, {StrategyKind::mt_igs, "mt_igs"},
    {StrategyKind::qbc, "qbc"},       {StrategyKind::emcm, "emcm"},
};

StrategyKind kind_from_name(std::string_view raw) {
  std::string name(raw);
  std::replace(name.begin(), name.end(), '-', '_');
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (name == "bl1") return StrategyKind::random;
  if (name == "mtgsy") return StrategyKind::mt_gsy;
  if (name == "mtigs") return StrategyKind::mt_igs;
  for (const auto& k : kKindNames) {
    if (k.name == name) return k.kind;
  }
  throw ConfigError("unknown strategy \"" + std::string(raw) + "\"");
}

void require_unlabeled(const PoolState& state) {
  if (state.unlabeled_count() == 0) throw std::logic_error("no unlabeled samples left");
}

void require_models(const PoolState& state) {
  if (!state.has_models()) {
    throw std::logic_error("model-based selection needs " + std::to_string(state.k0()) +
                           " labeled samples");
  }
}

// Candidates x labeled input distances from the state's cache.
Matrix input_distances(const PoolState& state, const std::vector<Index>& candidates) {
  const auto k = static_cast<Eigen::Index>(state.labeled_count());
  Matrix d(static_cast<Eigen::Index>(candidates.size()), k);
  for (std::size_t n = 0; n < candidates.size(); ++n) {
    for (Eigen::Index m = 0; m < k; ++m) {
      d(static_cast<Eigen::Index>(n), m) =
          state.labeled_distance(candidates[n], static_cast<std::size_t>(m));
    }
  }
  return d;
}

Matrix candidate_predictions(const PoolState& state, const std::vector<Index>& candidates,
                             const std::vector<std::size_t>& tasks) {
  Matrix f(static_cast<Eigen::Index>(candidates.size()), static_cast<Eigen::Index>(tasks.size()));
  for (std::size_t n = 0; n < candidates.size(); ++n) {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t)) = state.predictions()(
          static_cast<Eigen::Index>(candidates[n]), static_cast<Eigen::Index>(tasks[t]));
    }
  }
  return f;
}

Matrix labeled_outputs(const PoolState& state, const std::vector<std::size_t>& tasks) {
  const auto labeled = state.labeled();
  Matrix y(static_cast<Eigen::Index>(labeled.size()), static_cast<Eigen::Index>(tasks.size()));
  for (std::size_t m = 0; m < labeled.size(); ++m) {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      y(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t)) = state.pool().labels()(
          static_cast<Eigen::Index>(labeled[m]), static_cast<Eigen::Index>(tasks[t]));
    }
  }
  return y;
}

std::vector<std::size_t> all_tasks(const PoolState& state) {
  std::vector<std::size_t> tasks(state.pool().tasks());
  for (std::size_t t = 0; t < tasks.size(); ++t) tasks[t] = t;
  return tasks;
}

CandidateScores greedy(const PoolState& state, bool use_input,
                       const std::vector<std::size_t>& tasks) {
  require_unlabeled(state);
  if (state.labeled_count() == 0) throw std::logic_error("greedy selection needs a labeled sample");
  if (!tasks.empty()) {
    require_models(state);
    for (std::size_t t : tasks) {
      if (t >= state.pool().tasks()) throw std::out_of_range("task index out of range");
    }
  }
  CandidateScores out;
  out.candidates = state.unlabeled();
  const Matrix dist = use_input ? input_distances(state, out.candidates) : Matrix();
  const Matrix preds = candidate_predictions(state, out.candidates, tasks);
  const Matrix outputs = labeled_outputs(state, tasks);
  out.scores = min_product_scores(dist, preds, outputs);
  return out;
}

std::size_t distinct_count(std::vector<Index> rows) {
  std::sort(rows.begin(), rows.end());
  return static_cast<std::size_t>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// StrategySpec

bool StrategySpec::greedy_family() const {
  switch (kind) {
    case StrategyKind::gsx:
    case StrategyKind::gsy:
    case StrategyKind::igs:
    case StrategyKind::mt_gsy:
    case StrategyKind::mt_igs: return true;
    default: return false;
  }
}

bool StrategySpec::single_task() const {
  switch (kind) {
    case StrategyKind::gsy:
    case StrategyKind::igs:
    case StrategyKind::qbc:
    case StrategyKind::emcm: return true;
    default: return false;
  }
}

bool StrategySpec::uses_committee() const {
  return kind == StrategyKind::qbc || kind == StrategyKind::emcm;
}

std::size_t StrategySpec::task_for(std::size_t task_count) const {
  if (!single_task()) return 0;
  if (focus_task) {
    if (*focus_task >= task_count) {
      throw ConfigError("focus task " + std::to_string(*focus_task) + " out of range for " +
                        std::to_string(task_count) + " task(s)");
    }
    return *focus_task;
  }
  if (task_count == 1) return 0;
  throw ConfigError("strategy " + std::string(strategy_name(kind)) + " needs a focus task on " +
                    std::to_string(task_count) + "-task data");
}

std::string StrategySpec::to_string() const {
  std::string out(strategy_name(kind));
  std::vector<std::string> knobs;
  if (single_task() && focus_task) knobs.push_back("task=" + std::to_string(*focus_task));
  if (uses_committee()) knobs.push_back("committee=" + std::to_string(committee_size));
  for (std::size_t i = 0; i < knobs.size(); ++i) out += (i ? "," : ":") + knobs[i];
  return out;
}

std::string_view strategy_name(StrategyKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

StrategySpec parse_strategy(std::string_view text) {
  const auto colon = text.find(':');
  StrategySpec spec;
  spec.kind = kind_from_name(text.substr(0, colon));
  std::string_view rest =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find_first_of(",;");
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("strategy knob \"" + std::string(item) + "\" is not key=value");
    }
    const std::string key(item.substr(0, eq));
    const auto value = csv::parse_double(item.substr(eq + 1));
    if (!value || *value < 0 || std::floor(*value) != *value) {
      throw ConfigError("strategy knob \"" + key + "\" needs a non-negative integer");
    }
    const auto v = static_cast<std::size_t>(*value);
    if (key == "task" || key == "focus") {
      spec.focus_task = v;
    } else if (key == "committee") {
      spec.committee_size = v;
    } else {
      throw ConfigError("unknown strategy knob \"" + key + "\"");
    }
  }
  if (spec.committee_size < 2) throw ConfigError("committee size must be at least 2");
  if (!spec.single_task()) spec.focus_task.reset();
  return spec;
}

std::size_t k0_default(std::size_t d) {
  if (d < 1) throw std::invalid_argument("k0_default: d must be positive");
  return d;
}

// ---------------------------------------------------------------------------
// Scoring

std::size_t argmax_first(const Vector& scores) {
  if (scores.size() == 0) throw std::logic_error("argmax of an empty score vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

Vector min_product_scores(const Matrix& input_distances, const Matrix& predictions,
                          const Matrix& outputs) {
  const bool use_input = input_distances.size() > 0;
  const Eigen::Index candidates = predictions.rows();
  const Eigen::Index labeled = outputs.rows();
  const Eigen::Index tasks = predictions.cols();
  if (outputs.cols() != tasks) throw std::invalid_argument("prediction/output task mismatch");
  if (use_input && (input_distances.rows() != candidates || input_distances.cols() != labeled)) {
    throw std::invalid_argument("input distance matrix has the wrong shape");
  }
  if (labeled == 0) throw std::invalid_argument("min_product_scores needs a labeled sample");

  Vector scores(candidates);
  for (Eigen::Index n = 0; n < candidates; ++n) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index m = 0; m < labeled; ++m) {
      double term = use_input ? input_distances(n, m) : 1.0;
      for (Eigen::Index p = 0; p < tasks; ++p) term *= std::abs(predictions(n, p) - outputs(m, p));
      best = std::min(best, term);
    }
    scores(n) = best;
  }
  return scores;
}

CandidateScores gs_input_scores(const PoolState& state) { return greedy(state, true, {}); }

CandidateScores gsy_scores(const PoolState& state, std::size_t task) {
  return greedy(state, false, {task});
}

CandidateScores mtgsy_scores(const PoolState& state) {
  return greedy(state, false, all_tasks(state));
}

CandidateScores igs_scores(const PoolState& state, std::size_t task) {
  return greedy(state, true, {task});
}

CandidateScores mtigs_scores(const PoolState& state) {
  return greedy(state, true, all_tasks(state));
}

std::vector<LinearModel> bootstrap_committee(PoolState& state, std::size_t task,
                                             std::size_t committee_size) {
  const auto labeled = state.labeled();
  if (committee_size < 2) throw std::invalid_argument("committee size must be at least 2");
  if (distinct_count({labeled.begin(), labeled.end()}) < 2) {
    throw std::logic_error("bootstrap committee needs at least 2 labeled samples");
  }
  if (task >= state.pool().tasks()) throw std::out_of_range("task index out of range");
  const SolverConfig solver = state.effective_solver();
  const Matrix& x = state.pool().features();
  const Vector y = state.pool().labels().col(static_cast<Eigen::Index>(task));

  std::uniform_int_distribution<std::size_t> pick(0, labeled.size() - 1);
  std::vector<LinearModel> committee;
  committee.reserve(committee_size);
  std::vector<Index> rows(labeled.size());
  for (std::size_t b = 0; b < committee_size; ++b) {
    do {
      for (auto& r : rows) r = labeled[pick(state.rng())];
    } while (distinct_count(rows) < 2);
    const Matrix xb = gather_rows(x, rows);
    Vector yb(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      yb(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(rows[i]));
    }
    committee.push_back(fit(xb, yb, solver));
  }
  return committee;
}

CandidateScores qbc_scores(PoolState& state, std::size_t task, std::size_t committee_size) {
  require_unlabeled(state);
  const auto committee = bootstrap_committee(state, task, committee_size);
  CandidateScores out;
  out.candidates = state.unlabeled();
  const Matrix x = gather_rows(state.pool().features(), out.candidates);
  Matrix preds(x.rows(), static_cast<Eigen::Index>(committee.size()));
  for (std::size_t b = 0; b < committee.size(); ++b) {
    preds.col(static_cast<Eigen::Index>(b)) = predict(committee[b], x);
  }
  const Vector mean = preds.rowwise().mean();
  out.scores = (preds.colwise() - mean).rowwise().squaredNorm() / static_cast<double>(preds.cols());
  return out;
}

CandidateScores emcm_scores(PoolState& state, std::size_t task, std::size_t committee_size) {
  require_unlabeled(state);
  require_models(state);
  const auto committee = bootstrap_committee(state, task, committee_size);
  CandidateScores out;
  out.candidates = state.unlabeled();
  const Matrix x = gather_rows(state.pool().features(), out.candidates);
  const Vector main = predict(state.model(task), x);
  Vector total = Vector::Zero(x.rows());
  for (const auto& member : committee) total += (main - predict(member, x)).cwiseAbs();
  out.scores = total.cwiseProduct(x.rowwise().norm()) / static_cast<double>(committee.size());
  return out;
}

// ---------------------------------------------------------------------------
// Steps

Index select_initial_centroid(const PoolState& state) {
  if (state.size() == 0) throw std::logic_error("empty pool");
  if (state.labeled_count() != 0) throw std::logic_error("centroid selection needs an empty labeled set");
  const Matrix& x = state.pool().features();
  const Eigen::RowVectorXd centroid = x.colwise().mean();
  const Vector dist = (x.rowwise() - centroid).rowwise().norm();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < dist.size(); ++i) {
    if (dist(i) < dist(best)) best = i;
  }
  return static_cast<Index>(best);
}

Index gs_input_step(const PoolState& state) { return gs_input_scores(state).best(); }
Index gsy_step(const PoolState& state, std::size_t task) { return gsy_scores(state, task).best(); }
Index mtgsy_step(const PoolState& state) { return mtgsy_scores(state).best(); }
Index igs_step(const PoolState& state, std::size_t task) { return igs_scores(state, task).best(); }
Index mtigs_step(const PoolState& state) { return mtigs_scores(state).best(); }

Index qbc_step(PoolState& state, std::size_t task, std::size_t committee_size) {
  return qbc_scores(state, task, committee_size).best();
}

Index emcm_step(PoolState& state, std::size_t task, std::size_t committee_size) {
  return emcm_scores(state, task, committee_size).best();
}

Index random_step(PoolState& state) {
  require_unlabeled(state);
  std::uniform_int_distribution<std::size_t> pick(0, state.unlabeled_count() - 1);
  std::size_t target = pick(state.rng());
  for (Index i = 0; i < state.size(); ++i) {
    if (state.is_labeled(i)) continue;
    if (target == 0) return i;
    --target;
  }
  throw std::logic_error("random_step: unreachable");
}

Index select_next(PoolState& state, const StrategySpec& spec) {
  require_unlabeled(state);
  const std::size_t task = spec.task_for(state.pool().tasks());
  const std::size_t labeled = state.labeled_count();

  if (spec.greedy_family()) {
    if (labeled == 0) return select_initial_centroid(state);
    if (labeled < state.k0() || spec.kind == StrategyKind::gsx) return gs_input_step(state);
  } else {
    // Bootstrapping needs two distinct labeled samples even when K0 = 1.
    const std::size_t warmup = spec.uses_committee() ? std::max<std::size_t>(state.k0(), 2)
                                                     : state.k0();
    if (spec.kind == StrategyKind::random || labeled < warmup) return random_step(state);
  }

  switch (spec.kind) {
    case StrategyKind::gsy: return gsy_step(state, task);
    case StrategyKind::igs: return igs_step(state, task);
    case StrategyKind::mt_gsy: return mtgsy_step(state);
    case StrategyKind::mt_igs: return mtigs_step(state);
    case StrategyKind::qbc: return qbc_step(state, task, spec.committee_size);
    case StrategyKind::emcm: return emcm_step(state, task, spec.committee_size);
    default: break;
  }
  throw std::logic_error("select_next: unhandled strategy");
}

std::vector<Index> run_selection(PoolState& state, const StrategySpec& spec, std::size_t count) {
  std::vector<Index> order;
  while (state.labeled_count() < count && state.unlabeled_count() > 0) {
    const Index next = select_next(state, spec);
    state.label(next);
    order.push_back(next);
  }
  return order;
}

}  // namespace alr
