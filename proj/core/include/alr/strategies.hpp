#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alr/pool_state.hpp"

namespace alr {

enum class StrategyKind { random, gsx, gsy, igs, mt_gsy, mt_igs, qbc, emcm };

/// Which selection rule to run and its knobs.
struct StrategySpec {
  StrategyKind kind = StrategyKind::random;
  /// Task a single-task rule (gsy, igs, qbc, emcm) optimizes for.
  std::optional<std::size_t> focus_task;
  /// Bootstrap committee size for qbc and emcm.
  std::size_t committee_size = 4;

  /// gsx, gsy, igs, mt_gsy, mt_igs: centroid + input-space GS initialization.
  bool greedy_family() const;
  /// gsy, igs, qbc, emcm.
  bool single_task() const;
  bool uses_committee() const;

  /// Focus task, defaulting to 0 when P == 1. Throws ConfigError when a
  /// single-task rule has no focus on multi-task data, or it is >= P.
  std::size_t task_for(std::size_t task_count) const;

  /// Canonical grammar form ("mt_igs", "gsy:task=1", "qbc:task=0,committee=4").
  std::string to_string() const;

  friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

/// Parses the mini-grammar `kind[:key=value[,key=value]...]` with keys
/// `task` and `committee`. Throws ConfigError.
StrategySpec parse_strategy(std::string_view text);

std::string_view strategy_name(StrategyKind kind);

/// Number of labels gathered before model-based selection: d.
std::size_t k0_default(std::size_t d);

/// Index of the largest score; ties go to the earliest position.
std::size_t argmax_first(const Vector& scores);

/// Greedy-sampling score kernel shared by GSx/GSy/iGS/MT-GSy/MT-iGS:
///
///   score_n = min_m [ D(n,m) * prod_p |F(n,p) - Y(m,p)| ]
///
/// `input_distances` is candidates x labeled (pass an empty matrix to drop
/// the input factor), `predictions` is candidates x T, `outputs` is
/// labeled x T (T = 0 drops the output factor). The minimum is taken over
/// the per-labeled product, not the product of per-task minima.
Vector min_product_scores(const Matrix& input_distances, const Matrix& predictions,
                          const Matrix& outputs);

/// Candidate list plus one score per candidate (same order).
struct CandidateScores {
  std::vector<Index> candidates;
  Vector scores;

  Index best() const { return candidates.at(argmax_first(scores)); }
};

CandidateScores gs_input_scores(const PoolState& state);
CandidateScores gsy_scores(const PoolState& state, std::size_t task);
CandidateScores mtgsy_scores(const PoolState& state);
CandidateScores igs_scores(const PoolState& state, std::size_t task);
CandidateScores mtigs_scores(const PoolState& state);
/// Population variance of committee predictions.
CandidateScores qbc_scores(PoolState& state, std::size_t task, std::size_t committee_size);
/// Mean over bootstrap models of |f(x) - f_b(x)| * ||x||.
CandidateScores emcm_scores(PoolState& state, std::size_t task, std::size_t committee_size);

/// Pool row nearest the feature centroid. Requires no labels yet.
Index select_initial_centroid(const PoolState& state);
Index gs_input_step(const PoolState& state);
Index gsy_step(const PoolState& state, std::size_t task);
Index mtgsy_step(const PoolState& state);
Index igs_step(const PoolState& state, std::size_t task);
Index mtigs_step(const PoolState& state);
Index qbc_step(PoolState& state, std::size_t task, std::size_t committee_size = 4);
Index emcm_step(PoolState& state, std::size_t task, std::size_t committee_size = 4);
Index random_step(PoolState& state);

/// Bootstrap committee used by QBC and EMCM: `committee_size` models fit on
/// resamples (with replacement) of the labeled set, each holding at least
/// two distinct samples.
std::vector<LinearModel> bootstrap_committee(PoolState& state, std::size_t task,
                                             std::size_t committee_size);

/// Applies the phase logic: centroid / input-space GS (greedy family) or
/// random draws (random, qbc, emcm) until K0 labels, then the rule itself.
Index select_next(PoolState& state, const StrategySpec& spec);

/// Runs select_next + label until `count` samples are labeled (or the pool
/// is exhausted) and returns the selection order.
std::vector<Index> run_selection(PoolState& state, const StrategySpec& spec, std::size_t count);

}  // namespace alr
