#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hints/constraints.hpp"
#include "hints/core.hpp"
#include "hints/tagger.hpp"

namespace hints {

enum class WeightMode { Equal, Fraction, Confidence };

struct Weighting {
  WeightMode mode = WeightMode::Fraction;
  double fraction = 1.0;

  // "equal", "fraction:<w>" or "confidence".
  static Weighting parse(std::string_view text);
  std::string to_string() const;
};

struct TrainConfig {
  std::size_t iterations = 3;
  std::optional<std::size_t> top_r;
  std::optional<std::size_t> pool_growth;  // defaults to 10 * top_r when top_r is set
  bool confidence_filter = false;          // rank by confidence before taking top_r
  Weighting weighting;
  std::uint64_t seed = 1;

  void validate() const;
  std::optional<std::size_t> effective_pool_growth() const;
};

// Per-added-example weights. Equal spreads the labeled mass over the added
// set; fraction gives each added example weight w; confidence uses the score
// stored at extraction time.
std::vector<double> apply_weighting(std::size_t labeled_count, std::span<const double> added_confidence,
                                    const Weighting& weighting);

struct TraceRow {
  std::size_t iteration = 0;
  std::size_t pool = 0;       // working unlabeled examples decoded this iteration
  std::size_t added = 0;
  std::size_t evicted = 0;
  std::size_t augmented = 0;  // self-labeled examples in the training set after this iteration
  std::optional<double> dev;   // task-2 dev F (task-1 for the first column of two-sided runs)
  std::optional<double> dev2;  // two-sided runs: task-2 dev F

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct Trace {
  bool two_sided = false;
  std::vector<TraceRow> rows;  // row 0 is the baseline

  std::string to_tsv() const;
  friend bool operator==(const Trace&, const Trace&) = default;
};

struct OneSidedResult {
  std::unique_ptr<Tagger> model;  // best by dev, else final
  std::size_t best_iteration = 0;
  Trace trace;
  Corpus augmented;  // self-labeled examples at the end (y1 and y2)
};

struct TwoSidedResult {
  std::unique_ptr<Tagger> model1;
  std::unique_ptr<Tagger> model2;
  std::size_t best_iteration1 = 0;
  std::size_t best_iteration2 = 0;
  Trace trace;
  Corpus augmented;
};

// `dev`, when non-empty, must carry gold y2 (and y1 for two-sided runs).
OneSidedResult one_sided_hints(const Learner& learner, const Corpus& d, const Corpus& unlab,
                               const ConstraintFunction& chi, const TrainConfig& cfg, const Corpus* dev = nullptr);

TwoSidedResult two_sided_hints(const Learner& learner1, const Learner& learner2, const Corpus& d1, const Corpus& d2,
                               const Corpus& unlab, const ConstraintFunction& chi, const TrainConfig& cfg,
                               const Corpus* dev = nullptr);

// The one-sided loop with a constant constraint.
OneSidedResult self_train(const Learner& learner, const Corpus& d, const Corpus& unlab, const TrainConfig& cfg,
                          const Corpus* dev = nullptr);

// Index of the row with the highest value, earliest on ties; last row when
// no dev values were recorded.
std::size_t best_row(const Trace& trace, bool second_column = false);

}  // namespace hints
