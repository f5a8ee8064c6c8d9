#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hints/constraints.hpp"
#include "hints/core.hpp"
#include "hints/rng.hpp"
#include "hints/tagger.hpp"

namespace hints {

// ---- discrimination ------------------------------------------------------

struct LengthBucket {
  std::size_t pool = 0;
  std::size_t compatible = 0;
};

struct DiscriminationReport {
  std::string constraint_name;
  std::size_t compatible_count = 0;
  std::size_t pool_size = 0;
  double discrimination = 0;  // pool / compatible; +inf when nothing is compatible
  bool infinite = false;
  double mean_length = 0;
  std::size_t labels_per_vertex = 0;
  // 2(|Y|^V - 1) for whole-structure 0/1 loss, 2V(|Y| - 1) for Hamming loss.
  double zero_one_threshold = 0;
  double hamming_threshold = 0;
  // Quadratic variants: 4(|Y|^V - 1)^2 and 4V^2(|Y| - 1)^2.
  double zero_one_quadratic = 0;
  double hamming_quadratic = 0;
  std::map<std::size_t, LengthBucket> by_length;

  std::string to_tsv() const;
};

// Decodes every pool sentence with the task-2 model h0 and counts how often
// chi(y1, h0(x)) holds.
DiscriminationReport discrimination(const ConstraintFunction& chi, const Corpus& pool, const Tagger& h0,
                                    std::span<const std::vector<std::string>> extras = {});

double hamming_threshold(double mean_len, std::size_t labels_per_vertex);

// ---- weak usefulness -----------------------------------------------------

enum class UsefulnessUnit { Sequence, Token };

// Diagonal: Pr[f = y | h = y] >= Pr[f = y] + eps.
// AsPrinted: Pr[f = y | h = y'] >= Pr[f = y] + eps for every y' != y.
enum class PremiseMode { Diagonal, AsPrinted };

struct LabelUsefulness {
  std::string label;
  double p_true = 0;        // Pr[f = y]
  double p_predicted = 0;   // Pr[h = y]
  double margin1 = 0;       // Pr[h = y] - eps
  double margin2 = 0;       // worst Pr[f = y | h = y'] - Pr[f = y] - eps over non-empty conditioning events
  bool vacuous2 = true;     // no conditioning event had mass
  bool passes1 = false;
  bool passes2 = false;
};

struct UsefulnessReport {
  UsefulnessUnit unit = UsefulnessUnit::Token;
  PremiseMode mode = PremiseMode::Diagonal;
  double epsilon = 0;
  std::size_t events = 0;  // sentences or tokens
  std::vector<LabelUsefulness> labels;
  bool condition1 = false;
  bool condition2 = false;
  bool useful() const { return condition1 && condition2; }
  std::string to_tsv() const;
};

// Sequence mode ranges over the union of observed gold and predicted
// sequences; token mode ranges over the alphabet's labels.
UsefulnessReport check_weakly_useful(std::span<const std::vector<std::string>> gold,
                                     std::span<const std::vector<std::string>> predicted,
                                     std::span<const std::string> alphabet, double epsilon, UsefulnessUnit unit,
                                     PremiseMode mode = PremiseMode::Diagonal);
UsefulnessReport check_weakly_useful(const Tagger& h, const Corpus& reference, Task task, double epsilon,
                                     UsefulnessUnit unit, PremiseMode mode = PremiseMode::Diagonal);

// ---- uncorrelation -------------------------------------------------------

// Deterministic decoders make the per-x condition hold trivially, so this
// measures corpus-level association of per-token output labels instead:
// max |P(a, b) - P(a) P(b)|.
struct UncorrelationReport {
  double max_deviation = 0;
  std::string worst_a, worst_b;
  double tolerance = 0;
  std::size_t tokens = 0;
  bool underpowered = false;  // fewer than two sentences
  bool passes = false;
  std::string to_tsv() const;
};

UncorrelationReport check_uncorrelated(std::span<const std::vector<std::string>> out1,
                                       std::span<const std::vector<std::string>> out2, double tolerance);
UncorrelationReport check_uncorrelated(const Tagger& h1, const Tagger& h2, const Corpus& pool, double tolerance);

// ---- bound verification --------------------------------------------------

// A finite distribution over x with integer weights; f and h map each x to
// a label in [0, labels).
struct BoundInstance {
  std::size_t labels = 0;
  std::int64_t eps_num = 1, eps_den = 100;
  std::vector<std::size_t> compatible;  // the set A
  struct Point {
    std::int64_t weight;
    std::size_t f, h;
  };
  std::vector<Point> points;

  // Text format, '#' comments:
  //   labels <n>
  //   epsilon <num> <den>
  //   compatible <k>...
  //   x <weight> <f> <h>      (one line per support point)
  static BoundInstance parse(std::string_view text);
  std::string to_text() const;
  void validate() const;
};

struct BoundReport {
  bool premises_met = false;
  std::string premise_failure;
  // Exact values rendered as "num/den" plus double approximations.
  std::vector<std::string> left_exact;
  std::vector<double> left;  // per label l; NaN when Pr[f = l] = 0
  std::string right_exact;
  double right = 0;
  bool holds = true;
  std::size_t violating_label = 0;
  std::string to_text() const;
};

// Supports up to 64 labels and 4096 points.
BoundReport verify_theorem1_bound(const BoundInstance& instance, PremiseMode mode = PremiseMode::Diagonal);

// Random instance: 2..max_labels labels, labels..max_points points, weights
// in [1, 1000], each label in A with probability 1/2.
BoundInstance random_bound_instance(Rng& rng, std::size_t max_labels = 6, std::size_t max_points = 20,
                                    std::int64_t eps_num = 1, std::int64_t eps_den = 100);

}  // namespace hints
