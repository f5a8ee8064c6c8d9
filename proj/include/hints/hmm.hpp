#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hints/core.hpp"
#include "hints/lattice.hpp"

namespace hints {

struct HmmOptions {
  double alpha = 0.001;             // additive (Dirichlet) smoothing concentration
  unsigned prune_threshold = 1;     // words seen <= this many times become *unknown*
};

// First-order generative HMM. States are the alphabet's labels in alphabet
// order (for composite alphabets, only the composites seen in training).
// Start and stop are virtual states with their own smoothed distributions:
// start is a distribution over first labels, stop is a per-state Bernoulli
// P(stop | s).
class HmmModel {
 public:
  static constexpr std::string_view kUnknown = "*unknown*";

  const AlphabetPtr& alphabet() const { return alphabet_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<std::string>& vocabulary() const { return vocab_; }  // [0] is *unknown*
  double alpha() const { return alpha_; }
  unsigned prune_threshold() const { return prune_; }

  std::size_t num_states() const { return states_.size(); }
  std::size_t word_index(std::string_view word) const;  // 0 for unknown words
  std::optional<std::size_t> state_index(std::string_view label) const;

  double start_prob(std::size_t s) const { return start_[s]; }
  double stop_prob(std::size_t s) const { return stop_[s]; }
  double transition_prob(std::size_t from, std::size_t to) const { return trans_[from * num_states() + to]; }
  double emission_prob(std::size_t s, std::size_t w) const { return emit_[s * vocab_.size() + w]; }

  Lattice lattice(const Sentence& sentence) const;

  // Versioned text format; probabilities printed with 17 significant digits so
  // they parse back to the same doubles.
  std::string serialize() const;
  static HmmModel deserialize(std::string_view text);

 private:
  friend HmmModel train_hmm(std::span<const TrainingItem>, const AlphabetPtr&, const HmmOptions&);

  void finalize();

  AlphabetPtr alphabet_;
  std::vector<std::string> states_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> vocab_index_;
  std::unordered_map<std::string, std::size_t> state_index_;
  double alpha_ = 0.001;
  unsigned prune_ = 1;
  std::vector<double> start_, stop_, trans_, emit_;
  std::vector<double> log_start_, log_stop_, log_trans_, log_emit_;
};

// Weighted counts: each item contributes `weight` to every count it touches.
HmmModel train_hmm(std::span<const TrainingItem> items, const AlphabetPtr& alphabet,
                   const HmmOptions& options = {});
HmmModel train_hmm(const Corpus& corpus, Task task, const HmmOptions& options = {});

struct Decoded {
  std::vector<std::string> labels;  // raw decoder output; may be ill-formed BIO
  double score = 0;
};

Decoded viterbi_decode(const HmmModel& model, const Sentence& sentence);
double sequence_log_prob(const HmmModel& model, const Sentence& sentence,
                         std::span<const std::string> labels);
double sequence_log_prob(const HmmModel& model, const Sentence& sentence, const Labeling& labeling);

// log sum over all labelings, by the forward recursion.
double forward_log_prob(const HmmModel& model, const Sentence& sentence);

// 1 - exp(-(best - second best)/n); 1 when the model has a single state.
double confidence(const HmmModel& model, const Sentence& sentence);

// Shared by both taggers.
double margin_confidence(const Lattice& lattice);

}  // namespace hints
