#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hints/core.hpp"
#include "hints/hmm.hpp"
#include "hints/lattice.hpp"

namespace hints {

struct PerceptronOptions {
  unsigned epochs = 5;
  std::uint64_t seed = 1;
};

// Feature templates, version "v1": bias, word, lowercased word, 3-byte prefix
// and suffix, capitalization flag, previous and next word, and the optional
// extra channel. Label transitions (with start and stop) are scored
// separately.
std::vector<std::string> token_features(const Sentence& sentence, std::size_t i,
                                        const std::vector<std::string>* extra);

class PerceptronModel {
 public:
  static constexpr std::string_view kTemplateVersion = "v1";

  // `weights` is features.size() x states.size(), row-major by feature.
  // `transitions` is (k+1) x (k+1); index k is the sentence boundary (row k
  // scores the first label, column k scores stopping).
  PerceptronModel(AlphabetPtr alphabet, std::vector<std::string> states, std::vector<std::string> features,
                  std::vector<double> weights, std::vector<double> transitions);

  const AlphabetPtr& alphabet() const { return alphabet_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<std::string>& features() const { return features_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& transitions() const { return transitions_; }
  std::size_t num_states() const { return states_.size(); }
  std::optional<std::size_t> feature_index(std::string_view feature) const;

  Lattice lattice(const Sentence& sentence, const std::vector<std::string>* extra = nullptr) const;

  std::string serialize() const;
  static PerceptronModel deserialize(std::string_view text);

 private:
  AlphabetPtr alphabet_;
  std::vector<std::string> states_;
  std::vector<std::string> features_;
  std::unordered_map<std::string, std::size_t> feature_index_;
  std::vector<double> weights_;
  std::vector<double> transitions_;
};

struct PerceptronTraining {
  PerceptronModel averaged;
  PerceptronModel last;                    // final iterate, before averaging
  std::vector<std::size_t> epoch_mistakes;  // sentences mispredicted during each epoch
};

// Averaged structured perceptron with Viterbi inference. Item order is
// reshuffled every epoch from `seed`; updates are scaled by item weight.
PerceptronTraining train_perceptron_detailed(std::span<const TrainingItem> items, const AlphabetPtr& alphabet,
                                             const PerceptronOptions& options = {});
PerceptronModel train_perceptron(std::span<const TrainingItem> items, const AlphabetPtr& alphabet,
                                 const PerceptronOptions& options = {});
PerceptronModel train_perceptron(const Corpus& corpus, Task task, const PerceptronOptions& options = {});

Decoded perceptron_decode(const PerceptronModel& model, const Sentence& sentence,
                          const std::vector<std::string>* extra = nullptr);

// 1 - exp(-(best - second best)/n), with perceptron scores.
double perceptron_confidence(const PerceptronModel& model, const Sentence& sentence,
                             const std::vector<std::string>* extra = nullptr);

}  // namespace hints
