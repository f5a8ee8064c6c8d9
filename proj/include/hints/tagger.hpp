#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "hints/core.hpp"
#include "hints/hmm.hpp"
#include "hints/perceptron.hpp"

namespace hints {

struct Prediction {
  Labeling labels;  // repaired to well-formed BIO
  double confidence = 0;
};

// A trained sequence labeler, either learner behind one interface.
class Tagger {
 public:
  virtual ~Tagger() = default;

  virtual std::string_view kind() const = 0;  // "hmm" or "perceptron"
  virtual const AlphabetPtr& alphabet() const = 0;
  virtual const std::vector<std::string>& states() const = 0;  // lattice state -> label
  virtual Lattice lattice(const Sentence& sentence, const std::vector<std::string>* extra = nullptr) const = 0;
  virtual std::string serialize() const = 0;

  // Viterbi output with ill-formed BIO repaired (I-X -> B-X).
  Labeling decode(const Sentence& sentence, const std::vector<std::string>* extra = nullptr) const;
  double confidence(const Sentence& sentence, const std::vector<std::string>* extra = nullptr) const;
  // Both at once; one two-best pass.
  Prediction predict(const Sentence& sentence, const std::vector<std::string>* extra = nullptr) const;

  static std::unique_ptr<Tagger> deserialize(std::string_view text);
};

class HmmTagger final : public Tagger {
 public:
  explicit HmmTagger(HmmModel model) : model_(std::move(model)) {}
  std::string_view kind() const override { return "hmm"; }
  const AlphabetPtr& alphabet() const override { return model_.alphabet(); }
  const std::vector<std::string>& states() const override { return model_.states(); }
  Lattice lattice(const Sentence& sentence, const std::vector<std::string>*) const override {
    return model_.lattice(sentence);
  }
  std::string serialize() const override { return model_.serialize(); }
  const HmmModel& model() const { return model_; }

 private:
  HmmModel model_;
};

class PerceptronTagger final : public Tagger {
 public:
  explicit PerceptronTagger(PerceptronModel model) : model_(std::move(model)) {}
  std::string_view kind() const override { return "perceptron"; }
  const AlphabetPtr& alphabet() const override { return model_.alphabet(); }
  const std::vector<std::string>& states() const override { return model_.states(); }
  Lattice lattice(const Sentence& sentence, const std::vector<std::string>* extra) const override {
    return model_.lattice(sentence, extra);
  }
  std::string serialize() const override { return model_.serialize(); }
  const PerceptronModel& model() const { return model_; }

 private:
  PerceptronModel model_;
};

class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string_view kind() const = 0;
  virtual bool uses_extra_features() const = 0;
  virtual std::unique_ptr<Tagger> train(std::span<const TrainingItem> items, const AlphabetPtr& alphabet) const = 0;
};

class HmmLearner final : public Learner {
 public:
  explicit HmmLearner(HmmOptions options = {}) : options_(options) {}
  std::string_view kind() const override { return "hmm"; }
  bool uses_extra_features() const override { return false; }
  std::unique_ptr<Tagger> train(std::span<const TrainingItem> items, const AlphabetPtr& alphabet) const override {
    return std::make_unique<HmmTagger>(train_hmm(items, alphabet, options_));
  }

 private:
  HmmOptions options_;
};

class PerceptronLearner final : public Learner {
 public:
  explicit PerceptronLearner(PerceptronOptions options = {}) : options_(options) {}
  std::string_view kind() const override { return "perceptron"; }
  bool uses_extra_features() const override { return true; }
  std::unique_ptr<Tagger> train(std::span<const TrainingItem> items, const AlphabetPtr& alphabet) const override {
    return std::make_unique<PerceptronTagger>(train_perceptron(items, alphabet, options_));
  }

 private:
  PerceptronOptions options_;
};

}  // namespace hints
