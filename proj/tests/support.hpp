#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <limits>
#include <string>
#include <vector>

#include "hints/core.hpp"
#include "hints/hmm.hpp"
#include "hints/perceptron.hpp"
#include "hints/rng.hpp"
#include "hints/tagger.hpp"
#include <map>

namespace testing {

using hints::AlphabetPtr;
using hints::Labeling;
using hints::LabelAlphabet;
using hints::Rng;
using hints::Sentence;

inline Sentence intro_sentence() {
  return Sentence("intro", {"George", "Bush", "spoke", "to", "Congress", "today"});
}

inline Labeling intro_y1() {
  std::vector<std::string> pos{"NNP", "NNP", "VBD", "TO", "NNP", "NN"};
  std::vector<std::string> chunk{"B-NP", "I-NP", "B-VP", "B-PP", "B-NP", "B-NP"};
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < pos.size(); ++i) labels.push_back(hints::make_composite(pos[i], chunk[i]));
  return Labeling(LabelAlphabet::default_syntax(), labels);
}

inline Labeling ner(std::vector<std::string> labels) {
  return Labeling(LabelAlphabet::default_entity(), std::move(labels));
}

inline const std::vector<std::string> kNer1{"B-PER", "I-PER", "I-PER", "O", "B-ORG", "O"};
inline const std::vector<std::string> kNer2{"B-PER", "I-PER", "O", "O", "O", "O"};
inline const std::vector<std::string> kNer3{"B-PER", "I-PER", "O", "O", "B-ORG", "I-ORG"};
inline const std::vector<std::string> kNer4{"B-PER", "I-PER", "O", "O", "B-ORG", "O"};

// Every index sequence in [0,k)^n, odometer order.
inline std::vector<std::vector<std::size_t>> all_paths(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(n, 0);
  while (true) {
    out.push_back(cur);
    std::size_t i = 0;
    while (i < n && ++cur[i] == k) cur[i++] = 0;
    if (i == n) break;
  }
  return out;
}

// Joint log-probability computed straight from the model's tables.
inline double hmm_joint(const hints::HmmModel& m, const Sentence& s, const std::vector<std::size_t>& path) {
  double lp = std::log(m.start_prob(path[0]));
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) lp += std::log(m.transition_prob(path[i - 1], path[i]));
    lp += std::log(m.emission_prob(path[i], m.word_index(s[i])));
  }
  return lp + std::log(m.stop_prob(path.back()));
}

// Random HMM: weighted training on random label sequences with no pruning.
inline hints::HmmModel random_hmm(Rng& rng, std::size_t k, const std::vector<std::string>& words) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < k; ++i) labels.push_back("L" + std::to_string(i));
  auto alphabet = std::make_shared<const LabelAlphabet>("toy", labels);
  std::vector<Sentence> sents;
  std::vector<Labeling> labs;
  const std::size_t count = 3 + rng.below(6);
  for (std::size_t j = 0; j < count; ++j) {
    std::size_t n = 1 + rng.below(4);
    std::vector<std::string> toks, ls;
    for (std::size_t i = 0; i < n; ++i) {
      toks.push_back(words[rng.below(words.size())]);
      ls.push_back(labels[rng.below(k)]);
    }
    sents.emplace_back("s" + std::to_string(j), toks);
    labs.emplace_back(alphabet, ls);
  }
  std::vector<hints::TrainingItem> items;
  for (std::size_t j = 0; j < count; ++j) items.push_back({&sents[j], &labs[j], 0.1 + 3 * rng.uniform01(), nullptr});
  hints::HmmOptions opts;
  opts.alpha = 0.05 + rng.uniform01();
  opts.prune_threshold = 0;
  return hints::train_hmm(items, alphabet, opts);
}

// Random perceptron whose features cover the given sentence.
inline hints::PerceptronModel random_perceptron(Rng& rng, std::size_t k, const Sentence& s,
                                                 double zero_rate = 0.0) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < k; ++i) labels.push_back("L" + std::to_string(i));
  auto alphabet = std::make_shared<const LabelAlphabet>("toy", labels);
  std::vector<std::string> feats;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (auto& f : hints::token_features(s, i, nullptr))
      if (std::find(feats.begin(), feats.end(), f) == feats.end()) feats.push_back(f);
  auto draw = [&] { return rng.bernoulli(zero_rate) ? 0.0 : std::round((rng.uniform01() * 4 - 2) * 8) / 8; };
  std::vector<double> w(feats.size() * k), t((k + 1) * (k + 1));
  for (auto& x : w) x = draw();
  for (auto& x : t) x = draw();
  return hints::PerceptronModel(alphabet, labels, feats, w, t);
}

// Score of a path, summed feature by feature from the model's weights.
inline double perceptron_score(const hints::PerceptronModel& m, const Sentence& s,
                               const std::vector<std::size_t>& path, const std::vector<std::string>* extra = nullptr) {
  const std::size_t k = m.num_states();
  const auto& t = m.transitions();
  double score = t[k * (k + 1) + path[0]] + t[path.back() * (k + 1) + k];
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) score += t[path[i - 1] * (k + 1) + path[i]];
    for (auto& f : hints::token_features(s, i, extra))
      if (auto idx = m.feature_index(f)) score += m.weights()[*idx * k + path[i]];
  }
  return score;
}

inline Sentence random_sentence(Rng& rng, std::size_t n, const std::vector<std::string>& words) {
  std::vector<std::string> toks;
  for (std::size_t i = 0; i < n; ++i) toks.push_back(words[rng.below(words.size())]);
  return Sentence("r", toks);
}

// Tagger that reproduces stored labelings, looked up by sentence id.
class LookupTagger final : public hints::Tagger {
 public:
  LookupTagger(AlphabetPtr alphabet, std::map<std::string, std::vector<std::string>> table)
      : alphabet_(std::move(alphabet)), states_(alphabet_->labels()), table_(std::move(table)) {}
  std::string_view kind() const override { return "lookup"; }
  const AlphabetPtr& alphabet() const override { return alphabet_; }
  const std::vector<std::string>& states() const override { return states_; }
  hints::Lattice lattice(const Sentence& s, const std::vector<std::string>*) const override {
    const auto& want = table_.at(s.id());
    const std::size_t k = states_.size();
    hints::Lattice lat;
    lat.length = s.size();
    lat.states = k;
    lat.start.assign(k, 0);
    lat.stop.assign(k, 0);
    lat.edge.assign(k * k, 0);
    lat.node.assign(s.size() * k, 0);
    for (std::size_t i = 0; i < s.size(); ++i) lat.node[i * k + *alphabet_->index_of(want[i])] = 1;
    return lat;
  }
  std::string serialize() const override { return {}; }

 private:
  AlphabetPtr alphabet_;
  std::vector<std::string> states_;
  std::map<std::string, std::vector<std::string>> table_;
};

}  // namespace testing
