#include "hints/perceptron.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "hints/rng.hpp"
#include "textio.hpp"

namespace hints {

std::vector<std::string> token_features(const Sentence& sentence, std::size_t i,
                                        const std::vector<std::string>* extra) {
  const std::string& w = sentence[i];
  std::string lower = w;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::vector<std::string> f;
  f.reserve(9);
  f.emplace_back("b");
  f.push_back("w=" + w);
  f.push_back("lw=" + lower);
  f.push_back("p3=" + w.substr(0, 3));
  f.push_back("s3=" + (w.size() > 3 ? w.substr(w.size() - 3) : w));
  f.push_back(std::string("cap=") + (std::isupper(static_cast<unsigned char>(w[0])) ? "1" : "0"));
  f.push_back("pw=" + (i > 0 ? sentence[i - 1] : std::string("<s>")));
  f.push_back("nw=" + (i + 1 < sentence.size() ? sentence[i + 1] : std::string("</s>")));
  if (extra) f.push_back("x=" + (*extra)[i]);
  return f;
}

PerceptronModel::PerceptronModel(AlphabetPtr alphabet, std::vector<std::string> states,
                                 std::vector<std::string> features, std::vector<double> weights,
                                 std::vector<double> transitions)
    : alphabet_(std::move(alphabet)),
      states_(std::move(states)),
      features_(std::move(features)),
      weights_(std::move(weights)),
      transitions_(std::move(transitions)) {
  const std::size_t k = states_.size();
  if (k == 0) throw_contract("perceptron model without states");
  if (weights_.size() != features_.size() * k) throw_contract("perceptron weight table has the wrong size");
  if (transitions_.size() != (k + 1) * (k + 1)) throw_contract("perceptron transition table has the wrong size");
  for (std::size_t i = 0; i < features_.size(); ++i) feature_index_.emplace(features_[i], i);
}

std::optional<std::size_t> PerceptronModel::feature_index(std::string_view feature) const {
  auto it = feature_index_.find(std::string(feature));
  if (it == feature_index_.end()) return std::nullopt;
  return it->second;
}

namespace {

void fill_lattice(Lattice& lat, std::size_t k, const std::vector<double>& trans) {
  lat.states = k;
  lat.start.resize(k);
  lat.stop.resize(k);
  lat.edge.resize(k * k);
  for (std::size_t s = 0; s < k; ++s) {
    lat.start[s] = trans[k * (k + 1) + s];
    lat.stop[s] = trans[s * (k + 1) + k];
    for (std::size_t t = 0; t < k; ++t) lat.edge[s * k + t] = trans[s * (k + 1) + t];
  }
}

void fill_nodes(Lattice& lat, const std::vector<std::vector<std::size_t>>& feats, const std::vector<double>& w) {
  const std::size_t k = lat.states;
  lat.length = feats.size();
  lat.node.assign(lat.length * k, 0.0);
  for (std::size_t i = 0; i < lat.length; ++i)
    for (std::size_t f : feats[i])
      for (std::size_t s = 0; s < k; ++s) lat.node[i * k + s] += w[f * k + s];
}

}  // namespace

Lattice PerceptronModel::lattice(const Sentence& sentence, const std::vector<std::string>* extra) const {
  if (extra && extra->size() != sentence.size()) throw_contract("extra feature channel length mismatch");
  std::vector<std::vector<std::size_t>> feats(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i)
    for (const auto& f : token_features(sentence, i, extra))
      if (auto idx = feature_index(f)) feats[i].push_back(*idx);
  Lattice lat;
  fill_lattice(lat, num_states(), transitions_);
  fill_nodes(lat, feats, weights_);
  return lat;
}

PerceptronTraining train_perceptron_detailed(std::span<const TrainingItem> items, const AlphabetPtr& alphabet,
                                             const PerceptronOptions& options) {
  if (items.empty()) throw_usage("train_perceptron: empty training corpus");
  if (options.epochs == 0) throw_usage("train_perceptron: epochs must be at least 1");
  if (!alphabet) throw_contract("train_perceptron: missing alphabet");

  std::vector<bool> seen(alphabet->size(), false);
  for (const auto& item : items) {
    if (item.labels->size() != item.sentence->size())
      throw_contract("train_perceptron: labeling length differs from sentence length");
    for (const auto& l : item.labels->labels()) {
      auto idx = alphabet->index_of(l);
      if (!idx) throw_contract("train_perceptron: label '" + l + "' outside the alphabet");
      seen[*idx] = true;
    }
  }
  std::vector<std::string> states;
  std::unordered_map<std::string, std::size_t> state_index;
  for (std::size_t i = 0; i < alphabet->size(); ++i) {
    if (!seen[i] && alphabet->composite()) continue;
    state_index.emplace(alphabet->labels()[i], states.size());
    states.push_back(alphabet->labels()[i]);
  }
  const std::size_t k = states.size();

  // Feature ids in first-seen order over the unshuffled items.
  std::vector<std::string> features;
  std::unordered_map<std::string, std::size_t> feature_index;
  std::vector<std::vector<std::vector<std::size_t>>> item_feats(items.size());
  std::vector<std::vector<std::size_t>> gold(items.size());
  for (std::size_t n = 0; n < items.size(); ++n) {
    const auto& item = items[n];
    if (item.extra && item.extra->size() != item.sentence->size())
      throw_contract("train_perceptron: extra feature channel length mismatch");
    auto& per_token = item_feats[n];
    per_token.resize(item.sentence->size());
    for (std::size_t i = 0; i < item.sentence->size(); ++i) {
      for (auto& f : token_features(*item.sentence, i, item.extra)) {
        auto [it, inserted] = feature_index.emplace(f, features.size());
        if (inserted) features.push_back(std::move(f));
        per_token[i].push_back(it->second);
      }
      gold[n].push_back(state_index.at((*item.labels)[i]));
    }
  }

  const std::size_t f_count = features.size();
  std::vector<double> w(f_count * k, 0.0), wu(f_count * k, 0.0);
  std::vector<double> t((k + 1) * (k + 1), 0.0), tu((k + 1) * (k + 1), 0.0);
  double counter = 1.0;

  auto update_path = [&](const std::vector<std::vector<std::size_t>>& feats, const std::vector<std::size_t>& path,
                         double delta) {
    std::size_t prev = k;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const std::size_t s = path[i];
      for (std::size_t f : feats[i]) {
        w[f * k + s] += delta;
        wu[f * k + s] += counter * delta;
      }
      t[prev * (k + 1) + s] += delta;
      tu[prev * (k + 1) + s] += counter * delta;
      prev = s;
    }
    t[prev * (k + 1) + k] += delta;
    tu[prev * (k + 1) + k] += counter * delta;
  };

  PerceptronTraining result{PerceptronModel(alphabet, states, {}, {}, std::vector<double>((k + 1) * (k + 1))),
                            PerceptronModel(alphabet, states, {}, {}, std::vector<double>((k + 1) * (k + 1))),
                            {}};
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(options.seed);
  Lattice lat;
  for (unsigned epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    std::size_t mistakes = 0;
    for (std::size_t n : order) {
      fill_lattice(lat, k, t);
      fill_nodes(lat, item_feats[n], w);
      Path pred = viterbi(lat);
      if (pred.states != gold[n]) {
        ++mistakes;
        const double wt = items[n].weight;
        update_path(item_feats[n], gold[n], wt);
        update_path(item_feats[n], pred.states, -wt);
      }
      counter += 1.0;
    }
    result.epoch_mistakes.push_back(mistakes);
  }

  std::vector<double> wa(w.size()), ta(t.size());
  for (std::size_t i = 0; i < w.size(); ++i) wa[i] = w[i] - wu[i] / counter;
  for (std::size_t i = 0; i < t.size(); ++i) ta[i] = t[i] - tu[i] / counter;
  result.averaged = PerceptronModel(alphabet, states, features, std::move(wa), std::move(ta));
  result.last = PerceptronModel(alphabet, states, std::move(features), std::move(w), std::move(t));
  return result;
}

PerceptronModel train_perceptron(std::span<const TrainingItem> items, const AlphabetPtr& alphabet,
                                 const PerceptronOptions& options) {
  return train_perceptron_detailed(items, alphabet, options).averaged;
}

PerceptronModel train_perceptron(const Corpus& corpus, Task task, const PerceptronOptions& options) {
  auto items = training_items(corpus, task);
  if (items.size() != corpus.size())
    throw_contract("train_perceptron: every example needs the task's labeling");
  return train_perceptron(items, corpus.alphabet(task), options);
}

Decoded perceptron_decode(const PerceptronModel& model, const Sentence& sentence,
                          const std::vector<std::string>* extra) {
  Path p = viterbi(model.lattice(sentence, extra));
  Decoded out;
  out.score = p.score;
  out.labels.reserve(p.states.size());
  for (auto s : p.states) out.labels.push_back(model.states()[s]);
  return out;
}

double perceptron_confidence(const PerceptronModel& model, const Sentence& sentence,
                             const std::vector<std::string>* extra) {
  return margin_confidence(model.lattice(sentence, extra));
}

std::string PerceptronModel::serialize() const {
  std::ostringstream out;
  const std::size_t k = num_states();
  out << "hints-perceptron 1\n";
  out << "template " << kTemplateVersion << '\n';
  out << textio::serialize_alphabet(*alphabet_);
  out << "states " << k << '\n';
  for (const auto& s : states_) out << s << '\n';
  std::size_t nonzero = 0;
  for (std::size_t f = 0; f < features_.size(); ++f)
    if (std::any_of(weights_.begin() + f * k, weights_.begin() + (f + 1) * k, [](double v) { return v != 0; }))
      ++nonzero;
  out << "features " << nonzero << '\n';
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const double* row = weights_.data() + f * k;
    if (std::none_of(row, row + k, [](double v) { return v != 0; })) continue;
    out << features_[f] << '\n';
    textio::put_row(out, row, k);
  }
  out << "transitions\n";
  for (std::size_t s = 0; s <= k; ++s) textio::put_row(out, transitions_.data() + s * (k + 1), k + 1);
  out << "end\n";
  return out.str();
}

PerceptronModel PerceptronModel::deserialize(std::string_view text) {
  textio::Reader r(text);
  if (r.line() != "hints-perceptron 1") r.fail("not a hints-perceptron version 1 model");
  if (r.keyed("template") != kTemplateVersion) r.fail("unsupported feature template version");
  auto alphabet = textio::deserialize_alphabet(r.keyed("alphabet"), [&] { return r.line(); });
  std::size_t k = r.count("states");
  std::vector<std::string> states;
  for (std::size_t i = 0; i < k; ++i) states.emplace_back(r.line());
  std::size_t nf = r.count("features");
  std::vector<std::string> features;
  std::vector<double> weights;
  for (std::size_t f = 0; f < nf; ++f) {
    features.emplace_back(r.line());
    auto row = r.row(k);
    weights.insert(weights.end(), row.begin(), row.end());
  }
  r.keyed("transitions");
  std::vector<double> trans;
  for (std::size_t s = 0; s <= k; ++s) {
    auto row = r.row(k + 1);
    trans.insert(trans.end(), row.begin(), row.end());
  }
  r.keyed("end");
  return PerceptronModel(std::move(alphabet), std::move(states), std::move(features), std::move(weights),
                         std::move(trans));
}

}  // namespace hints
