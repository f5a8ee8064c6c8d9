#include "hints/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "textio.hpp"

namespace hints {

using textio::put_row;
using textio::Reader;

std::size_t HmmModel::word_index(std::string_view word) const {
  auto it = vocab_index_.find(std::string(word));
  return it == vocab_index_.end() ? 0 : it->second;
}

std::optional<std::size_t> HmmModel::state_index(std::string_view label) const {
  auto it = state_index_.find(std::string(label));
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}

void HmmModel::finalize() {
  vocab_index_.clear();
  for (std::size_t i = 0; i < vocab_.size(); ++i) vocab_index_.emplace(vocab_[i], i);
  state_index_.clear();
  for (std::size_t i = 0; i < states_.size(); ++i) state_index_.emplace(states_[i], i);
  auto logs = [](const std::vector<double>& p) {
    std::vector<double> out(p.size());
    std::transform(p.begin(), p.end(), out.begin(), [](double v) { return std::log(v); });
    return out;
  };
  log_start_ = logs(start_);
  log_trans_ = logs(trans_);
  log_emit_ = logs(emit_);
  log_stop_ = logs(stop_);
}

Lattice HmmModel::lattice(const Sentence& sentence) const {
  const std::size_t k = num_states();
  Lattice lat;
  lat.length = sentence.size();
  lat.states = k;
  lat.start = log_start_;
  lat.stop = log_stop_;
  lat.edge = log_trans_;
  lat.node.resize(lat.length * k);
  const std::size_t v = vocab_.size();
  for (std::size_t i = 0; i < lat.length; ++i) {
    std::size_t w = word_index(sentence[i]);
    for (std::size_t s = 0; s < k; ++s) lat.node[i * k + s] = log_emit_[s * v + w];
  }
  return lat;
}

HmmModel train_hmm(std::span<const TrainingItem> items, const AlphabetPtr& alphabet,
                   const HmmOptions& options) {
  if (items.empty()) throw_usage("train_hmm: empty training corpus");
  if (!(options.alpha > 0)) throw_usage("train_hmm: alpha must be positive");
  if (!alphabet) throw_contract("train_hmm: missing alphabet");

  // Raw occurrence counts decide pruning, independent of item weights.
  std::map<std::string, std::size_t> occurrences;
  std::vector<bool> seen(alphabet->size(), false);
  for (const auto& item : items) {
    if (item.labels->size() != item.sentence->size())
      throw_contract("train_hmm: labeling length differs from sentence length");
    for (const auto& w : item.sentence->tokens()) ++occurrences[w];
    for (const auto& l : item.labels->labels()) {
      auto idx = alphabet->index_of(l);
      if (!idx) throw_contract("train_hmm: label '" + l + "' outside the alphabet");
      seen[*idx] = true;
    }
  }

  HmmModel m;
  m.alphabet_ = alphabet;
  m.alpha_ = options.alpha;
  m.prune_ = options.prune_threshold;
  // Composite alphabets are the full POS x chunk product, mostly impossible
  // pairs, so only observed composites become states.
  for (std::size_t i = 0; i < alphabet->size(); ++i)
    if (seen[i] || !alphabet->composite()) m.states_.push_back(alphabet->labels()[i]);
  m.vocab_.emplace_back(HmmModel::kUnknown);
  for (const auto& [w, c] : occurrences)
    if (c > options.prune_threshold && w != HmmModel::kUnknown) m.vocab_.push_back(w);
  m.finalize();

  const std::size_t k = m.num_states(), v = m.vocab_.size();
  std::vector<double> start(k, 0), ends(k, 0), occ(k, 0), trans(k * k, 0), emit(k * v, 0);
  for (const auto& item : items) {
    const double wt = item.weight;
    const auto& labels = item.labels->labels();
    std::size_t prev = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      std::size_t s = *m.state_index(labels[i]);
      if (i == 0) start[s] += wt;
      else trans[prev * k + s] += wt;
      occ[s] += wt;
      emit[s * v + m.word_index((*item.sentence)[i])] += wt;
      prev = s;
    }
    ends[prev] += wt;
  }

  const double a = options.alpha;
  double start_total = 0;
  for (double c : start) start_total += c;
  m.start_.resize(k);
  for (std::size_t s = 0; s < k; ++s) m.start_[s] = (start[s] + a) / (start_total + a * k);
  m.stop_.resize(k);
  for (std::size_t s = 0; s < k; ++s) m.stop_[s] = (ends[s] + a) / (occ[s] + 2 * a);
  m.trans_.resize(k * k);
  for (std::size_t s = 0; s < k; ++s) {
    double row = 0;
    for (std::size_t t = 0; t < k; ++t) row += trans[s * k + t];
    for (std::size_t t = 0; t < k; ++t) m.trans_[s * k + t] = (trans[s * k + t] + a) / (row + a * k);
  }
  m.emit_.resize(k * v);
  for (std::size_t s = 0; s < k; ++s) {
    double row = 0;
    for (std::size_t w = 0; w < v; ++w) row += emit[s * v + w];
    for (std::size_t w = 0; w < v; ++w) m.emit_[s * v + w] = (emit[s * v + w] + a) / (row + a * v);
  }
  m.finalize();
  return m;
}

HmmModel train_hmm(const Corpus& corpus, Task task, const HmmOptions& options) {
  auto items = training_items(corpus, task);
  if (items.size() != corpus.size())
    throw_contract("train_hmm: every example needs the task's labeling");
  return train_hmm(items, corpus.alphabet(task), options);
}

namespace {

std::vector<std::string> to_labels(const HmmModel& m, const std::vector<std::size_t>& path) {
  std::vector<std::string> out;
  out.reserve(path.size());
  for (auto s : path) out.push_back(m.states()[s]);
  return out;
}

}  // namespace

Decoded viterbi_decode(const HmmModel& model, const Sentence& sentence) {
  Path p = viterbi(model.lattice(sentence));
  return Decoded{to_labels(model, p.states), p.score};
}

double sequence_log_prob(const HmmModel& m, const Sentence& sentence, std::span<const std::string> labels) {
  if (labels.size() != sentence.size()) throw_contract("sequence_log_prob: length mismatch");
  double lp = 0;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto s = m.state_index(labels[i]);
    if (!s) {
      if (!m.alphabet()->contains(labels[i]))
        throw_usage("sequence_log_prob: label '" + labels[i] + "' outside the alphabet");
      // Composite never seen in training: no state, no mass.
      return -std::numeric_limits<double>::infinity();
    }
    lp += (i == 0 ? std::log(m.start_prob(*s)) : std::log(m.transition_prob(prev, *s)));
    lp += std::log(m.emission_prob(*s, m.word_index(sentence[i])));
    prev = *s;
  }
  return lp + std::log(m.stop_prob(prev));
}

double sequence_log_prob(const HmmModel& model, const Sentence& sentence, const Labeling& labeling) {
  return sequence_log_prob(model, sentence, std::span<const std::string>(labeling.labels()));
}

namespace {

double log_sum_exp(const std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  double acc = 0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

}  // namespace

double forward_log_prob(const HmmModel& m, const Sentence& sentence) {
  const Lattice lat = m.lattice(sentence);
  const std::size_t k = lat.states;
  std::vector<double> alpha(k), next(k), terms(k);
  for (std::size_t s = 0; s < k; ++s) alpha[s] = lat.start[s] + lat.node_at(0, s);
  for (std::size_t i = 1; i < lat.length; ++i) {
    for (std::size_t s = 0; s < k; ++s) {
      for (std::size_t p = 0; p < k; ++p) terms[p] = alpha[p] + lat.edge_at(p, s);
      next[s] = log_sum_exp(terms) + lat.node_at(i, s);
    }
    alpha.swap(next);
  }
  for (std::size_t s = 0; s < k; ++s) alpha[s] += lat.stop[s];
  return log_sum_exp(alpha);
}

double margin_confidence(const Lattice& lattice) {
  TwoBest tb = viterbi_two_best(lattice);
  if (!tb.has_second) return 1.0;
  double margin = std::max(0.0, tb.best.score - tb.second.score);
  return 1.0 - std::exp(-margin / static_cast<double>(lattice.length));
}

double confidence(const HmmModel& model, const Sentence& sentence) {
  return margin_confidence(model.lattice(sentence));
}

std::string HmmModel::serialize() const {
  std::ostringstream out;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", alpha_);
  out << "hints-hmm 1\n";
  out << "alpha " << buf << '\n';
  out << "prune " << prune_ << '\n';
  out << textio::serialize_alphabet(*alphabet_);
  out << "states " << states_.size() << '\n';
  for (const auto& s : states_) out << s << '\n';
  out << "vocab " << vocab_.size() << '\n';
  for (const auto& w : vocab_) out << w << '\n';
  const std::size_t k = states_.size(), v = vocab_.size();
  out << "start\n";
  put_row(out, start_.data(), k);
  out << "stop\n";
  put_row(out, stop_.data(), k);
  out << "transition\n";
  for (std::size_t s = 0; s < k; ++s) put_row(out, trans_.data() + s * k, k);
  out << "emission\n";
  for (std::size_t s = 0; s < k; ++s) put_row(out, emit_.data() + s * v, v);
  out << "end\n";
  return out.str();
}

HmmModel HmmModel::deserialize(std::string_view text) {
  Reader r(text);
  if (r.line() != "hints-hmm 1") r.fail("not a hints-hmm version 1 model");
  HmmModel m;
  m.alpha_ = std::strtod(std::string(r.keyed("alpha")).c_str(), nullptr);
  m.prune_ = static_cast<unsigned>(r.count("prune"));
  m.alphabet_ = textio::deserialize_alphabet(r.keyed("alphabet"), [&] { return r.line(); });
  std::size_t k = r.count("states");
  for (std::size_t i = 0; i < k; ++i) m.states_.emplace_back(r.line());
  std::size_t v = r.count("vocab");
  for (std::size_t i = 0; i < v; ++i) m.vocab_.emplace_back(r.line());
  r.keyed("start");
  m.start_ = r.row(k);
  r.keyed("stop");
  m.stop_ = r.row(k);
  r.keyed("transition");
  for (std::size_t s = 0; s < k; ++s) {
    auto row = r.row(k);
    m.trans_.insert(m.trans_.end(), row.begin(), row.end());
  }
  r.keyed("emission");
  for (std::size_t s = 0; s < k; ++s) {
    auto row = r.row(v);
    m.emit_.insert(m.emit_.end(), row.begin(), row.end());
  }
  r.keyed("end");
  if (m.states_.empty() || m.vocab_.empty() || m.vocab_[0] != kUnknown) r.fail("inconsistent model");
  m.finalize();
  return m;
}

}  // namespace hints
