#include "hints/tagger.hpp"

#include <cmath>

namespace hints {

namespace {

std::vector<std::string> state_labels(const Tagger& tagger, const std::vector<std::size_t>& path) {
  std::vector<std::string> out;
  out.reserve(path.size());
  for (auto s : path) out.push_back(tagger.states()[s]);
  return out;
}

}  // namespace

Labeling Tagger::decode(const Sentence& sentence, const std::vector<std::string>* extra) const {
  Path p = viterbi(lattice(sentence, extra));
  return Labeling::repaired(alphabet(), state_labels(*this, p.states));
}

double Tagger::confidence(const Sentence& sentence, const std::vector<std::string>* extra) const {
  return margin_confidence(lattice(sentence, extra));
}

Prediction Tagger::predict(const Sentence& sentence, const std::vector<std::string>* extra) const {
  const Lattice lat = lattice(sentence, extra);
  TwoBest tb = viterbi_two_best(lat);
  double conf = 1.0;
  if (tb.has_second)
    conf = 1.0 - std::exp(-std::max(0.0, tb.best.score - tb.second.score) / static_cast<double>(lat.length));
  return Prediction{Labeling::repaired(alphabet(), state_labels(*this, tb.best.states)), conf};
}

std::unique_ptr<Tagger> Tagger::deserialize(std::string_view text) {
  if (text.starts_with("hints-hmm ")) return std::make_unique<HmmTagger>(HmmModel::deserialize(text));
  if (text.starts_with("hints-perceptron "))
    return std::make_unique<PerceptronTagger>(PerceptronModel::deserialize(text));
  throw_data("unrecognized model file");
}

}  // namespace hints
