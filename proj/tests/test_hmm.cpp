#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hints/tagger.hpp"
#include "support.hpp"

using namespace hints;

namespace {

AlphabetPtr xy() { return std::make_shared<const LabelAlphabet>("toy", std::vector<std::string>{"X", "Y"}); }

struct Toy {
  std::vector<Sentence> sents;
  std::vector<Labeling> labs;
  std::vector<TrainingItem> items() const {
    std::vector<TrainingItem> out;
    for (std::size_t i = 0; i < sents.size(); ++i) out.push_back({&sents[i], &labs[i], 1.0, nullptr});
    return out;
  }
  void add(std::vector<std::string> toks, std::vector<std::string> ls, const AlphabetPtr& a) {
    sents.emplace_back("t" + std::to_string(sents.size()), std::move(toks));
    labs.emplace_back(a, std::move(ls));
  }
};

double logsumexp(const std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  double s = 0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

const std::vector<std::string> kWords{"a", "b", "c", "d"};

}  // namespace

TEST_CASE("defaults") {
  HmmOptions o;
  CHECK(o.alpha == 0.001);
  CHECK(o.prune_threshold == 1);
}

TEST_CASE("one transition smoothed over two successors") {
  auto a = xy();
  Toy t;
  t.add({"a", "b"}, {"X", "Y"}, a);
  HmmOptions o;
  o.prune_threshold = 0;
  auto items = t.items();
  HmmModel m = train_hmm(items, a, o);
  const double al = 0.001;
  CHECK(m.transition_prob(0, 1) == doctest::Approx((1 + al) / (1 + 2 * al)).epsilon(1e-12));
  CHECK(m.transition_prob(0, 0) == doctest::Approx(al / (1 + 2 * al)).epsilon(1e-12));
  // Y never transitions: uniform row.
  CHECK(m.transition_prob(1, 0) == doctest::Approx(0.5));
  // vocabulary is {*unknown*, a, b}; X emitted a once.
  CHECK(m.emission_prob(0, m.word_index("a")) == doctest::Approx((1 + al) / (1 + 3 * al)).epsilon(1e-12));
  CHECK(m.start_prob(0) == doctest::Approx((1 + al) / (1 + 2 * al)).epsilon(1e-12));
  CHECK(m.stop_prob(1) == doctest::Approx((1 + al) / (1 + 2 * al)).epsilon(1e-12));
  CHECK(m.stop_prob(0) == doctest::Approx(al / (1 + 2 * al)).epsilon(1e-12));
}

TEST_CASE("pruning maps rare words to the unknown token") {
  auto a = xy();
  Toy t;
  t.add({"a", "b", "a"}, {"X", "Y", "X"}, a);
  auto items = t.items();
  HmmModel m = train_hmm(items, a);
  CHECK(m.vocabulary().size() == 2);
  CHECK(m.vocabulary()[0] == HmmModel::kUnknown);
  CHECK(m.word_index("b") == 0);
  CHECK(m.word_index("never") == 0);
  CHECK(m.word_index("a") == 1);
}

TEST_CASE("pruning is a no-op when every word repeats") {
  auto a = xy();
  Toy t;
  t.add({"a", "b", "c"}, {"X", "Y", "X"}, a);
  t.add({"c", "b", "a"}, {"Y", "Y", "X"}, a);
  auto items = t.items();
  HmmOptions p0, p1;
  p0.prune_threshold = 0;
  HmmModel m0 = train_hmm(items, a, p0), m1 = train_hmm(items, a, p1);
  CHECK(m0.vocabulary() == m1.vocabulary());
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(m0.start_prob(s) == m1.start_prob(s));
    CHECK(m0.stop_prob(s) == m1.stop_prob(s));
    for (std::size_t u = 0; u < 2; ++u) CHECK(m0.transition_prob(s, u) == m1.transition_prob(s, u));
    for (std::size_t w = 0; w < m0.vocabulary().size(); ++w)
      CHECK(m0.emission_prob(s, w) == m1.emission_prob(s, w));
  }
}

TEST_CASE("training errors") {
  auto a = xy();
  std::vector<TrainingItem> none;
  CHECK_THROWS_AS(train_hmm(none, a), Error);
  Toy t;
  t.add({"a"}, {"X"}, a);
  auto items = t.items();
  HmmOptions bad;
  bad.alpha = 0;
  CHECK_THROWS_AS(train_hmm(items, a, bad), Error);
  bad.alpha = -1;
  CHECK_THROWS_AS(train_hmm(items, a, bad), Error);
}

TEST_CASE("rows are stochastic and positive") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    HmmModel m = testing::random_hmm(rng, 2 + rng.below(3), kWords);
    const std::size_t k = m.num_states(), v = m.vocabulary().size();
    double start = 0;
    for (std::size_t s = 0; s < k; ++s) {
      start += m.start_prob(s);
      CHECK(m.stop_prob(s) > 0);
      CHECK(m.stop_prob(s) < 1);
      double tr = 0, em = 0;
      for (std::size_t u = 0; u < k; ++u) {
        CHECK(m.transition_prob(s, u) > 0);
        tr += m.transition_prob(s, u);
      }
      for (std::size_t w = 0; w < v; ++w) {
        CHECK(m.emission_prob(s, w) > 0);
        em += m.emission_prob(s, w);
      }
      CHECK(std::abs(tr - 1) <= 1e-9);
      CHECK(std::abs(em - 1) <= 1e-9);
    }
    CHECK(std::abs(start - 1) <= 1e-9);
  }
}

TEST_CASE("forced path") {
  auto a = xy();
  Toy t;
  t.add({"a", "a", "a"}, {"X", "X", "X"}, a);
  t.add({"b", "b"}, {"Y", "Y"}, a);
  auto items = t.items();
  HmmModel m = train_hmm(items, a);
  auto d = viterbi_decode(m, Sentence("s", {"a", "a", "a"}));
  CHECK(d.labels == std::vector<std::string>{"X", "X", "X"});
}

TEST_CASE("viterbi against enumeration") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t k = 2 + rng.below(2);
    HmmModel m = testing::random_hmm(rng, k, {"a", "b", "c"});
    std::size_t n = 1 + rng.below(4);
    Sentence s = testing::random_sentence(rng, n, {"a", "b", "c", "z"});
    double best = -INFINITY;
    for (auto& p : testing::all_paths(n, k)) best = std::max(best, testing::hmm_joint(m, s, p));
    auto d = viterbi_decode(m, s);
    CHECK(std::abs(d.score - best) <= 1e-9);
    CHECK(std::abs(sequence_log_prob(m, s, d.labels) - best) <= 1e-9);
    CHECK(d.score == doctest::Approx(sequence_log_prob(m, s, d.labels)).epsilon(1e-12));
  }
}

TEST_CASE("single token log probability unrolled") {
  auto a = xy();
  Toy t;
  t.add({"a", "b"}, {"X", "Y"}, a);
  t.add({"b"}, {"Y"}, a);
  auto items = t.items();
  HmmModel m = train_hmm(items, a);
  Sentence s("s", {"b"});
  double expect = std::log(m.start_prob(0)) + std::log(m.emission_prob(0, m.word_index("b"))) +
                  std::log(m.stop_prob(0));
  CHECK(sequence_log_prob(m, s, std::vector<std::string>{"X"}) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(std::isfinite(sequence_log_prob(m, s, std::vector<std::string>{"Y"})));
  CHECK_THROWS_AS(sequence_log_prob(m, s, std::vector<std::string>{"Q"}), Error);
  CHECK_THROWS_AS(sequence_log_prob(m, s, std::vector<std::string>{"X", "X"}), Error);
}

TEST_CASE("forward equals the enumerated total") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t k = 2 + rng.below(2);
    HmmModel m = testing::random_hmm(rng, k, kWords);
    std::size_t n = 1 + rng.below(3);
    Sentence s = testing::random_sentence(rng, n, kWords);
    std::vector<double> all;
    for (auto& p : testing::all_paths(n, k)) all.push_back(testing::hmm_joint(m, s, p));
    CHECK(forward_log_prob(m, s) == doctest::Approx(logsumexp(all)).epsilon(1e-12));
  }
}

TEST_CASE("duplicating a sentence does not lower its probability") {
  auto a = xy();
  Toy one, two;
  for (Toy* t : {&one, &two}) {
    t->add({"a", "b", "a"}, {"X", "Y", "X"}, a);
    t->add({"b", "b"}, {"Y", "X"}, a);
  }
  two.add({"a", "b", "a"}, {"X", "Y", "X"}, a);
  auto i1 = one.items(), i2 = two.items();
  HmmOptions o;
  o.prune_threshold = 0;
  HmmModel m1 = train_hmm(i1, a, o), m2 = train_hmm(i2, a, o);
  Sentence s("s", {"a", "b", "a"});
  auto d1 = viterbi_decode(m1, s);
  CHECK(sequence_log_prob(m2, s, d1.labels) >= sequence_log_prob(m1, s, d1.labels));
}

TEST_CASE("confidence") {
  SUBCASE("single state") {
    auto syn = LabelAlphabet::default_syntax();
    Toy t;
    t.add({"a", "a"}, {"NN|B-NP", "NN|B-NP"}, syn);
    auto items = t.items();
    HmmModel m = train_hmm(items, syn);
    REQUIRE(m.num_states() == 1);
    CHECK(confidence(m, Sentence("s", {"a"})) == 1.0);
  }
  SUBCASE("symmetric model has zero margin") {
    auto a = xy();
    Toy t;
    t.add({"a"}, {"X"}, a);
    t.add({"a"}, {"Y"}, a);
    auto items = t.items();
    HmmModel m = train_hmm(items, a);
    CHECK(confidence(m, Sentence("s", {"a"})) == doctest::Approx(0.0));
  }
  SUBCASE("margin of log 2 on one token") {
    Lattice lat;
    lat.length = 1;
    lat.states = 2;
    lat.start = {std::log(2.0), 0};
    lat.stop = {0, 0};
    lat.edge.assign(4, 0);
    lat.node = {0, 0};
    CHECK(margin_confidence(lat) == doctest::Approx(0.5).epsilon(1e-12));
    lat.length = 2;
    lat.node = {0, 0, std::log(2.0), 0};
    CHECK(margin_confidence(lat) == doctest::Approx(1 - std::exp(-std::log(2.0) / 2)).epsilon(1e-12));
  }
  SUBCASE("range and determinism") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
      HmmModel m = testing::random_hmm(rng, 2 + rng.below(3), kWords);
      Sentence s = testing::random_sentence(rng, 1 + rng.below(5), kWords);
      double c = confidence(m, s);
      CHECK(c >= 0);
      CHECK(c < 1);
      CHECK(c == confidence(m, s));
    }
  }
}

TEST_CASE("serialization round-trips exactly") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    HmmModel m = testing::random_hmm(rng, 2 + rng.below(3), kWords);
    std::string text = m.serialize();
    HmmModel back = HmmModel::deserialize(text);
    CHECK(back.serialize() == text);
    CHECK(back.states() == m.states());
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      CHECK(back.start_prob(s) == m.start_prob(s));
      for (std::size_t w = 0; w < m.vocabulary().size(); ++w) CHECK(back.emission_prob(s, w) == m.emission_prob(s, w));
    }
    auto tagger = Tagger::deserialize(text);
    CHECK(tagger->kind() == "hmm");
  }
  CHECK_THROWS_AS(HmmModel::deserialize("hints-hmm 2\n"), Error);
  CHECK_THROWS_AS(HmmModel::deserialize("hints-hmm 1\nalpha 0.1\n"), Error);
}

TEST_CASE("composite alphabets keep only observed states") {
  auto syn = LabelAlphabet::default_syntax();
  Toy t;
  t.add({"a", "b"}, {"NNP|B-NP", "VBD|B-VP"}, syn);
  auto items = t.items();
  HmmModel m = train_hmm(items, syn);
  CHECK(m.num_states() == 2);
  CHECK(sequence_log_prob(m, Sentence("s", {"a"}), std::vector<std::string>{"NN|B-NP"}) == -INFINITY);
}
