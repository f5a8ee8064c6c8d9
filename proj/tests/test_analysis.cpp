#include <cmath>
#include <map>

#include "doctest.h"
#include "hints/analysis.hpp"
#include "hints/synth.hpp"
#include "support.hpp"

using namespace hints;

namespace {

using Seqs = std::vector<std::vector<std::string>>;

struct Fixture {
  Corpus pool;
  std::unique_ptr<Tagger> h0;
};

Fixture synthetic_fixture() {
  SynthConfig cfg;
  cfg.seed = 5;
  Corpus all = generate(cfg, 400);
  SplitSizes sizes;
  sizes.d2 = 60;
  sizes.unlab = 300;
  Splits s = split(all, sizes, 3, UnlabMode::OneSided);
  return {s.unlab, std::make_unique<HmmTagger>(train_hmm(s.d2, Task::Entity))};
}

BoundInstance from_points(std::size_t labels, std::vector<std::size_t> a,
                          std::vector<std::tuple<std::int64_t, std::size_t, std::size_t>> pts) {
  BoundInstance inst;
  inst.labels = labels;
  inst.compatible = std::move(a);
  for (auto [w, f, h] : pts) inst.points.push_back({w, f, h});
  return inst;
}

}  // namespace

TEST_CASE("hamming threshold arithmetic") {
  CHECK(hamming_threshold(26, 9) == 416);
  CHECK(hamming_threshold(1, 2) == 2);
  CHECK(hamming_threshold(10, 3) == 40);
  CHECK_THROWS_AS(hamming_threshold(10, 1), Error);
  CHECK_THROWS_AS(hamming_threshold(0.5, 3), Error);
}

TEST_CASE("discrimination laws on a synthetic pool") {
  auto fx = synthetic_fixture();
  auto constant = discrimination(ConstraintFunction::make(ConstraintKind::Constant), fx.pool, *fx.h0);
  CHECK(constant.discrimination == 1.0);
  CHECK(constant.compatible_count == fx.pool.size());
  auto full = discrimination(ConstraintFunction::make(ConstraintKind::Full), fx.pool, *fx.h0);
  auto pos = discrimination(ConstraintFunction::make(ConstraintKind::PosOnly), fx.pool, *fx.h0);
  auto np = discrimination(ConstraintFunction::make(ConstraintKind::NpOnly), fx.pool, *fx.h0);
  CHECK(full.discrimination >= pos.discrimination);
  CHECK(full.discrimination >= np.discrimination);
  CHECK(full.discrimination > 1.0);

  // Independent count of compatible decodings.
  std::size_t compatible = 0, tokens = 0;
  for (const auto& ex : fx.pool.examples()) {
    compatible += check_full(*ex.y1, fx.h0->decode(ex.sentence));
    tokens += ex.sentence.size();
  }
  CHECK(full.compatible_count == compatible);
  CHECK(full.pool_size == fx.pool.size());
  CHECK(full.discrimination == doctest::Approx(double(fx.pool.size()) / compatible));
  CHECK(full.mean_length == doctest::Approx(double(tokens) / fx.pool.size()));
  CHECK(full.labels_per_vertex == 9);
  CHECK(full.hamming_threshold == doctest::Approx(2 * full.mean_length * 8));
  CHECK(full.zero_one_threshold == doctest::Approx(2 * (std::pow(9.0, full.mean_length) - 1)));
  std::size_t bucket_pool = 0, bucket_compat = 0;
  for (auto& [len, b] : full.by_length) bucket_pool += b.pool, bucket_compat += b.compatible;
  CHECK(bucket_pool == fx.pool.size());
  CHECK(bucket_compat == compatible);
  CHECK(full.to_tsv().find("discrimination") != std::string::npos);
}

TEST_CASE("perfect h0 under a correct constraint") {
  auto fx = synthetic_fixture();
  std::map<std::string, std::vector<std::string>> table;
  SynthConfig cfg;
  cfg.seed = 5;
  Corpus all = generate(cfg, 400);
  for (const auto& ex : all.examples()) table[ex.sentence.id()] = ex.y2->labels();
  testing::LookupTagger oracle(LabelAlphabet::default_entity(), table);
  auto r = discrimination(ConstraintFunction::make(ConstraintKind::Full), fx.pool, oracle);
  CHECK(r.discrimination == 1.0);
}

TEST_CASE("discrimination needs y1") {
  auto fx = synthetic_fixture();
  Corpus bare = fx.pool.with_role(Role::Unlabeled, false, false);
  CHECK_THROWS_AS(discrimination(ConstraintFunction::make(ConstraintKind::Full), bare, *fx.h0), Error);
}

TEST_CASE("weak usefulness of a perfect predictor") {
  Seqs gold{{"A", "B", "A"}, {"B", "C"}, {"C", "A"}};
  std::vector<std::string> alphabet{"A", "B", "C"};
  auto r = check_weakly_useful(gold, gold, alphabet, 0.01, UsefulnessUnit::Token);
  CHECK(r.condition1);
  CHECK(r.condition2);
  CHECK(r.useful());
  CHECK(r.events == 7);
  auto seq = check_weakly_useful(gold, gold, alphabet, 0.01, UsefulnessUnit::Sequence);
  CHECK(seq.useful());
  CHECK(seq.labels.size() == 3);
  // As printed, the off-diagonal conditionals of a perfect predictor are 0.
  auto printed = check_weakly_useful(gold, gold, alphabet, 0.01, UsefulnessUnit::Token, PremiseMode::AsPrinted);
  CHECK_FALSE(printed.condition2);
}

TEST_CASE("weak usefulness of a constant predictor") {
  Seqs gold{{"A", "B", "A"}, {"B", "C"}};
  Seqs pred{{"A", "A", "A"}, {"A", "A"}};
  std::vector<std::string> alphabet{"A", "B", "C"};
  auto r = check_weakly_useful(gold, pred, alphabet, 0.05, UsefulnessUnit::Token);
  CHECK_FALSE(r.condition1);
  for (auto& l : r.labels) {
    if (l.label == "A") continue;
    CHECK_FALSE(l.passes1);
    CHECK(l.vacuous2);
  }
}

TEST_CASE("weak usefulness report matches recomputed frequencies") {
  SynthConfig cfg;
  cfg.seed = 9;
  Corpus all = generate(cfg, 600);
  SplitSizes sizes;
  sizes.d2 = 50;
  sizes.test = 500;
  Splits s = split(all, sizes, 1, UnlabMode::OneSided);
  HmmTagger h(train_hmm(s.d2, Task::Entity));
  const double eps = 0.01;
  auto r = check_weakly_useful(h, s.test, Task::Entity, eps, UsefulnessUnit::Token);

  std::map<std::string, double> pf, ph;
  std::map<std::pair<std::string, std::string>, double> joint;
  double n = 0;
  for (const auto& ex : s.test.examples()) {
    auto pred = h.decode(ex.sentence);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pf[(*ex.y2)[i]] += 1;
      ph[pred[i]] += 1;
      joint[{pred[i], (*ex.y2)[i]}] += 1;
      n += 1;
    }
  }
  CHECK(r.events == std::size_t(n));
  CHECK(r.labels.size() == 9);
  bool c1 = true, c2 = true;
  for (auto& l : r.labels) {
    CHECK(l.p_true == doctest::Approx(pf[l.label] / n));
    CHECK(l.p_predicted == doctest::Approx(ph[l.label] / n));
    CHECK(l.margin1 == doctest::Approx(ph[l.label] / n - eps));
    if (ph[l.label] > 0) {
      double m2 = joint[{l.label, l.label}] / ph[l.label] - pf[l.label] / n - eps;
      CHECK_FALSE(l.vacuous2);
      CHECK(l.margin2 == doctest::Approx(m2));
      CHECK(l.passes2 == (m2 >= 0));
    } else {
      CHECK(l.vacuous2);
    }
    c1 = c1 && l.passes1;
    c2 = c2 && l.passes2;
  }
  CHECK(r.condition1 == c1);
  CHECK(r.condition2 == c2);
  CHECK(r.to_tsv().find("condition1") != std::string::npos);
}

TEST_CASE("weak usefulness argument checks") {
  Seqs g{{"A"}};
  std::vector<std::string> alphabet{"A", "B"};
  CHECK_THROWS_AS(check_weakly_useful(g, g, alphabet, 0.0, UsefulnessUnit::Token), Error);
  CHECK_THROWS_AS(check_weakly_useful(g, g, alphabet, 1.0, UsefulnessUnit::Token), Error);
  Seqs two{{"A"}, {"B"}};
  CHECK_THROWS_AS(check_weakly_useful(g, two, alphabet, 0.1, UsefulnessUnit::Token), Error);
}

TEST_CASE("uncorrelation") {
  Rng rng(4);
  Seqs a, b;
  for (int s = 0; s < 2000; ++s) {
    std::vector<std::string> x, y;
    for (int i = 0; i < 5; ++i) {
      x.push_back(rng.bernoulli(0.3) ? "B-PER" : "O");
      y.push_back(rng.bernoulli(0.5) ? "NN|B-NP" : "VBD|B-VP");
    }
    a.push_back(x);
    b.push_back(y);
  }
  auto indep = check_uncorrelated(a, b, 0.05);
  CHECK(indep.max_deviation < 0.01);
  CHECK(indep.passes);
  CHECK_FALSE(indep.underpowered);
  CHECK(indep.tokens == 10000);
  auto same = check_uncorrelated(a, a, 0.05);
  // P(B,B) - P(B)^2 = p(1-p) ~ 0.21
  CHECK(same.max_deviation > 0.15);
  CHECK_FALSE(same.passes);
  Seqs one{{"O", "B-PER"}};
  auto single = check_uncorrelated(one, one, 0.05);
  CHECK(single.underpowered);
  CHECK(single.max_deviation == 0);
  CHECK(single.passes);
}

TEST_CASE("bound: A holds only the truth") {
  auto inst = from_points(3, {1}, {{5, 1, 1}, {3, 0, 0}, {2, 2, 2}, {1, 0, 2}});
  auto r = verify_theorem1_bound(inst);
  CHECK(r.left[1] == 0);
  CHECK(r.left_exact[1] == "0/1");
  CHECK(r.holds);
}

TEST_CASE("bound: constant constraint") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = random_bound_instance(rng);
    inst.compatible.clear();
    for (std::size_t k = 0; k < inst.labels; ++k) inst.compatible.push_back(k);
    auto r = verify_theorem1_bound(inst);
    CHECK(r.right == doctest::Approx(2.0 * (inst.labels - 1)));
    CHECK(r.holds);
  }
}

TEST_CASE("bound: as-printed premises admit a violation") {
  // Pr[h=1]=0.1, Pr[f=0|h=1]=0.9, Pr[f=0]=0.1, A={1}
  auto inst = from_points(2, {1}, {{1, 0, 0}, {9, 0, 1}, {1, 1, 1}, {89, 1, 0}});
  auto printed = verify_theorem1_bound(inst, PremiseMode::AsPrinted);
  CHECK(printed.premises_met);
  CHECK_FALSE(printed.holds);
  CHECK(printed.violating_label == 0);
  CHECK(printed.left_exact[0] == "9/10");
  CHECK(printed.right_exact == "1/5");
  auto diag = verify_theorem1_bound(inst, PremiseMode::Diagonal);
  CHECK_FALSE(diag.premises_met);
}

TEST_CASE("bound: diagonal premises admit a violation") {
  auto inst = from_points(3, {1}, {{195, 0, 1}, {5, 0, 0}, {95, 2, 0}, {1805, 1, 1}, {5000, 1, 2}, {2900, 2, 2}});
  auto r = verify_theorem1_bound(inst, PremiseMode::Diagonal);
  CHECK(r.premises_met);
  CHECK_FALSE(r.holds);
  CHECK(r.left_exact[0] == "39/40");
  CHECK(r.right_exact == "4/5");
}

TEST_CASE("bound: random instances and exact comparison") {
  Rng rng(2024);
  std::size_t met = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    auto inst = random_bound_instance(rng);
    auto r = verify_theorem1_bound(inst);
    // Recompute left and right in floating point.
    double total = 0;
    for (auto& p : inst.points) total += p.weight;
    std::vector<double> pf(inst.labels, 0), ph(inst.labels, 0);
    std::vector<std::vector<double>> j(inst.labels, std::vector<double>(inst.labels, 0));
    for (auto& p : inst.points) pf[p.f] += p.weight / total, ph[p.h] += p.weight / total, j[p.h][p.f] += p.weight / total;
    double right = 0;
    for (auto k : inst.compatible) right += ph[k];
    right *= 2.0 * (inst.labels - 1);
    CHECK(r.right == doctest::Approx(right));
    for (std::size_t l = 0; l < inst.labels; ++l) {
      if (pf[l] == 0) {
        CHECK(std::isnan(r.left[l]));
        continue;
      }
      double left = 0;
      for (auto k : inst.compatible)
        if (k != l) left += j[k][l];
      CHECK(r.left[l] == doctest::Approx(left / pf[l]));
    }
    if (r.premises_met) {
      ++met;
      CHECK(r.holds);
    }
  }
  CHECK(met > 20);
}

TEST_CASE("bound instance text format") {
  Rng rng(1);
  auto inst = random_bound_instance(rng);
  auto back = BoundInstance::parse(inst.to_text());
  CHECK(back.to_text() == inst.to_text());
  auto parsed = BoundInstance::parse("# toy\nlabels 2\nepsilon 1 50\ncompatible 1\nx 3 0 0\nx 1 1 1\n");
  CHECK(parsed.labels == 2);
  CHECK(parsed.eps_den == 50);
  CHECK(parsed.points.size() == 2);
  auto expect_data = [](const char* text) {
    try {
      BoundInstance::parse(text);
      return false;
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Data;
    }
  };
  CHECK(expect_data("labels 2\nx 1 0 5\n"));
  CHECK(expect_data("labels two\n"));
  CHECK(expect_data("labels 2\nbogus\n"));
  CHECK(expect_data("labels 2\nx -1 0 0\n"));
}
