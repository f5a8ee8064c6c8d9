// One line per acceptance criterion; exit status 1 if any fails.
#include <boost/rational.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "hints/analysis.hpp"
#include "hints/constraints.hpp"
#include "hints/eval.hpp"
#include "hints/synth.hpp"
#include "hints/training.hpp"
#include "support.hpp"

using namespace hints;
using namespace testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, double limit_s, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    o.pass = false;
    o.detail += " [over time limit " + std::to_string(limit_s) + " s]";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d: %s  %s  (%.2f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

std::vector<std::size_t> toy_path(const std::vector<std::string>& labels) {
  std::vector<std::size_t> p;
  for (auto& l : labels) p.push_back(std::stoul(l.substr(1)));
  return p;
}

// Decoder vs enumeration: returns false on a mismatch.
bool matches_enumeration(double decoded, const std::vector<std::size_t>& path, std::size_t n, std::size_t k,
                         const std::function<double(const std::vector<std::size_t>&)>& score) {
  double best = -INFINITY;
  for (auto& p : all_paths(n, k)) best = std::max(best, score(p));
  return std::abs(decoded - best) <= 1e-9 && std::abs(score(path) - best) <= 1e-9;
}

// Per-token rule table written out longhand.
bool oracle_allows(const std::string& pos, const std::string& chunk, const std::string& ent) {
  const bool nnp = pos == "NNP" || pos == "NNPS";
  const bool b = ent.rfind("B-", 0) == 0, i = ent.rfind("I-", 0) == 0, o = ent == "O";
  if (nnp && chunk == "B-NP") return b;
  if (nnp && chunk == "I-NP") return b || i;
  if (nnp) return true;
  if (chunk == "B-NP") return b || o;
  if (chunk == "I-NP") return b || i || o;
  return o;
}

bool well_formed(const std::vector<std::string>& y) {
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i].rfind("I-", 0) == 0 && (i == 0 || y[i - 1] == "O" || y[i - 1].substr(2) != y[i].substr(2))) return false;
  return true;
}

Splits synth_splits(std::uint64_t seed, SplitSizes sz, UnlabMode mode) {
  SynthConfig cfg;
  cfg.seed = seed;
  Corpus all = generate(cfg, sz.d1 + sz.d2 + sz.unlab + sz.test + sz.dev);
  return split(all, sz, seed, mode);
}

double test_f(const Tagger& t, const Corpus& test, Task task) {
  std::vector<Labeling> pred;
  for (const auto& ex : test.examples()) pred.push_back(t.decode(ex.sentence));
  return evaluate(test, pred, task).f1;
}

// C(n, k) / 2^n summed over k <= m.
double binom_cdf_half(std::size_t n, std::size_t m) {
  long double sum = 0, c = 1;
  for (std::size_t k = 0; k <= m; ++k) {
    sum += c;
    c = c * (n - k) / (k + 1);
  }
  return static_cast<double>(sum / std::pow(2.0L, static_cast<long double>(n)));
}

}  // namespace

int main() {
  const HmmLearner hmm;

  criterion(1, 1, [] {
    const Labeling y1 = intro_y1();
    const int want[4] = {0, 0, 0, 1};
    const std::vector<std::string>* cands[4] = {&kNer1, &kNer2, &kNer3, &kNer4};
    auto chi = ConstraintFunction::make(ConstraintKind::Full);
    std::string got;
    bool ok = true;
    for (int i = 0; i < 4; ++i) {
      int v = chi(y1, ner(*cands[i])) ? 1 : 0;
      ok = ok && v == want[i] && check_full(y1, ner(*cands[i])) == (v == 1);
      got += "NER" + std::to_string(i + 1) + "=" + std::to_string(v) + " ";
    }
    return Outcome{ok, got + "under the full constraint"};
  });

  criterion(2, 30, [] {
    Rng rng(31337);
    const std::vector<std::string> words{"a", "b", "c", "Dd", "e1", "f-g"};
    std::size_t hmm_ok = 0, pc_ok = 0, total = 300;
    for (std::size_t t = 0; t < total; ++t) {
      const std::size_t k = 2 + rng.below(2), n = 1 + rng.below(4);
      Sentence s = random_sentence(rng, n, words);
      HmmModel m = random_hmm(rng, k, words);
      auto d = viterbi_decode(m, s);
      if (matches_enumeration(d.score, toy_path(d.labels), n, k, [&](auto& p) { return hmm_joint(m, s, p); }))
        ++hmm_ok;
      PerceptronModel pm = random_perceptron(rng, k, s, t % 3 == 0 ? 0.7 : 0.0);
      auto pd = perceptron_decode(pm, s);
      if (matches_enumeration(pd.score, toy_path(pd.labels), n, k, [&](auto& p) { return perceptron_score(pm, s, p); }))
        ++pc_ok;
    }
    return Outcome{hmm_ok == total && pc_ok == total, "hmm " + std::to_string(hmm_ok) + "/" + std::to_string(total) +
                                                          ", perceptron " + std::to_string(pc_ok) + "/" +
                                                          std::to_string(total) + " match enumeration within 1e-9"};
  });

  criterion(3, 30, [] {
    Rng rng(4242);
    const std::vector<std::string> pos{"NNP", "NNPS", "NN", "VBD", "DT", "JJ", ","};
    const std::vector<std::string> chunk{"B-NP", "I-NP", "B-VP", "I-VP", "B-PP", "O"};
    auto ent = LabelAlphabet::default_entity();
    const auto& elabels = ent->labels();
    auto chi = ConstraintFunction::make(ConstraintKind::Full);
    std::size_t instances = 250, candidates = 0, disagreements = 0, count_mismatch = 0;
    for (std::size_t t = 0; t < instances; ++t) {
      const std::size_t n = 1 + rng.below(4);
      std::vector<std::string> p(n), c(n), y1;
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = pos[rng.below(pos.size())];
        c[i] = chunk[rng.below(chunk.size())];
        if (c[i].rfind("I-", 0) == 0 && (i == 0 || c[i - 1].substr(1) != c[i].substr(1))) c[i][0] = 'B';
        y1.push_back(make_composite(p[i], c[i]));
      }
      Labeling ly1(LabelAlphabet::default_syntax(), y1);
      std::size_t members = 0;
      for (auto& path : all_paths(n, elabels.size())) {
        std::vector<std::string> y2;
        for (auto j : path) y2.push_back(elabels[j]);
        if (!well_formed(y2)) continue;
        ++candidates;
        bool oracle = true;
        for (std::size_t i = 0; i < n; ++i) oracle = oracle && oracle_allows(p[i], c[i], y2[i]);
        members += oracle;
        if (check_full(ly1, Labeling(ent, y2)) != oracle) ++disagreements;
      }
      if (count_compatible(ly1, ent, chi) != members) ++count_mismatch;
    }
    return Outcome{disagreements == 0 && count_mismatch == 0,
                   std::to_string(instances) + " y1, " + std::to_string(candidates) + " candidates, " +
                       std::to_string(disagreements) + " disagreements, " + std::to_string(count_mismatch) +
                       " count mismatches"};
  });

  criterion(4, 60, [] {
    using Q = boost::rational<std::int64_t>;
    Rng rng(2024);
    std::size_t met = 0, drawn = 0, violations = 0, mismatches = 0, printed_met = 0, printed_viol = 0;
    while (met < 100 && drawn < 100000) {
      ++drawn;
      auto inst = random_bound_instance(rng);
      auto printed = verify_theorem1_bound(inst, PremiseMode::AsPrinted);
      if (printed.premises_met) {
        ++printed_met;
        printed_viol += !printed.holds;
      }
      auto r = verify_theorem1_bound(inst, PremiseMode::Diagonal);
      if (!r.premises_met) continue;
      ++met;
      // Exact recomputation.
      std::int64_t total = 0;
      for (auto& pt : inst.points) total += pt.weight;
      std::vector<std::int64_t> wf(inst.labels, 0), wh(inst.labels, 0);
      for (auto& pt : inst.points) wf[pt.f] += pt.weight, wh[pt.h] += pt.weight;
      Q right(0);
      for (auto k : inst.compatible) right += Q(wh[k], total);
      right *= Q(2 * static_cast<std::int64_t>(inst.labels - 1));
      bool holds = true;
      for (std::size_t l = 0; l < inst.labels; ++l) {
        if (wf[l] == 0) continue;
        std::int64_t num = 0;
        for (auto& pt : inst.points)
          if (pt.f == l && pt.h != l &&
              std::find(inst.compatible.begin(), inst.compatible.end(), pt.h) != inst.compatible.end())
            num += pt.weight;
        if (Q(num, wf[l]) > right) holds = false;
      }
      if (holds != r.holds) ++mismatches;
      violations += !holds;
    }
    return Outcome{met == 100 && violations == 0 && mismatches == 0,
                   std::to_string(met) + " premise-satisfying instances (of " + std::to_string(drawn) +
                       " drawn), " + std::to_string(violations) + " violations, " + std::to_string(mismatches) +
                       " recompute mismatches; as-printed premises: " + std::to_string(printed_viol) + "/" +
                       std::to_string(printed_met) + " violate (informational)"};
  });

  criterion(5, 60, [&] {
    auto s = synth_splits(7, {0, 100, 2000, 0, 0}, UnlabMode::OneSided);
    auto h0 = hmm.train(training_items(s.d2, Task::Entity), s.d2.entity_alphabet());
    auto d = [&](ConstraintKind k) { return discrimination(ConstraintFunction::make(k), s.unlab, *h0).discrimination; };
    double full = d(ConstraintKind::Full), pos = d(ConstraintKind::PosOnly), np = d(ConstraintKind::NpOnly),
           constant = d(ConstraintKind::Constant);
    return Outcome{constant == 1.0 && full >= pos && full >= np,
                   "constant " + fmt("%.6g", constant) + ", full " + fmt("%.4g", full) + ", pos-only " +
                       fmt("%.4g", pos) + ", np-only " + fmt("%.4g", np)};
  });

  criterion(6, 600, [&] {
    std::vector<double> base, hints_f, self_f;
    std::size_t wins_self = 0, wins_base = 0;
    auto chi = ConstraintFunction::make(ConstraintKind::Full);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto s = synth_splits(seed, {0, 100, 2000, 1000, 0}, UnlabMode::OneSided);
      TrainConfig hc;
      hc.iterations = 3;
      hc.seed = seed;
      TrainConfig sc = hc;
      sc.top_r = 200;
      sc.confidence_filter = true;
      auto b = hmm.train(training_items(s.d2, Task::Entity), s.d2.entity_alphabet());
      base.push_back(test_f(*b, s.test, Task::Entity));
      hints_f.push_back(test_f(*one_sided_hints(hmm, s.d2, s.unlab, chi, hc).model, s.test, Task::Entity));
      self_f.push_back(test_f(*self_train(hmm, s.d2, s.unlab, sc).model, s.test, Task::Entity));
      wins_self += hints_f.back() > self_f.back();
      wins_base += hints_f.back() > base.back();
    }
    const double gain = 100 * (mean(hints_f) - mean(base));
    return Outcome{gain >= 2 && mean(hints_f) > mean(self_f) && wins_self >= 8,
                   "mean F baseline " + fmt("%.2f", 100 * mean(base)) + ", hints " + fmt("%.2f", 100 * mean(hints_f)) +
                       ", self-train " + fmt("%.2f", 100 * mean(self_f)) + "; gain " + fmt("%+.2f", gain) +
                       "; hints > self-train in " + std::to_string(wins_self) + "/10, > baseline in " +
                       std::to_string(wins_base) + "/10"};
  });

  criterion(7, 1200, [&] {
    std::vector<double> b1, b2, h1, h2;
    auto chi = ConstraintFunction::make(ConstraintKind::Full);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto s = synth_splits(seed, {1000, 100, 5000, 1000, 500}, UnlabMode::TwoSided);
      TrainConfig cfg;
      cfg.iterations = 10;
      cfg.top_r = 50;
      cfg.confidence_filter = true;
      cfg.seed = seed;
      auto m1 = hmm.train(training_items(s.d1, Task::Syntax), s.d1.syntax_alphabet());
      auto m2 = hmm.train(training_items(s.d2, Task::Entity), s.d2.entity_alphabet());
      b1.push_back(test_f(*m1, s.test, Task::Syntax));
      b2.push_back(test_f(*m2, s.test, Task::Entity));
      auto r = two_sided_hints(hmm, hmm, s.d1, s.d2, s.unlab, chi, cfg, &s.dev);
      h1.push_back(test_f(*r.model1, s.test, Task::Syntax));
      h2.push_back(test_f(*r.model2, s.test, Task::Entity));
    }
    const double gain2 = 100 * (mean(h2) - mean(b2)), delta1 = 100 * (mean(h1) - mean(b1));
    return Outcome{gain2 >= 1 && delta1 >= -1,
                   "task-2 F " + fmt("%.2f", 100 * mean(b2)) + " -> " + fmt("%.2f", 100 * mean(h2)) + " (" +
                       fmt("%+.2f", gain2) + "); task-1 chunk F " + fmt("%.2f", 100 * mean(b1)) + " -> " +
                       fmt("%.2f", 100 * mean(h1)) + " (" + fmt("%+.2f", delta1) + ")"};
  });

  criterion(8, 120, [&] {
    Rng rng(8);
    auto constant = ConstraintFunction::make(ConstraintKind::Constant);
    std::size_t same = 0;
    for (int trial = 0; trial < 5; ++trial) {
      const std::uint64_t seed = 1 + rng.below(1000);
      auto s = synth_splits(seed, {0, 20 + rng.below(80), 100 + rng.below(300), 0, rng.bernoulli(0.5) ? 80u : 0u},
                            UnlabMode::OneSided);
      TrainConfig cfg;
      cfg.iterations = 1 + rng.below(4);
      if (rng.bernoulli(0.6)) {
        cfg.top_r = 5 + rng.below(30);
        if (rng.bernoulli(0.5)) cfg.pool_growth = *cfg.top_r + rng.below(100);
      }
      cfg.confidence_filter = rng.bernoulli(0.5);
      const char* w[] = {"equal", "fraction:0.5", "confidence", "fraction:1"};
      cfg.weighting = Weighting::parse(w[rng.below(4)]);
      cfg.seed = rng.next();
      const Corpus* dev = s.dev.empty() ? nullptr : &s.dev;
      auto a = one_sided_hints(hmm, s.d2, s.unlab, constant, cfg, dev);
      auto b = self_train(hmm, s.d2, s.unlab, cfg, dev);
      same += a.trace == b.trace && a.trace.to_tsv() == b.trace.to_tsv() && a.model->serialize() == b.model->serialize();
    }
    return Outcome{same == 5, std::to_string(same) + "/5 configurations with identical traces and models"};
  });

  criterion(9, 5, [] {
    std::size_t checked = 0, bad = 0;
    for (std::size_t n = 0; n <= 24; ++n)
      for (std::size_t b = 0; b <= n; ++b) {
        const std::size_t c = n - b;
        const double want = n == 0 ? 1.0 : std::min(1.0, 2 * binom_cdf_half(n, std::min(b, c)));
        ++checked;
        if (std::abs(binomial_two_sided_p(b, c) - want) > 1e-12 ||
            std::abs(mcnemar_from_counts(b, c).p_value - want) > 1e-12 || !mcnemar_from_counts(b, c).exact)
          ++bad;
      }
    const double p15 = mcnemar_from_counts(15, 0).p_value, p32 = mcnemar_from_counts(3, 2).p_value;
    const bool ex = std::abs(p15 - 2 * std::pow(0.5, 15)) <= 1e-9 && std::abs(p32 - 1.0) <= 1e-9 &&
                    mcnemar_from_counts(15, 0).verdict == Verdict::WinA &&
                    mcnemar_from_counts(3, 2).verdict == Verdict::Tie;
    return Outcome{bad == 0 && ex, std::to_string(checked - bad) + "/" + std::to_string(checked) +
                                       " (b, c) pairs match; p(15,0) = " + fmt("%.9g", p15) +
                                       ", p(3,2) = " + fmt("%.9g", p32)};
  });

  criterion(10, 1, [] {
    const double v = hamming_threshold(26, 9);
    return Outcome{v == 416.0, "hamming_threshold(26, 9) = " + fmt("%g", v)};
  });

  std::printf("%s\n", failures == 0 ? "all criteria pass" : (std::to_string(failures) + " criteria fail").c_str());
  return failures == 0 ? 0 : 1;
}
