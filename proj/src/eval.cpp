#include "hints/eval.hpp"

#include <algorithm>
#include <cmath>

namespace hints {

namespace {

void check_aligned(std::size_t gold, std::size_t pred) {
  if (gold != pred)
    throw_contract("evaluation: " + std::to_string(gold) + " gold vs " + std::to_string(pred) + " predicted sentences");
}

std::vector<std::string> task_bio(const Labeling& y, Task task) {
  return task == Task::Syntax ? chunk_component(y) : y.labels();
}

const Labeling& gold_of(const Example& ex, Task task) {
  const auto& y = ex.labels(task);
  if (!y) throw_contract("evaluation: example '" + ex.sentence.id() + "' has no gold labeling");
  return *y;
}

}  // namespace

MetricReport span_f1(std::span<const std::vector<std::string>> gold, std::span<const std::vector<std::string>> pred) {
  check_aligned(gold.size(), pred.size());
  MetricReport r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size()) throw_contract("evaluation: sentence length mismatch");
    auto g = extract_spans(gold[s]);
    auto p = extract_spans(pred[s]);
    r.gold_spans += g.size();
    r.predicted_spans += p.size();
    // Spans come out ordered and non-overlapping, so a merge finds matches.
    std::size_t i = 0, j = 0;
    while (i < g.size() && j < p.size()) {
      if (g[i] == p[j]) {
        ++r.matched_spans;
        ++i;
        ++j;
      } else if (std::tie(g[i].start, g[i].end) < std::tie(p[j].start, p[j].end)) {
        ++i;
      } else {
        ++j;
      }
    }
  }
  r.precision = r.predicted_spans ? static_cast<double>(r.matched_spans) / r.predicted_spans : 0.0;
  r.recall = r.gold_spans ? static_cast<double>(r.matched_spans) / r.gold_spans : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

double token_accuracy(std::span<const std::vector<std::string>> gold, std::span<const std::vector<std::string>> pred) {
  check_aligned(gold.size(), pred.size());
  std::size_t total = 0, right = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size()) throw_contract("evaluation: sentence length mismatch");
    total += gold[s].size();
    for (std::size_t i = 0; i < gold[s].size(); ++i) right += gold[s][i] == pred[s][i];
  }
  return total ? static_cast<double>(right) / total : 0.0;
}

double token_accuracy(const Corpus& gold, std::span<const Labeling> pred, Task task, bool pos_only) {
  check_aligned(gold.size(), pred.size());
  std::vector<std::vector<std::string>> g, p;
  g.reserve(gold.size());
  p.reserve(pred.size());
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const Labeling& y = gold_of(gold[s], task);
    if (task == Task::Syntax && pos_only) {
      g.push_back(pos_component(y));
      p.push_back(pos_component(pred[s]));
    } else {
      g.push_back(y.labels());
      p.push_back(pred[s].labels());
    }
  }
  return token_accuracy(g, p);
}

MetricReport evaluate(const Corpus& gold, std::span<const Labeling> pred, Task task) {
  check_aligned(gold.size(), pred.size());
  std::vector<std::vector<std::string>> g, p;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    g.push_back(task_bio(gold_of(gold[s], task), task));
    p.push_back(task_bio(pred[s], task));
  }
  MetricReport r = span_f1(g, p);
  r.accuracy = token_accuracy(gold, pred, task);
  return r;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::WinA: return "win";
    case Verdict::WinB: return "lose";
    case Verdict::Tie: return "tie";
  }
  return "?";
}

double binomial_two_sided_p(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(b, c);
  // sum_{i<=k} C(n, i) / 2^n, accumulated in log space for large n
  double tail = 0;
  double log_choose = 0;  // log C(n, 0)
  for (std::size_t i = 0; i <= k; ++i) {
    if (i > 0) log_choose += std::log(static_cast<double>(n - i + 1)) - std::log(static_cast<double>(i));
    tail += std::exp(log_choose - static_cast<double>(n) * std::log(2.0));
  }
  return std::min(1.0, 2.0 * tail);
}

McNemarResult mcnemar_from_counts(std::size_t b, std::size_t c, double alpha) {
  McNemarResult r;
  r.a_only = b;
  r.b_only = c;
  if (b + c < 25) {
    r.exact = true;
    r.p_value = binomial_two_sided_p(b, c);
  } else {
    r.exact = false;
    double diff = std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
    diff = std::max(diff, 0.0);
    r.statistic = diff * diff / static_cast<double>(b + c);
    r.p_value = std::erfc(std::sqrt(r.statistic / 2.0));  // chi-square, 1 dof
  }
  if (r.p_value < alpha && b != c) r.verdict = b > c ? Verdict::WinA : Verdict::WinB;
  return r;
}

McNemarResult mcnemar(std::span<const Labeling> a, std::span<const Labeling> b, const Corpus& gold, Task task,
                      McNemarUnit unit, double alpha) {
  if (gold.empty()) throw_usage("mcnemar: empty corpus");
  check_aligned(gold.size(), a.size());
  check_aligned(gold.size(), b.size());
  std::size_t a_only = 0, b_only = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const Labeling& g = gold_of(gold[s], task);
    if (a[s].size() != g.size() || b[s].size() != g.size()) throw_contract("mcnemar: sentence length mismatch");
    if (unit == McNemarUnit::Sentence) {
      bool ra = a[s] == g, rb = b[s] == g;
      a_only += ra && !rb;
      b_only += rb && !ra;
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) {
        bool ra = a[s][i] == g[i], rb = b[s][i] == g[i];
        a_only += ra && !rb;
        b_only += rb && !ra;
      }
    }
  }
  return mcnemar_from_counts(a_only, b_only, alpha);
}

}  // namespace hints
