#include "hints/training.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "hints/eval.hpp"
#include "hints/rng.hpp"

namespace hints {

Weighting Weighting::parse(std::string_view text) {
  if (text == "equal") return {WeightMode::Equal, 1.0};
  if (text == "confidence") return {WeightMode::Confidence, 1.0};
  if (text.starts_with("fraction:")) {
    std::string v(text.substr(9));
    std::size_t used = 0;
    double w = -1;
    try {
      w = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || !(w > 0)) throw_usage("weighting: bad fraction '" + v + "'");
    return {WeightMode::Fraction, w};
  }
  throw_usage("unknown weighting '" + std::string(text) + "' (expected equal, fraction:<w> or confidence)");
}

std::string Weighting::to_string() const {
  switch (mode) {
    case WeightMode::Equal: return "equal";
    case WeightMode::Confidence: return "confidence";
    case WeightMode::Fraction: {
      std::ostringstream os;
      os << "fraction:" << fraction;
      return os.str();
    }
  }
  return "?";
}

void TrainConfig::validate() const {
  if (iterations < 1) throw_usage("iterations must be at least 1");
  if (top_r && *top_r == 0) throw_usage("top_r must be positive");
  if (pool_growth && !top_r) throw_usage("pool_growth requires top_r");
  if (pool_growth && *pool_growth == 0) throw_usage("pool_growth must be positive");
  if (weighting.mode == WeightMode::Fraction && !(weighting.fraction > 0)) throw_usage("weight fraction must be positive");
}

std::optional<std::size_t> TrainConfig::effective_pool_growth() const {
  if (pool_growth) return pool_growth;
  if (top_r) return 10 * *top_r;
  return std::nullopt;
}

std::vector<double> apply_weighting(std::size_t labeled_count, std::span<const double> added_confidence,
                                    const Weighting& weighting) {
  std::vector<double> w(added_confidence.size());
  switch (weighting.mode) {
    case WeightMode::Equal:
      if (!w.empty())
        std::fill(w.begin(), w.end(), static_cast<double>(labeled_count) / static_cast<double>(w.size()));
      break;
    case WeightMode::Fraction:
      std::fill(w.begin(), w.end(), weighting.fraction);
      break;
    case WeightMode::Confidence:
      std::copy(added_confidence.begin(), added_confidence.end(), w.begin());
      break;
  }
  return w;
}

std::string Trace::to_tsv() const {
  std::ostringstream os;
  os.precision(6);
  os << "iteration\tpool\tadded\tevicted\taugmented\t" << (two_sided ? "dev_task1\tdev_task2" : "dev") << '\n';
  for (const auto& r : rows) {
    os << r.iteration << '\t' << r.pool << '\t' << r.added << '\t' << r.evicted << '\t' << r.augmented << '\t';
    if (r.dev) os << *r.dev; else os << '-';
    if (two_sided) {
      os << '\t';
      if (r.dev2) os << *r.dev2; else os << '-';
    }
    os << '\n';
  }
  return os.str();
}

std::size_t best_row(const Trace& trace, bool second_column) {
  if (trace.rows.empty()) throw_contract("best_row: empty trace");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto& v = second_column ? trace.rows[i].dev2 : trace.rows[i].dev;
    if (!v) continue;
    const auto& b = second_column ? trace.rows[best.value_or(i)].dev2 : trace.rows[best.value_or(i)].dev;
    if (!best || *v > *b) best = i;
  }
  return best.value_or(trace.rows.size() - 1);
}

namespace {

struct Added {
  std::size_t index;  // into the unlabeled corpus
  std::optional<Labeling> y1;  // gold for one-sided runs, self-labeled for two-sided
  Labeling y2;
  double confidence = 0;   // at first extraction
};

struct Candidate {
  std::size_t index;
  std::optional<Labeling> y1;
  Labeling y2;
  double confidence;
};

double dev_f1(const Tagger& model, const Corpus& dev, Task task) {
  std::vector<Labeling> pred;
  pred.reserve(dev.size());
  for (const auto& ex : dev.examples()) pred.push_back(model.decode(ex.sentence));
  return evaluate(dev, pred, task).f1;
}

// Items from the labeled set, then the self-labeled ones with weights.
std::vector<TrainingItem> items_with(const Corpus& d, Task task, const Corpus& unlab, const std::vector<Added>& added,
                                     const Weighting& weighting) {
  std::vector<TrainingItem> items = training_items(d, task);
  std::vector<double> conf;
  conf.reserve(added.size());
  for (const auto& a : added) conf.push_back(a.confidence);
  const auto w = apply_weighting(items.size(), conf, weighting);
  for (std::size_t i = 0; i < added.size(); ++i)
    items.push_back(TrainingItem{&unlab[added[i].index].sentence, task == Task::Syntax ? &*added[i].y1 : &added[i].y2,
                                 w[i], nullptr});
  return items;
}

bool compatible(const ConstraintFunction& chi, const std::optional<Labeling>& y1, const Labeling& y2) {
  if (!y1) {
    if (chi.trivial()) return true;
    throw_contract("constraint needs y1 but the unlabeled example has none");
  }
  return chi(*y1, y2);
}

// Working pool: everything in corpus order, or a seeded permutation revealed
// `growth` examples per iteration.
class WorkingPool {
 public:
  WorkingPool(std::size_t n, std::optional<std::size_t> growth, std::uint64_t seed) : growth_(growth) {
    order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
    if (growth_) {
      Rng rng(seed);
      rng.shuffle(order_);
    }
    visible_ = growth_ ? 0 : n;
  }
  void grow() {
    if (growth_) visible_ = std::min(order_.size(), visible_ + *growth_);
  }
  std::span<const std::size_t> visible() const { return {order_.data(), visible_}; }

 private:
  std::optional<std::size_t> growth_;
  std::vector<std::size_t> order_;
  std::size_t visible_ = 0;
};

// Takes the compatible candidates to add this iteration.
std::vector<Candidate> select(std::vector<Candidate> cands, const Corpus& unlab, const TrainConfig& cfg) {
  if (cfg.top_r && cfg.confidence_filter) {
    std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      return unlab[a.index].sentence.id() < unlab[b.index].sentence.id();
    });
  }
  if (cfg.top_r && cands.size() > *cfg.top_r) cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(*cfg.top_r), cands.end());
  return cands;
}

Corpus augmented_corpus(const Corpus& unlab, const std::vector<Added>& added, bool with_y1) {
  Corpus out(Role::Labeled2, unlab.syntax_alphabet(), unlab.entity_alphabet());
  for (const auto& a : added)
    out.add(Example{unlab[a.index].sentence, with_y1 ? a.y1 : std::nullopt, a.y2});
  return out;
}

void check_roles(const Corpus& c, Role role, const char* what) {
  for (const auto& ex : c.examples()) {
    try {
      check_role(ex, role);
    } catch (const Error& e) {
      throw_contract(std::string(what) + ": " + e.what());
    }
  }
}

}  // namespace

OneSidedResult one_sided_hints(const Learner& learner, const Corpus& d, const Corpus& unlab,
                               const ConstraintFunction& chi, const TrainConfig& cfg, const Corpus* dev) {
  cfg.validate();
  if (d.empty()) throw_usage("one-sided hints: empty labeled set");
  check_roles(d, Role::Labeled2, "labeled set");
  check_roles(unlab, Role::Unlabeled, "unlabeled set");
  const AlphabetPtr& alphabet = d.entity_alphabet();
  const bool use_dev = dev && !dev->empty();

  auto model = learner.train(training_items(d, Task::Entity), alphabet);
  OneSidedResult res{nullptr, 0, Trace{}, Corpus(Role::Labeled2, d.syntax_alphabet(), alphabet)};
  TraceRow row0;
  if (use_dev) row0.dev = dev_f1(*model, *dev, Task::Entity);
  res.trace.rows.push_back(row0);
  if (unlab.empty()) {
    res.model = std::move(model);
    return res;
  }

  std::unique_ptr<Tagger> best;
  double best_dev = use_dev ? *row0.dev : 0;
  std::vector<Added> added;
  std::vector<char> is_added(unlab.size(), 0);
  WorkingPool pool(unlab.size(), cfg.effective_pool_growth(), cfg.seed);

  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    pool.grow();
    TraceRow row;
    row.iteration = it;
    row.pool = pool.visible().size();

    // Re-label earlier additions; those that no longer fit are evicted.
    std::vector<Added> kept;
    for (auto& a : added) {
      Labeling y2 = model->decode(unlab[a.index].sentence);
      if (compatible(chi, unlab[a.index].y1, y2)) {
        a.y2 = std::move(y2);
        kept.push_back(std::move(a));
      } else {
        is_added[a.index] = 0;
        ++row.evicted;
      }
    }
    added = std::move(kept);

    std::vector<Candidate> cands;
    for (std::size_t idx : pool.visible()) {
      if (is_added[idx]) continue;
      const Example& ex = unlab[idx];
      Prediction p = cfg.confidence_filter ? model->predict(ex.sentence)
                                           : Prediction{model->decode(ex.sentence), 1.0};
      if (cfg.weighting.mode == WeightMode::Confidence && !cfg.confidence_filter)
        p.confidence = model->confidence(ex.sentence);
      if (compatible(chi, ex.y1, p.labels))
        cands.push_back(Candidate{idx, ex.y1, std::move(p.labels), p.confidence});
    }
    for (auto& c : select(std::move(cands), unlab, cfg)) {
      assert(compatible(chi, unlab[c.index].y1, c.y2));
      is_added[c.index] = 1;
      added.push_back(Added{c.index, std::move(c.y1), std::move(c.y2), c.confidence});
      ++row.added;
    }
    row.augmented = added.size();

    model = learner.train(items_with(d, Task::Entity, unlab, added, cfg.weighting), alphabet);
    if (use_dev) {
      row.dev = dev_f1(*model, *dev, Task::Entity);
      if (*row.dev > best_dev) {
        best_dev = *row.dev;
        best = Tagger::deserialize(model->serialize());
      }
    }
    res.trace.rows.push_back(row);
  }

  // Post-hoc soundness: every self-labeled example still satisfies chi.
  for (const auto& a : added)
    if (!compatible(chi, unlab[a.index].y1, a.y2)) throw_contract("augmented example violates the constraint");
  res.augmented = augmented_corpus(unlab, added, true);
  res.best_iteration = use_dev ? best_row(res.trace) : cfg.iterations;
  res.model = best ? std::move(best) : std::move(model);
  if (use_dev && res.best_iteration == 0) res.model = learner.train(training_items(d, Task::Entity), alphabet);
  return res;
}

OneSidedResult self_train(const Learner& learner, const Corpus& d, const Corpus& unlab, const TrainConfig& cfg,
                          const Corpus* dev) {
  static const ConstraintFunction constant = ConstraintFunction::make(ConstraintKind::Constant);
  return one_sided_hints(learner, d, unlab, constant, cfg, dev);
}

TwoSidedResult two_sided_hints(const Learner& learner1, const Learner& learner2, const Corpus& d1, const Corpus& d2,
                               const Corpus& unlab, const ConstraintFunction& chi, const TrainConfig& cfg,
                               const Corpus* dev) {
  cfg.validate();
  if (d1.empty()) throw_usage("two-sided hints: empty task-1 labeled set");
  if (d2.empty()) throw_usage("two-sided hints: empty task-2 labeled set");
  check_roles(d1, Role::Labeled1, "task-1 labeled set");
  check_roles(d2, Role::Labeled2, "task-2 labeled set");
  check_roles(unlab, Role::Unlabeled, "unlabeled set");
  const AlphabetPtr& a1 = d1.syntax_alphabet();
  const AlphabetPtr& a2 = d2.entity_alphabet();
  const bool use_dev = dev && !dev->empty();

  auto m1 = learner1.train(training_items(d1, Task::Syntax), a1);
  auto m2 = learner2.train(training_items(d2, Task::Entity), a2);
  TwoSidedResult res{nullptr, nullptr, 0, 0, Trace{true, {}}, Corpus(Role::Labeled2, a1, a2)};
  TraceRow row0;
  if (use_dev) {
    row0.dev = dev_f1(*m1, *dev, Task::Syntax);
    row0.dev2 = dev_f1(*m2, *dev, Task::Entity);
  }
  res.trace.rows.push_back(row0);
  if (unlab.empty()) {
    res.model1 = std::move(m1);
    res.model2 = std::move(m2);
    return res;
  }

  std::unique_ptr<Tagger> best1, best2;
  double best_dev1 = use_dev ? *row0.dev : 0, best_dev2 = use_dev ? *row0.dev2 : 0;
  std::vector<Added> added;
  std::vector<char> is_added(unlab.size(), 0);
  WorkingPool pool(unlab.size(), cfg.effective_pool_growth(), cfg.seed);
  const bool need_conf = cfg.confidence_filter || cfg.weighting.mode == WeightMode::Confidence;

  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    pool.grow();
    TraceRow row;
    row.iteration = it;
    row.pool = pool.visible().size();

    std::vector<Added> kept;
    for (auto& a : added) {
      const Sentence& x = unlab[a.index].sentence;
      Labeling y1 = m1->decode(x), y2 = m2->decode(x);
      if (chi(y1, y2)) {
        a.y1 = std::move(y1);
        a.y2 = std::move(y2);
        kept.push_back(std::move(a));
      } else {
        is_added[a.index] = 0;
        ++row.evicted;
      }
    }
    added = std::move(kept);

    std::vector<Candidate> cands;
    for (std::size_t idx : pool.visible()) {
      if (is_added[idx]) continue;
      const Sentence& x = unlab[idx].sentence;
      Prediction p1 = need_conf ? m1->predict(x) : Prediction{m1->decode(x), 1.0};
      Prediction p2 = need_conf ? m2->predict(x) : Prediction{m2->decode(x), 1.0};
      if (chi(p1.labels, p2.labels))
        cands.push_back(Candidate{idx, std::move(p1.labels), std::move(p2.labels), (p1.confidence + p2.confidence) / 2});
    }
    for (auto& c : select(std::move(cands), unlab, cfg)) {
      is_added[c.index] = 1;
      added.push_back(Added{c.index, std::move(c.y1), std::move(c.y2), c.confidence});
      ++row.added;
    }
    row.augmented = added.size();

    m1 = learner1.train(items_with(d1, Task::Syntax, unlab, added, cfg.weighting), a1);
    m2 = learner2.train(items_with(d2, Task::Entity, unlab, added, cfg.weighting), a2);
    if (use_dev) {
      row.dev = dev_f1(*m1, *dev, Task::Syntax);
      row.dev2 = dev_f1(*m2, *dev, Task::Entity);
      if (*row.dev > best_dev1) {
        best_dev1 = *row.dev;
        best1 = Tagger::deserialize(m1->serialize());
      }
      if (*row.dev2 > best_dev2) {
        best_dev2 = *row.dev2;
        best2 = Tagger::deserialize(m2->serialize());
      }
    }
    res.trace.rows.push_back(row);
  }

  for (const auto& a : added)
    if (!chi(*a.y1, a.y2)) throw_contract("augmented example violates the constraint");
  res.augmented = augmented_corpus(unlab, added, true);
  res.best_iteration1 = use_dev ? best_row(res.trace, false) : cfg.iterations;
  res.best_iteration2 = use_dev ? best_row(res.trace, true) : cfg.iterations;
  if (use_dev && res.best_iteration1 == 0) best1 = learner1.train(training_items(d1, Task::Syntax), a1);
  if (use_dev && res.best_iteration2 == 0) best2 = learner2.train(training_items(d2, Task::Entity), a2);
  res.model1 = best1 ? std::move(best1) : std::move(m1);
  res.model2 = best2 ? std::move(best2) : std::move(m2);
  return res;
}

}  // namespace hints
