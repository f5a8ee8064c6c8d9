#include "hints/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

namespace hints {

using Rational = boost::multiprecision::cpp_rational;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string rational_text(const Rational& r) {
  std::ostringstream os;
  os << numerator(r) << '/' << denominator(r);
  return os.str();
}

}  // namespace

// ---- discrimination ------------------------------------------------------

double hamming_threshold(double mean_len, std::size_t labels_per_vertex) {
  if (labels_per_vertex < 2) throw_usage("hamming_threshold: need at least 2 labels per vertex");
  if (!(mean_len >= 1)) throw_usage("hamming_threshold: mean length must be at least 1");
  return 2.0 * mean_len * static_cast<double>(labels_per_vertex - 1);
}

DiscriminationReport discrimination(const ConstraintFunction& chi, const Corpus& pool, const Tagger& h0,
                                    std::span<const std::vector<std::string>> extras) {
  if (pool.empty()) throw_usage("discrimination: empty pool");
  if (!extras.empty() && extras.size() != pool.size()) throw_contract("extra features do not align with the pool");
  DiscriminationReport r;
  r.constraint_name = chi.name();
  r.pool_size = pool.size();
  std::size_t tokens = 0;
  for (std::size_t s = 0; s < pool.size(); ++s) {
    const Example& ex = pool[s];
    if (!ex.y1) throw_contract("discrimination: pool example '" + ex.sentence.id() + "' has no y1");
    Labeling y2 = h0.decode(ex.sentence, extras.empty() ? nullptr : &extras[s]);
    bool ok = chi(*ex.y1, y2);
    r.compatible_count += ok;
    auto& b = r.by_length[ex.sentence.size()];
    ++b.pool;
    b.compatible += ok;
    tokens += ex.sentence.size();
  }
  r.infinite = r.compatible_count == 0;
  r.discrimination = r.infinite ? std::numeric_limits<double>::infinity()
                                : static_cast<double>(r.pool_size) / static_cast<double>(r.compatible_count);
  r.mean_length = static_cast<double>(tokens) / static_cast<double>(pool.size());
  r.labels_per_vertex = h0.alphabet()->size();
  const double y = static_cast<double>(r.labels_per_vertex);
  const double structures = std::pow(y, r.mean_length);
  r.zero_one_threshold = 2.0 * (structures - 1.0);
  r.hamming_threshold = hamming_threshold(std::max(1.0, r.mean_length), r.labels_per_vertex);
  r.zero_one_quadratic = 4.0 * (structures - 1.0) * (structures - 1.0);
  r.hamming_quadratic = 4.0 * r.mean_length * r.mean_length * (y - 1.0) * (y - 1.0);
  return r;
}

std::string DiscriminationReport::to_tsv() const {
  std::ostringstream os;
  os << "constraint\t" << constraint_name << '\n'
     << "pool_size\t" << pool_size << '\n'
     << "compatible_count\t" << compatible_count << '\n'
     << "discrimination\t" << (infinite ? std::string("inf") : fmt(discrimination)) << '\n'
     << "mean_length\t" << fmt(mean_length) << '\n'
     << "labels_per_vertex\t" << labels_per_vertex << '\n'
     << "threshold_zero_one\t" << fmt(zero_one_threshold) << '\n'
     << "threshold_hamming\t" << fmt(hamming_threshold) << '\n'
     << "threshold_zero_one_quadratic\t" << fmt(zero_one_quadratic) << '\n'
     << "threshold_hamming_quadratic\t" << fmt(hamming_quadratic) << '\n'
     << "length\tpool\tcompatible\tdiscrimination\n";
  for (const auto& [len, b] : by_length) {
    os << len << '\t' << b.pool << '\t' << b.compatible << '\t'
       << (b.compatible ? fmt(static_cast<double>(b.pool) / b.compatible) : std::string("inf")) << '\n';
  }
  return os.str();
}

// ---- weak usefulness -----------------------------------------------------

UsefulnessReport check_weakly_useful(std::span<const std::vector<std::string>> gold,
                                     std::span<const std::vector<std::string>> predicted,
                                     std::span<const std::string> alphabet, double epsilon, UsefulnessUnit unit,
                                     PremiseMode mode) {
  if (!(epsilon > 0 && epsilon < 1)) throw_usage("weak usefulness: epsilon must lie in (0, 1)");
  if (gold.size() != predicted.size()) throw_contract("weak usefulness: gold and predictions do not align");
  if (gold.empty()) throw_usage("weak usefulness: empty reference corpus");

  // Events as (f, h) pairs of label keys.
  std::vector<std::pair<std::string, std::string>> events;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size()) throw_contract("weak usefulness: sentence length mismatch");
    if (unit == UsefulnessUnit::Token) {
      for (std::size_t i = 0; i < gold[s].size(); ++i) events.emplace_back(gold[s][i], predicted[s][i]);
    } else {
      auto join = [](const std::vector<std::string>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + v[i];
        return out;
      };
      events.emplace_back(join(gold[s]), join(predicted[s]));
    }
  }
  if (events.empty()) throw_usage("weak usefulness: no events");

  std::vector<std::string> space;
  if (unit == UsefulnessUnit::Token) {
    space.assign(alphabet.begin(), alphabet.end());
    for (const auto& [f, h] : events) {
      if (std::find(space.begin(), space.end(), f) == space.end()) space.push_back(f);
      if (std::find(space.begin(), space.end(), h) == space.end()) space.push_back(h);
    }
  } else {
    std::set<std::string> seen;
    for (const auto& [f, h] : events) {
      seen.insert(f);
      seen.insert(h);
    }
    space.assign(seen.begin(), seen.end());
  }
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < space.size(); ++i) idx.emplace(space[i], i);

  const std::size_t k = space.size();
  std::vector<double> p(k, 0), c(k, 0);
  std::vector<std::vector<double>> joint(k, std::vector<double>(k, 0));  // [h][f]
  const double unit_mass = 1.0 / static_cast<double>(events.size());
  for (const auto& [f, h] : events) {
    std::size_t fi = idx.at(f), hi = idx.at(h);
    p[fi] += unit_mass;
    c[hi] += unit_mass;
    joint[hi][fi] += unit_mass;
  }

  UsefulnessReport r;
  r.unit = unit;
  r.mode = mode;
  r.epsilon = epsilon;
  r.events = events.size();
  r.condition1 = r.condition2 = true;
  for (std::size_t y = 0; y < k; ++y) {
    LabelUsefulness lu;
    lu.label = space[y];
    lu.p_true = p[y];
    lu.p_predicted = c[y];
    lu.margin1 = c[y] - epsilon;
    lu.passes1 = lu.margin1 >= 0;
    lu.margin2 = std::numeric_limits<double>::infinity();
    for (std::size_t yp = 0; yp < k; ++yp) {
      if ((mode == PremiseMode::Diagonal) != (yp == y)) continue;
      if (c[yp] <= 0) continue;
      lu.vacuous2 = false;
      lu.margin2 = std::min(lu.margin2, joint[yp][y] / c[yp] - p[y] - epsilon);
    }
    lu.passes2 = lu.vacuous2 || lu.margin2 >= 0;
    if (lu.vacuous2) lu.margin2 = 0;
    r.condition1 = r.condition1 && lu.passes1;
    r.condition2 = r.condition2 && lu.passes2;
    r.labels.push_back(std::move(lu));
  }
  return r;
}

UsefulnessReport check_weakly_useful(const Tagger& h, const Corpus& reference, Task task, double epsilon,
                                     UsefulnessUnit unit, PremiseMode mode) {
  if (reference.empty()) throw_usage("weak usefulness: empty reference corpus");
  std::vector<std::vector<std::string>> gold, pred;
  for (const auto& ex : reference.examples()) {
    const auto& y = ex.labels(task);
    if (!y) throw_contract("weak usefulness: reference example '" + ex.sentence.id() + "' is unlabeled");
    gold.push_back(y->labels());
    pred.push_back(h.decode(ex.sentence).labels());
  }
  return check_weakly_useful(gold, pred, h.alphabet()->labels(), epsilon, unit, mode);
}

std::string UsefulnessReport::to_tsv() const {
  std::ostringstream os;
  os << "unit\t" << (unit == UsefulnessUnit::Token ? "token" : "sequence") << '\n'
     << "premise\t" << (mode == PremiseMode::Diagonal ? "diagonal" : "as-printed") << '\n'
     << "epsilon\t" << fmt(epsilon) << '\n'
     << "events\t" << events << '\n'
     << "condition1\t" << (condition1 ? "pass" : "fail") << '\n'
     << "condition2\t" << (condition2 ? "pass" : "fail") << '\n'
     << "label\tp_true\tp_predicted\tmargin1\tmargin2\tcondition2\n";
  for (const auto& l : labels)
    os << l.label << '\t' << fmt(l.p_true) << '\t' << fmt(l.p_predicted) << '\t' << fmt(l.margin1) << '\t'
       << fmt(l.margin2) << '\t' << (l.vacuous2 ? "vacuous" : l.passes2 ? "pass" : "fail") << '\n';
  return os.str();
}

// ---- uncorrelation -------------------------------------------------------

UncorrelationReport check_uncorrelated(std::span<const std::vector<std::string>> out1,
                                       std::span<const std::vector<std::string>> out2, double tolerance) {
  if (out1.size() != out2.size()) throw_contract("uncorrelation: outputs do not align");
  UncorrelationReport r;
  r.tolerance = tolerance;
  r.underpowered = out1.size() < 2;
  if (r.underpowered) {
    for (const auto& s : out1) r.tokens += s.size();
    r.passes = true;
    return r;
  }
  std::map<std::string, double> pa, pb;
  std::map<std::pair<std::string, std::string>, double> pab;
  for (std::size_t s = 0; s < out1.size(); ++s) {
    if (out1[s].size() != out2[s].size()) throw_contract("uncorrelation: sentence length mismatch");
    r.tokens += out1[s].size();
  }
  if (r.tokens == 0) {
    r.passes = true;
    return r;
  }
  const double m = 1.0 / static_cast<double>(r.tokens);
  for (std::size_t s = 0; s < out1.size(); ++s)
    for (std::size_t i = 0; i < out1[s].size(); ++i) {
      pa[out1[s][i]] += m;
      pb[out2[s][i]] += m;
      pab[{out1[s][i], out2[s][i]}] += m;
    }
  for (const auto& [a, fa] : pa)
    for (const auto& [b, fb] : pb) {
      auto it = pab.find({a, b});
      double joint = it == pab.end() ? 0.0 : it->second;
      double dev = std::abs(joint - fa * fb);
      if (dev > r.max_deviation) {
        r.max_deviation = dev;
        r.worst_a = a;
        r.worst_b = b;
      }
    }
  r.passes = r.max_deviation <= tolerance;
  return r;
}

UncorrelationReport check_uncorrelated(const Tagger& h1, const Tagger& h2, const Corpus& pool, double tolerance) {
  std::vector<std::vector<std::string>> a, b;
  for (const auto& ex : pool.examples()) {
    a.push_back(h1.decode(ex.sentence).labels());
    b.push_back(h2.decode(ex.sentence).labels());
  }
  return check_uncorrelated(a, b, tolerance);
}

std::string UncorrelationReport::to_tsv() const {
  std::ostringstream os;
  os << "measure\tmax |P(a,b) - P(a)P(b)| over per-token output labels\n"
     << "tokens\t" << tokens << '\n'
     << "max_deviation\t" << fmt(max_deviation) << '\n'
     << "worst_pair\t" << worst_a << ',' << worst_b << '\n'
     << "tolerance\t" << fmt(tolerance) << '\n'
     << "underpowered\t" << (underpowered ? "yes" : "no") << '\n'
     << "verdict\t" << (passes ? "pass" : "fail") << '\n';
  return os.str();
}

// ---- bound verification --------------------------------------------------

void BoundInstance::validate() const {
  if (labels < 2) throw_usage("bound instance: need at least 2 labels");
  if (labels > 64) throw_usage("bound instance: more than 64 labels exceeds the enumeration guard");
  if (points.empty()) throw_usage("bound instance: empty support");
  if (points.size() > 4096) throw_usage("bound instance: more than 4096 points exceeds the enumeration guard");
  if (eps_num <= 0 || eps_den <= 0 || eps_num >= eps_den) throw_usage("bound instance: epsilon must lie in (0, 1)");
  for (auto k : compatible)
    if (k >= labels) throw_usage("bound instance: compatible label " + std::to_string(k) + " out of range");
  for (const auto& pt : points) {
    if (pt.weight <= 0) throw_usage("bound instance: weights must be positive");
    if (pt.f >= labels || pt.h >= labels) throw_usage("bound instance: label out of range");
  }
}

BoundInstance BoundInstance::parse(std::string_view text) {
  BoundInstance inst;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool saw_labels = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;
    auto fail = [&](const std::string& what) {
      throw_data("bound instance line " + std::to_string(line_no) + ": " + what);
    };
    if (key == "labels") {
      if (!(fields >> inst.labels)) fail("expected 'labels <n>'");
      saw_labels = true;
    } else if (key == "epsilon") {
      if (!(fields >> inst.eps_num >> inst.eps_den)) fail("expected 'epsilon <num> <den>'");
    } else if (key == "compatible") {
      std::size_t k;
      while (fields >> k) inst.compatible.push_back(k);
      if (!fields.eof()) fail("bad compatible label");
    } else if (key == "x") {
      Point pt{};
      if (!(fields >> pt.weight >> pt.f >> pt.h)) fail("expected 'x <weight> <f> <h>'");
      inst.points.push_back(pt);
    } else {
      fail("unknown key '" + key + "'");
    }
    std::string extra;
    if (key != "compatible" && (fields >> extra)) fail("trailing field '" + extra + "'");
  }
  if (!saw_labels) throw_data("bound instance: missing 'labels' line");
  std::sort(inst.compatible.begin(), inst.compatible.end());
  inst.compatible.erase(std::unique(inst.compatible.begin(), inst.compatible.end()), inst.compatible.end());
  try {
    inst.validate();
  } catch (const Error& e) {
    throw_data(e.what());
  }
  return inst;
}

std::string BoundInstance::to_text() const {
  std::ostringstream os;
  os << "labels " << labels << '\n' << "epsilon " << eps_num << ' ' << eps_den << '\n' << "compatible";
  for (auto k : compatible) os << ' ' << k;
  os << '\n';
  for (const auto& pt : points) os << "x " << pt.weight << ' ' << pt.f << ' ' << pt.h << '\n';
  return os.str();
}

BoundReport verify_theorem1_bound(const BoundInstance& inst, PremiseMode mode) {
  inst.validate();
  const std::size_t n = inst.labels;
  std::vector<Rational> c(n), p(n);
  std::vector<std::vector<Rational>> joint(n, std::vector<Rational>(n));  // [h][f]
  Rational total = 0;
  for (const auto& pt : inst.points) total += pt.weight;
  for (const auto& pt : inst.points) {
    Rational m = Rational(pt.weight) / total;
    c[pt.h] += m;
    p[pt.f] += m;
    joint[pt.h][pt.f] += m;
  }
  const Rational eps(inst.eps_num, inst.eps_den);

  BoundReport r;
  r.premises_met = true;
  for (std::size_t y = 0; y < n && r.premises_met; ++y) {
    if (c[y] < eps) {
      r.premises_met = false;
      r.premise_failure = "Pr[h = " + std::to_string(y) + "] < epsilon";
    }
  }
  for (std::size_t y = 0; y < n && r.premises_met; ++y) {
    for (std::size_t yp = 0; yp < n; ++yp) {
      if ((mode == PremiseMode::Diagonal) != (yp == y)) continue;
      if (joint[yp][y] / c[yp] < p[y] + eps) {
        r.premises_met = false;
        r.premise_failure = "Pr[f = " + std::to_string(y) + " | h = " + std::to_string(yp) + "] < Pr[f = " +
                            std::to_string(y) + "] + epsilon";
        break;
      }
    }
  }

  Rational right = 0;
  for (auto k : inst.compatible) right += c[k];
  right *= 2 * static_cast<int>(n - 1);
  r.right_exact = rational_text(right);
  r.right = static_cast<double>(right);
  r.holds = true;
  for (std::size_t l = 0; l < n; ++l) {
    if (p[l] == 0) {
      r.left_exact.push_back("undefined");
      r.left.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    Rational left = 0;
    for (auto k : inst.compatible)
      if (k != l) left += joint[k][l];
    left /= p[l];
    r.left_exact.push_back(rational_text(left));
    r.left.push_back(static_cast<double>(left));
    if (left > right && r.holds) {
      r.holds = false;
      r.violating_label = l;
    }
  }
  return r;
}

std::string BoundReport::to_text() const {
  std::ostringstream os;
  os << "premises\t" << (premises_met ? "met" : "unmet: " + premise_failure) << '\n';
  os << "right\t" << right_exact << '\t' << fmt(right) << '\n';
  for (std::size_t l = 0; l < left.size(); ++l)
    os << "left[" << l << "]\t" << left_exact[l] << '\t' << (std::isnan(left[l]) ? "nan" : fmt(left[l])) << '\n';
  os << "bound\t" << (holds ? "holds" : "violated at label " + std::to_string(violating_label)) << '\n';
  return os.str();
}

BoundInstance random_bound_instance(Rng& rng, std::size_t max_labels, std::size_t max_points, std::int64_t eps_num,
                                    std::int64_t eps_den) {
  if (max_labels < 2 || max_points < max_labels) throw_usage("random_bound_instance: bad limits");
  BoundInstance inst;
  inst.eps_num = eps_num;
  inst.eps_den = eps_den;
  inst.labels = 2 + rng.below(max_labels - 1);
  const std::size_t points = inst.labels + rng.below(max_points - inst.labels + 1);
  for (std::size_t i = 0; i < points; ++i)
    inst.points.push_back({static_cast<std::int64_t>(1 + rng.below(1000)), rng.below(inst.labels),
                           rng.below(inst.labels)});
  for (std::size_t k = 0; k < inst.labels; ++k)
    if (rng.bernoulli(0.5)) inst.compatible.push_back(k);
  return inst;
}

}  // namespace hints
