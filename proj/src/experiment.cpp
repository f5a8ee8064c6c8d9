#include "hints/experiment.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "hints/analysis.hpp"
#include "hints/version.hpp"

namespace hints {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::Baseline: return "baseline";
    case Mode::PosFeature: return "pos-feature";
    case Mode::SelfTrain: return "self-train";
    case Mode::OneSidedHints: return "one-sided-hints";
    case Mode::TwoSidedHints: return "two-sided-hints";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (auto m : {Mode::Baseline, Mode::PosFeature, Mode::SelfTrain, Mode::OneSidedHints, Mode::TwoSidedHints})
    if (mode_name(m) == name) return m;
  throw_usage("unknown mode '" + std::string(name) +
              "' (expected baseline, pos-feature, self-train, one-sided-hints or two-sided-hints)");
}

std::size_t ExperimentReport::failures() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += !c.ok;
  return n;
}

// ---- spec ----------------------------------------------------------------

namespace {

template <class T>
T get(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw_usage(std::string("experiment spec: bad value for '") + key + "'");
  }
}

void check_keys(const json& j, std::initializer_list<std::string_view> known, const char* where) {
  if (!j.is_object()) throw_usage(std::string("experiment spec: '") + where + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto name : known) ok = ok || name == k;
    if (!ok) throw_usage("experiment spec: unknown key '" + k + "' in " + where);
  }
}

}  // namespace

void ExperimentSpec::validate() const {
  train.validate();
  if (learner != "hmm" && learner != "perceptron")
    throw_usage("unknown learner '" + learner + "' (expected hmm or perceptron)");
  if (perceptron.epochs == 0) throw_usage("perceptron epochs must be positive");
  if (!(hmm.alpha > 0)) throw_usage("hmm alpha must be positive");
  auto ns = sweep_n.empty() ? std::vector<std::size_t>{n} : sweep_n;
  auto ms = sweep_m.empty() ? std::vector<std::size_t>{m} : sweep_m;
  for (auto v : ns)
    if (v == 0) throw_usage("task-2 labeled size N must be positive");
  std::vector<Mode> modes = compare;
  modes.push_back(mode);
  for (auto md : modes) {
    if (md == Mode::PosFeature) {
      if (learner != "perceptron") throw_usage("pos-feature mode needs the perceptron learner (extra features)");
      for (auto v : ms)
        if (v == 0) throw_usage("pos-feature mode needs task-1 labeled data (M > 0) to train the POS tagger");
    }
    if (md == Mode::TwoSidedHints)
      for (auto v : ms)
        if (v == 0) throw_usage("two-sided-hints needs task-1 labeled data (M > 0)");
  }
  if (!data.data_dir) data.synth.validate();
}

ExperimentSpec ExperimentSpec::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_usage(std::string("experiment spec: ") + e.what());
  }
  check_keys(j, {"mode", "compare", "learner", "constraint", "n", "m", "sweep", "data", "train", "hmm", "perceptron",
                 "mcnemar_unit", "save_models", "output_dir"},
             "spec");
  ExperimentSpec s;
  s.mode = parse_mode(get<std::string>(j, "mode", std::string(mode_name(s.mode))));
  if (j.contains("compare")) {
    s.compare.clear();
    for (const auto& c : get<std::vector<std::string>>(j, "compare", {})) s.compare.push_back(parse_mode(c));
  }
  s.learner = get<std::string>(j, "learner", s.learner);
  s.constraint = parse_constraint_kind(get<std::string>(j, "constraint", std::string(constraint_name(s.constraint))));
  s.n = get<std::size_t>(j, "n", s.n);
  s.m = get<std::size_t>(j, "m", s.m);
  if (j.contains("sweep")) {
    const json& sw = j["sweep"];
    check_keys(sw, {"n", "m"}, "sweep");
    s.sweep_n = get<std::vector<std::size_t>>(sw, "n", {});
    s.sweep_m = get<std::vector<std::size_t>>(sw, "m", {});
  }
  if (j.contains("data")) {
    const json& d = j["data"];
    check_keys(d, {"data_dir", "synth", "unlab", "test", "dev"}, "data");
    if (d.contains("data_dir") && !d["data_dir"].is_null()) s.data.data_dir = get<std::string>(d, "data_dir", "");
    if (d.contains("synth")) {
      const json& sy = d["synth"];
      if (sy.is_string()) {
        s.data.synth = SynthConfig::parse(sy.get<std::string>());
      } else if (sy.is_object()) {
        std::string kv;
        for (const auto& [k, v] : sy.items()) {
          kv += k + " = ";
          if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) kv += (i ? "," : "") + v[i].get<std::string>();
          } else if (v.is_string()) {
            kv += v.get<std::string>();
          } else {
            kv += v.dump();
          }
          kv += '\n';
        }
        s.data.synth = SynthConfig::parse(kv);
      } else {
        throw_usage("experiment spec: data.synth must be a string or an object");
      }
    }
    s.data.unlab = get<std::size_t>(d, "unlab", s.data.unlab);
    s.data.test = get<std::size_t>(d, "test", s.data.test);
    s.data.dev = get<std::size_t>(d, "dev", s.data.dev);
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    check_keys(t, {"iterations", "top_r", "pool_growth", "confidence_filter", "weighting", "seed"}, "train");
    s.train.iterations = get<std::size_t>(t, "iterations", s.train.iterations);
    if (t.contains("top_r") && !t["top_r"].is_null()) s.train.top_r = get<std::size_t>(t, "top_r", 0);
    if (t.contains("pool_growth") && !t["pool_growth"].is_null())
      s.train.pool_growth = get<std::size_t>(t, "pool_growth", 0);
    s.train.confidence_filter = get<bool>(t, "confidence_filter", s.train.confidence_filter);
    s.train.weighting = Weighting::parse(get<std::string>(t, "weighting", s.train.weighting.to_string()));
    s.train.seed = get<std::uint64_t>(t, "seed", s.train.seed);
  }
  if (j.contains("hmm")) {
    const json& h = j["hmm"];
    check_keys(h, {"alpha", "prune_threshold"}, "hmm");
    s.hmm.alpha = get<double>(h, "alpha", s.hmm.alpha);
    s.hmm.prune_threshold = get<std::size_t>(h, "prune_threshold", s.hmm.prune_threshold);
  }
  if (j.contains("perceptron")) {
    const json& p = j["perceptron"];
    check_keys(p, {"epochs", "seed"}, "perceptron");
    s.perceptron.epochs = get<unsigned>(p, "epochs", s.perceptron.epochs);
    s.perceptron.seed = get<std::uint64_t>(p, "seed", s.perceptron.seed);
  }
  const std::string unit = get<std::string>(j, "mcnemar_unit", "sentence");
  if (unit == "sentence") s.mcnemar_unit = McNemarUnit::Sentence;
  else if (unit == "token") s.mcnemar_unit = McNemarUnit::Token;
  else throw_usage("experiment spec: mcnemar_unit must be sentence or token");
  s.save_models = get<bool>(j, "save_models", s.save_models);
  s.output_dir = get<std::string>(j, "output_dir", s.output_dir);
  s.validate();
  return s;
}

std::string ExperimentSpec::to_json() const {
  json j;
  j["mode"] = mode_name(mode);
  j["compare"] = json::array();
  for (auto c : compare) j["compare"].push_back(mode_name(c));
  j["learner"] = learner;
  j["constraint"] = constraint_name(constraint);
  j["n"] = n;
  j["m"] = m;
  j["sweep"] = {{"n", sweep_n}, {"m", sweep_m}};
  json d;
  d["data_dir"] = data.data_dir ? json(*data.data_dir) : json(nullptr);
  d["synth"] = data.synth.to_text();
  d["unlab"] = data.unlab;
  d["test"] = data.test;
  d["dev"] = data.dev;
  j["data"] = d;
  json t;
  t["iterations"] = train.iterations;
  t["top_r"] = train.top_r ? json(*train.top_r) : json(nullptr);
  t["pool_growth"] = train.pool_growth ? json(*train.pool_growth) : json(nullptr);
  t["confidence_filter"] = train.confidence_filter;
  t["weighting"] = train.weighting.to_string();
  t["seed"] = train.seed;
  j["train"] = t;
  j["hmm"] = {{"alpha", hmm.alpha}, {"prune_threshold", hmm.prune_threshold}};
  j["perceptron"] = {{"epochs", perceptron.epochs}, {"seed", perceptron.seed}};
  j["mcnemar_unit"] = mcnemar_unit == McNemarUnit::Sentence ? "sentence" : "token";
  j["save_models"] = save_models;
  j["output_dir"] = output_dir;
  return j.dump(2);
}

// ---- cells ---------------------------------------------------------------

namespace {

struct CellData {
  Corpus d1, d2, unlab, test, dev;
};

Corpus read_corpus(const fs::path& path, Role role, bool keep_y1, bool keep_y2) {
  const std::string text = read_file(path.string());
  // Column layout from the first token line: 4 = token,pos,chunk,ner;
  // 3 = token,pos,chunk; 2 = token,ner; 1 = token.
  std::size_t columns = 0;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    std::istringstream f(line);
    std::string tok;
    std::size_t c = 0;
    while (f >> tok) ++c;
    if (c > 0 && !line.starts_with("-DOCSTART-")) {
      columns = c;
      break;
    }
  }
  static const std::map<std::size_t, std::string> layouts{
      {1, "token"}, {2, "token,ner"}, {3, "token,pos,chunk"}, {4, "token,pos,chunk,ner"}};
  auto it = layouts.find(columns);
  if (it == layouts.end()) throw_data(path.string() + ": cannot infer the column layout");
  Corpus all = parse_conll(text, ColumnSpec::parse(it->second), Role::Test).corpus;
  return all.with_role(role, keep_y1, keep_y2);
}

Corpus prefix(const Corpus& c, std::size_t n, const char* what) {
  if (n > c.size())
    throw_data(std::string(what) + " has " + std::to_string(c.size()) + " sentences, " + std::to_string(n) +
               " requested");
  return Corpus(c.role(), c.syntax_alphabet(), c.entity_alphabet(),
                std::vector<Example>(c.examples().begin(), c.examples().begin() + static_cast<std::ptrdiff_t>(n)));
}

CellData load_cell(const ExperimentSpec& spec, std::size_t n, std::size_t m) {
  const bool one_sided_unlab = spec.mode != Mode::TwoSidedHints;
  if (spec.data.data_dir) {
    const fs::path dir(*spec.data.data_dir);
    auto opt = [&](const char* name, Role role, bool y1, bool y2) {
      fs::path p = dir / (std::string(name) + ".conll");
      if (!fs::exists(p)) return Corpus(role, LabelAlphabet::default_syntax(), LabelAlphabet::default_entity());
      return read_corpus(p, role, y1, y2);
    };
    CellData d{opt("d1", Role::Labeled1, true, false), opt("d2", Role::Labeled2, false, true),
               opt("unlab", Role::Unlabeled, one_sided_unlab, false), opt("test", Role::Test, true, true),
               opt("dev", Role::Test, true, true)};
    d.d1 = prefix(d.d1, m, "d1.conll");
    d.d2 = prefix(d.d2, n, "d2.conll");
    if (d.test.empty()) throw_data(dir.string() + ": missing or empty test.conll");
    return d;
  }
  const SplitSizes sizes{m, n, spec.data.unlab, spec.data.test, spec.data.dev};
  Corpus all = generate(spec.data.synth, sizes.d1 + sizes.d2 + sizes.unlab + sizes.test + sizes.dev);
  Splits sp = split(all, sizes, spec.train.seed, one_sided_unlab ? UnlabMode::OneSided : UnlabMode::TwoSided);
  return CellData{std::move(sp.d1), std::move(sp.d2), std::move(sp.unlab), std::move(sp.test), std::move(sp.dev)};
}

std::unique_ptr<Learner> make_learner(const ExperimentSpec& spec) {
  if (spec.learner == "perceptron") return std::make_unique<PerceptronLearner>(spec.perceptron);
  return std::make_unique<HmmLearner>(spec.hmm);
}

struct ModeOutput {
  std::vector<Labeling> pred2;
  std::optional<std::vector<Labeling>> pred1;
  std::optional<Trace> trace;
  std::unique_ptr<Tagger> model2, model1;
  std::optional<Corpus> augmented;
};

std::vector<Labeling> decode_all(const Tagger& model, const Corpus& c,
                                 const std::vector<std::vector<std::string>>* extras = nullptr) {
  std::vector<Labeling> out;
  out.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(model.decode(c[i].sentence, extras ? &(*extras)[i] : nullptr));
  return out;
}

std::vector<std::vector<std::string>> pos_channel(const Tagger& pos_tagger, const Corpus& c) {
  std::vector<std::vector<std::string>> out;
  out.reserve(c.size());
  for (const auto& ex : c.examples()) out.push_back(pos_component(pos_tagger.decode(ex.sentence)));
  return out;
}

ModeOutput run_mode(Mode mode, const ExperimentSpec& spec, const CellData& data) {
  auto learner = make_learner(spec);
  const Corpus* dev = data.dev.empty() ? nullptr : &data.dev;
  const auto chi = ConstraintFunction::make(spec.constraint);
  ModeOutput out;
  switch (mode) {
    case Mode::Baseline:
      out.model2 = learner->train(training_items(data.d2, Task::Entity), data.d2.entity_alphabet());
      break;
    case Mode::PosFeature: {
      // Task-1 HMM supplies a predicted-POS channel to the task-2 learner.
      HmmLearner pos_learner(spec.hmm);
      auto pos_tagger = pos_learner.train(training_items(data.d1, Task::Syntax), data.d1.syntax_alphabet());
      auto train_pos = pos_channel(*pos_tagger, data.d2);
      auto items = training_items(data.d2, Task::Entity);
      for (std::size_t i = 0; i < items.size(); ++i) items[i].extra = &train_pos[i];
      out.model2 = learner->train(items, data.d2.entity_alphabet());
      auto test_pos = pos_channel(*pos_tagger, data.test);
      out.pred2 = decode_all(*out.model2, data.test, &test_pos);
      return out;
    }
    case Mode::SelfTrain: {
      auto r = self_train(*learner, data.d2, data.unlab.with_role(Role::Unlabeled, false, false), spec.train, dev);
      out.model2 = std::move(r.model);
      out.trace = std::move(r.trace);
      out.augmented = std::move(r.augmented);
      break;
    }
    case Mode::OneSidedHints: {
      for (const auto& ex : data.unlab.examples())
        if (!ex.y1) throw_data("one-sided hints: unlabeled example '" + ex.sentence.id() + "' lacks y1");
      auto r = one_sided_hints(*learner, data.d2, data.unlab, chi, spec.train, dev);
      out.model2 = std::move(r.model);
      out.trace = std::move(r.trace);
      out.augmented = std::move(r.augmented);
      break;
    }
    case Mode::TwoSidedHints: {
      auto learner1 = make_learner(spec);
      auto r = two_sided_hints(*learner1, *learner, data.d1, data.d2, data.unlab.with_role(Role::Unlabeled, false, false),
                               chi, spec.train, dev);
      out.model1 = std::move(r.model1);
      out.model2 = std::move(r.model2);
      out.trace = std::move(r.trace);
      out.augmented = std::move(r.augmented);
      out.pred1 = decode_all(*out.model1, data.test);
      break;
    }
  }
  out.pred2 = decode_all(*out.model2, data.test);
  return out;
}

std::string metric_row(std::string_view system, std::string_view task, const MetricReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << system << '\t' << task << '\t' << r.precision << '\t' << r.recall << '\t' << r.f1 << '\t';
  if (r.accuracy) os << *r.accuracy; else os << '-';
  os << '\t' << r.gold_spans << '\t' << r.predicted_spans << '\t' << r.matched_spans << '\n';
  return os.str();
}

CellResult run_cell(const ExperimentSpec& spec, std::size_t n, std::size_t m, const fs::path& dir) {
  CellResult cell;
  cell.n = n;
  cell.m = m;
  cell.name = std::string(mode_name(spec.mode)) + "_n" + std::to_string(n) + "_m" + std::to_string(m);
  const fs::path cdir = dir / cell.name;
  fs::create_directories(cdir);

  const CellData data = load_cell(spec, n, m);
  bool test_has_y2 = true, test_has_y1 = true;
  for (const auto& ex : data.test.examples()) {
    test_has_y2 = test_has_y2 && ex.y2.has_value();
    test_has_y1 = test_has_y1 && ex.y1.has_value();
  }
  if (!test_has_y2) throw_data("test set lacks entity labels");

  ModeOutput main = run_mode(spec.mode, spec, data);
  std::map<Mode, ModeOutput> others;
  for (auto c : spec.compare)
    if (c != spec.mode && !others.count(c)) others.emplace(c, run_mode(c, spec, data));
  if (!others.count(Mode::Baseline) && spec.mode != Mode::Baseline)
    others.emplace(Mode::Baseline, run_mode(Mode::Baseline, spec, data));
  const ModeOutput& base = spec.mode == Mode::Baseline ? main : others.at(Mode::Baseline);

  cell.task2 = evaluate(data.test, main.pred2, Task::Entity);
  cell.baseline2 = evaluate(data.test, base.pred2, Task::Entity);
  std::string metrics = "system\ttask\tprecision\trecall\tf1\taccuracy\tgold\tpredicted\tmatched\n";
  metrics += metric_row(mode_name(spec.mode), "ner", cell.task2);
  if (main.pred1 && test_has_y1) {
    cell.task1 = evaluate(data.test, *main.pred1, Task::Syntax);
    metrics += metric_row(mode_name(spec.mode), "syntax", *cell.task1);
    auto b1 = make_learner(spec)->train(training_items(data.d1, Task::Syntax), data.d1.syntax_alphabet());
    metrics += metric_row("baseline", "syntax", evaluate(data.test, decode_all(*b1, data.test), Task::Syntax));
  }
  for (const auto& [mode, out] : others)
    metrics += metric_row(mode_name(mode), "ner", evaluate(data.test, out.pred2, Task::Entity));
  write_file((cdir / "metrics.tsv").string(), metrics);

  std::string mc = "system_a\tsystem_b\tunit\ta_only\tb_only\tstatistic\tp_value\ttest\tverdict\n";
  for (auto c : spec.compare) {
    if (c == spec.mode) continue;
    const auto r = mcnemar(main.pred2, others.at(c).pred2, data.test, Task::Entity, spec.mcnemar_unit);
    cell.comparisons.emplace_back(c, r);
    std::ostringstream os;
    os.precision(6);
    os << mode_name(spec.mode) << '\t' << mode_name(c) << '\t'
       << (spec.mcnemar_unit == McNemarUnit::Sentence ? "sentence" : "token") << '\t' << r.a_only << '\t' << r.b_only
       << '\t' << r.statistic << '\t' << r.p_value << '\t' << (r.exact ? "exact" : "chi2") << '\t'
       << verdict_name(r.verdict) << '\n';
    mc += os.str();
  }
  write_file((cdir / "mcnemar.tsv").string(), mc);

  if (main.trace) write_file((cdir / "trace.tsv").string(), main.trace->to_tsv());

  // Discrimination of the constraint for the baseline task-2 model, over
  // the unlabeled pool when it carries y1, else the test set.
  bool pool_y1 = !data.unlab.empty();
  for (const auto& ex : data.unlab.examples()) pool_y1 = pool_y1 && ex.y1.has_value();
  const Corpus* pool = pool_y1 ? &data.unlab : (test_has_y1 ? &data.test : nullptr);
  if (pool) {
    const auto rep = discrimination(ConstraintFunction::make(spec.constraint), *pool, *base.model2);
    write_file((cdir / "discrimination.tsv").string(),
               std::string("pool\t") + (pool_y1 ? "unlab" : "test") + '\n' + rep.to_tsv());
  }
  if (main.augmented) {
    bool all_y1 = true;
    for (const auto& ex : main.augmented->examples()) all_y1 = all_y1 && ex.y1.has_value();
    ColumnSpec cs = ColumnSpec::parse(all_y1 ? "token,pos,chunk,ner" : "token,ner");
    write_file((cdir / "augmented.conll").string(), write_conll(*main.augmented, cs));
  }
  if (spec.save_models) {
    write_file((cdir / "model_task2.txt").string(), main.model2->serialize());
    if (main.model1) write_file((cdir / "model_task1.txt").string(), main.model1->serialize());
  }
  cell.ok = true;
  return cell;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const fs::path dir(spec.output_dir);
  try {
    fs::create_directories(dir);
  } catch (const fs::filesystem_error& e) {
    throw_data(std::string("cannot create output directory: ") + e.what());
  }
  const auto ns = spec.sweep_n.empty() ? std::vector<std::size_t>{spec.n} : spec.sweep_n;
  const auto ms = spec.sweep_m.empty() ? std::vector<std::size_t>{spec.m} : spec.sweep_m;

  ExperimentReport report;
  for (auto m : ms)
    for (auto n : ns) {
      CellResult cell;
      try {
        cell = run_cell(spec, n, m, dir);
      } catch (const std::exception& e) {
        cell.n = n;
        cell.m = m;
        cell.name = std::string(mode_name(spec.mode)) + "_n" + std::to_string(n) + "_m" + std::to_string(m);
        cell.ok = false;
        cell.error = e.what();
      }
      report.cells.push_back(std::move(cell));
    }

  std::ostringstream index;
  index.precision(6);
  index << "cell\tmode\tn\tm\tstatus\tf1_ner\tbaseline_f1_ner\tf1_syntax\terror\n";
  std::map<Mode, WinTieLose> wtl;
  for (const auto& c : report.cells) {
    index << c.name << '\t' << mode_name(spec.mode) << '\t' << c.n << '\t' << c.m << '\t' << (c.ok ? "ok" : "failed")
          << '\t';
    if (c.ok) {
      index << c.task2.f1 << '\t' << c.baseline2.f1 << '\t';
      if (c.task1) index << c.task1->f1; else index << '-';
      index << "\t-\n";
    } else {
      std::string err = c.error;
      for (auto& ch : err)
        if (ch == '\t' || ch == '\n') ch = ' ';
      index << "-\t-\t-\t" << err << '\n';
    }
    for (const auto& [mode, r] : c.comparisons) wtl[mode].add(r.verdict);
  }
  write_file((dir / "index.tsv").string(), index.str());

  std::ostringstream w;
  w << "comparison\twin\ttie\tlose\n";
  for (const auto& [mode, t] : wtl)
    w << mode_name(spec.mode) << " vs " << mode_name(mode) << '\t' << t.win << '\t' << t.tie << '\t' << t.lose << '\n';
  write_file((dir / "wtl.tsv").string(), w.str());

  json manifest;
  manifest["version"] = kVersion;
  manifest["spec"] = json::parse(spec.to_json());
  manifest["synth_seed"] = spec.data.synth.seed;
  manifest["train_seed"] = spec.train.seed;
  manifest["prng"] = "mt19937_64 with custom uniform/below/shuffle";
  manifest["cells"] = json::array();
  for (const auto& c : report.cells)
    manifest["cells"].push_back({{"name", c.name}, {"n", c.n}, {"m", c.m}, {"ok", c.ok}, {"error", c.error}});
  write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  return report;
}

}  // namespace hints
