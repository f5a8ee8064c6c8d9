#include "hints/hints.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <sstream>

#include "hints/analysis.hpp"
#include "hints/constraints.hpp"
#include "hints/core.hpp"
#include "hints/eval.hpp"
#include "hints/experiment.hpp"
#include "hints/synth.hpp"
#include "hints/tagger.hpp"
#include "hints/version.hpp"

struct hints_corpus {
  hints::Corpus corpus;
};

struct hints_model {
  std::unique_ptr<hints::Tagger> tagger;
};

namespace {

thread_local std::string g_last_error;

template <class F>
hints_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return HINTS_OK;
  } catch (const hints::Error& e) {
    g_last_error = e.what();
    switch (e.kind()) {
      case hints::ErrorKind::Usage: return HINTS_ERR_USAGE;
      case hints::ErrorKind::Data: return HINTS_ERR_DATA;
      case hints::ErrorKind::Contract: return HINTS_ERR_CONTRACT;
    }
    return HINTS_ERR_INTERNAL;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HINTS_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return HINTS_ERR_DATA;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HINTS_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) hints::throw_usage(std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

hints::Role parse_role(const char* role) {
  need(role, "role");
  const std::string_view r(role);
  if (r == "labeled1") return hints::Role::Labeled1;
  if (r == "labeled2") return hints::Role::Labeled2;
  if (r == "unlabeled") return hints::Role::Unlabeled;
  if (r == "test") return hints::Role::Test;
  hints::throw_usage("unknown role '" + std::string(r) + "' (expected labeled1, labeled2, unlabeled or test)");
}

hints::Task to_task(hints_task task) {
  if (task == HINTS_TASK_SYNTAX) return hints::Task::Syntax;
  if (task == HINTS_TASK_ENTITY) return hints::Task::Entity;
  hints::throw_usage("task must be 1 (syntax) or 2 (entity)");
}

hints::Task model_task(const hints::Tagger& t) {
  return t.alphabet()->composite() ? hints::Task::Syntax : hints::Task::Entity;
}

hints::ConstraintFunction load_constraint(const char* spec) {
  need(spec, "constraint");
  const std::string s(spec);
  if (s == "full" || s == "pos-only" || s == "np-only" || s == "constant")
    return hints::ConstraintFunction::make(hints::parse_constraint_kind(s));
  if (!std::filesystem::exists(s))
    hints::throw_usage("constraint '" + s + "' is neither a built-in name nor a rules file");
  return hints::ConstraintFunction::from_rules(std::filesystem::path(s).filename().string(), hints::read_file(s));
}

std::vector<hints::Labeling> labelings(const hints::Corpus& c, hints::Task task, const char* what) {
  std::vector<hints::Labeling> out;
  out.reserve(c.size());
  for (const auto& ex : c.examples()) {
    const auto& y = ex.labels(task);
    if (!y) hints::throw_contract(std::string(what) + ": example '" + ex.sentence.id() + "' has no labeling");
    out.push_back(*y);
  }
  return out;
}

void check_aligned(const hints::Corpus& a, const hints::Corpus& b) {
  if (a.size() != b.size()) hints::throw_contract("corpora have different sentence counts");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].sentence.tokens() != b[i].sentence.tokens())
      hints::throw_contract("sentence " + std::to_string(i + 1) + " differs between corpora");
}

}  // namespace

extern "C" {

const char* hints_last_error(void) { return g_last_error.c_str(); }
const char* hints_version(void) { return hints::kVersion; }
void hints_string_free(char* s) { std::free(s); }
void hints_doubles_free(double* p) { std::free(p); }

hints_status hints_corpus_parse(const char* text, const char* columns, const char* role, hints_corpus** out,
                                size_t* repairs) {
  return guard([&] {
    need(text, "text");
    need(columns, "columns");
    need(out, "out");
    auto res = hints::parse_conll(text, hints::ColumnSpec::parse(columns), parse_role(role));
    if (repairs) *repairs = res.repairs;
    *out = new hints_corpus{std::move(res.corpus)};
  });
}

hints_status hints_corpus_read(const char* path, const char* columns, const char* role, hints_corpus** out,
                               size_t* repairs) {
  return guard([&] {
    need(path, "path");
    need(columns, "columns");
    need(out, "out");
    const std::string text = hints::read_file(path);
    try {
      auto res = hints::parse_conll(text, hints::ColumnSpec::parse(columns), parse_role(role));
      if (repairs) *repairs = res.repairs;
      *out = new hints_corpus{std::move(res.corpus)};
    } catch (const hints::Error& e) {
      throw hints::Error(e.kind(), std::string(path) + ": " + e.what());
    }
  });
}

hints_status hints_corpus_write(const hints_corpus* corpus, const char* path, const char* columns) {
  return guard([&] {
    need(corpus, "corpus");
    need(path, "path");
    need(columns, "columns");
    hints::write_file(path, hints::write_conll(corpus->corpus, hints::ColumnSpec::parse(columns)));
  });
}

size_t hints_corpus_size(const hints_corpus* corpus) { return corpus ? corpus->corpus.size() : 0; }
void hints_corpus_free(hints_corpus* corpus) { delete corpus; }

hints_status hints_synth_generate(const char* config, size_t n_sentences, hints_corpus** out) {
  return guard([&] {
    need(out, "out");
    const auto cfg = config && *config ? hints::SynthConfig::parse(config) : hints::SynthConfig{};
    *out = new hints_corpus{hints::generate(cfg, n_sentences)};
  });
}

hints_status hints_synth_split(const hints_corpus* corpus, size_t d1, size_t d2, size_t unlab, size_t test, size_t dev,
                               uint64_t seed, int two_sided, hints_corpus* out[5]) {
  return guard([&] {
    need(corpus, "corpus");
    need(out, "out");
    auto sp = hints::split(corpus->corpus, {d1, d2, unlab, test, dev}, seed,
                           two_sided ? hints::UnlabMode::TwoSided : hints::UnlabMode::OneSided);
    out[0] = new hints_corpus{std::move(sp.d1)};
    out[1] = new hints_corpus{std::move(sp.d2)};
    out[2] = new hints_corpus{std::move(sp.unlab)};
    out[3] = new hints_corpus{std::move(sp.test)};
    out[4] = new hints_corpus{std::move(sp.dev)};
  });
}

hints_status hints_model_train(const hints_corpus* corpus, hints_task task, const char* learner, hints_model** out) {
  return guard([&] {
    need(corpus, "corpus");
    need(learner, "learner");
    need(out, "out");
    const hints::Task t = to_task(task);
    const std::string l(learner);
    std::unique_ptr<hints::Learner> lr;
    if (l == "hmm") lr = std::make_unique<hints::HmmLearner>();
    else if (l == "perceptron") lr = std::make_unique<hints::PerceptronLearner>();
    else hints::throw_usage("unknown learner '" + l + "' (expected hmm or perceptron)");
    auto items = hints::training_items(corpus->corpus, t);
    if (items.empty()) hints::throw_usage("no training examples carry task-" + std::to_string(int(task)) + " labels");
    *out = new hints_model{lr->train(items, corpus->corpus.alphabet(t))};
  });
}

hints_status hints_model_save(const hints_model* model, const char* path) {
  return guard([&] {
    need(model, "model");
    need(path, "path");
    hints::write_file(path, model->tagger->serialize());
  });
}

hints_status hints_model_load(const char* path, hints_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new hints_model{hints::Tagger::deserialize(hints::read_file(path))};
  });
}

hints_status hints_model_decode(const hints_model* model, const hints_corpus* input, hints_task task,
                                hints_corpus** out, double** confidence) {
  return guard([&] {
    need(model, "model");
    need(input, "input");
    need(out, "out");
    const hints::Task t = to_task(task);
    if (model_task(*model->tagger) != t) hints::throw_usage("model was trained for the other task");
    const auto& in = input->corpus;
    std::vector<hints::Example> examples;
    std::unique_ptr<double, void (*)(void*)> conf(nullptr, std::free);
    if (confidence && !in.empty()) {
      conf.reset(static_cast<double*>(std::malloc(sizeof(double) * in.size())));
      if (!conf) throw std::bad_alloc();
    }
    for (std::size_t i = 0; i < in.size(); ++i) {
      hints::Example ex = in[i];
      auto p = model->tagger->predict(ex.sentence);
      if (conf) conf.get()[i] = p.confidence;
      (t == hints::Task::Syntax ? ex.y1 : ex.y2) = std::move(p.labels);
      examples.push_back(std::move(ex));
    }
    const auto& a = model->tagger->alphabet();
    *out = new hints_corpus{hints::Corpus(hints::Role::Test, t == hints::Task::Syntax ? a : in.syntax_alphabet(),
                                          t == hints::Task::Entity ? a : in.entity_alphabet(), std::move(examples))};
    if (confidence) *confidence = conf.release();
  });
}

void hints_model_free(hints_model* model) { delete model; }

hints_status hints_eval(const hints_corpus* gold, const hints_corpus* predicted, hints_task task, char** report,
                        double* f1) {
  return guard([&] {
    need(gold, "gold");
    need(predicted, "predicted");
    const hints::Task t = to_task(task);
    check_aligned(gold->corpus, predicted->corpus);
    const auto pred = labelings(predicted->corpus, t, "predictions");
    const auto r = hints::evaluate(gold->corpus, pred, t);
    std::ostringstream os;
    os.precision(6);
    os << "precision\t" << r.precision << "\nrecall\t" << r.recall << "\nf1\t" << r.f1 << "\naccuracy\t"
       << r.accuracy.value_or(0) << "\ngold_spans\t" << r.gold_spans << "\npredicted_spans\t" << r.predicted_spans
       << "\nmatched_spans\t" << r.matched_spans << '\n';
    if (t == hints::Task::Syntax)
      os << "pos_accuracy\t" << hints::token_accuracy(gold->corpus, pred, t, true) << '\n';
    if (f1) *f1 = r.f1;
    if (report) *report = dup_string(os.str());
  });
}

hints_status hints_mcnemar(const hints_corpus* gold, const hints_corpus* a, const hints_corpus* b, hints_task task,
                           int per_token, char** report) {
  return guard([&] {
    need(gold, "gold");
    need(a, "a");
    need(b, "b");
    need(report, "report");
    const hints::Task t = to_task(task);
    check_aligned(gold->corpus, a->corpus);
    check_aligned(gold->corpus, b->corpus);
    const auto r = hints::mcnemar(labelings(a->corpus, t, "system A"), labelings(b->corpus, t, "system B"),
                                  gold->corpus, t, per_token ? hints::McNemarUnit::Token : hints::McNemarUnit::Sentence);
    std::ostringstream os;
    os.precision(10);
    os << "unit\t" << (per_token ? "token" : "sentence") << "\na_only\t" << r.a_only << "\nb_only\t" << r.b_only
       << "\ntest\t" << (r.exact ? "exact-binomial" : "chi2-continuity") << "\nstatistic\t" << r.statistic
       << "\np_value\t" << r.p_value << "\nverdict\t"
       << (r.verdict == hints::Verdict::WinA ? "win-A" : r.verdict == hints::Verdict::WinB ? "win-B" : "tie") << '\n';
    *report = dup_string(os.str());
  });
}

hints_status hints_analyze_discrimination(const hints_corpus* pool, const hints_model* h0, const char* constraint,
                                          char** report) {
  return guard([&] {
    need(pool, "pool");
    need(h0, "h0");
    need(report, "report");
    if (model_task(*h0->tagger) != hints::Task::Entity) hints::throw_usage("h0 must be a task-2 (entity) model");
    *report = dup_string(hints::discrimination(load_constraint(constraint), pool->corpus, *h0->tagger).to_tsv());
  });
}

hints_status hints_analyze_usefulness(const hints_model* h, const hints_corpus* reference, double epsilon,
                                      int per_token, int as_printed, char** report, int* useful) {
  return guard([&] {
    need(h, "h");
    need(reference, "reference");
    const auto r = hints::check_weakly_useful(
        *h->tagger, reference->corpus, model_task(*h->tagger), epsilon,
        per_token ? hints::UsefulnessUnit::Token : hints::UsefulnessUnit::Sequence,
        as_printed ? hints::PremiseMode::AsPrinted : hints::PremiseMode::Diagonal);
    if (useful) *useful = r.useful();
    if (report) *report = dup_string(r.to_tsv());
  });
}

hints_status hints_analyze_uncorrelated(const hints_model* h1, const hints_model* h2, const hints_corpus* pool,
                                        double tolerance, char** report, int* passes) {
  return guard([&] {
    need(h1, "h1");
    need(h2, "h2");
    need(pool, "pool");
    const auto r = hints::check_uncorrelated(*h1->tagger, *h2->tagger, pool->corpus, tolerance);
    if (passes) *passes = r.passes;
    if (report) *report = dup_string(r.to_tsv());
  });
}

hints_status hints_verify_bound(const char* instance_text, int as_printed, char** report, int* holds) {
  return guard([&] {
    need(instance_text, "instance_text");
    const auto r = hints::verify_theorem1_bound(hints::BoundInstance::parse(instance_text),
                                                as_printed ? hints::PremiseMode::AsPrinted
                                                           : hints::PremiseMode::Diagonal);
    if (holds) *holds = r.holds;
    if (report) *report = dup_string(r.to_text());
  });
}

double hints_hamming_threshold(double mean_len, size_t labels_per_vertex) {
  double v = 0;
  if (guard([&] { v = hints::hamming_threshold(mean_len, labels_per_vertex); }) != HINTS_OK) return -1;
  return v;
}

hints_status hints_experiment_run(const char* spec_json, size_t* failed_cells, char** summary) {
  return guard([&] {
    need(spec_json, "spec_json");
    const auto spec = hints::ExperimentSpec::from_json(spec_json);
    const auto rep = hints::run_experiment(spec);
    if (failed_cells) *failed_cells = rep.failures();
    if (summary)
      *summary = dup_string(hints::read_file((std::filesystem::path(spec.output_dir) / "index.tsv").string()));
  });
}

}  // extern "C"
