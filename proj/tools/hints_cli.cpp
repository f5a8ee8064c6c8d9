// hints command-line tool. Talks to the library only through hints.h.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hints/hints.h"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCells = 3;

struct Failure {
  int code;
};

int exit_code(hints_status s) { return s == HINTS_ERR_USAGE ? kExitUsage : kExitData; }

void check(hints_status s) {
  if (s == HINTS_OK) return;
  std::cerr << "hints: " << hints_last_error() << '\n';
  throw Failure{exit_code(s)};
}

[[noreturn]] void usage_error(const std::string& msg) {
  std::cerr << "hints: " << msg << '\n';
  throw Failure{kExitUsage};
}

struct CorpusDeleter {
  void operator()(hints_corpus* c) const { hints_corpus_free(c); }
};
struct ModelDeleter {
  void operator()(hints_model* m) const { hints_model_free(m); }
};
struct StringDeleter {
  void operator()(char* s) const { hints_string_free(s); }
};
using CorpusPtr = std::unique_ptr<hints_corpus, CorpusDeleter>;
using ModelPtr = std::unique_ptr<hints_model, ModelDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

CorpusPtr read_corpus(const std::string& path, const std::string& columns, const char* role) {
  hints_corpus* c = nullptr;
  size_t repairs = 0;
  check(hints_corpus_read(path.c_str(), columns.c_str(), role, &c, &repairs));
  if (repairs) std::cerr << "hints: " << path << ": repaired " << repairs << " ill-formed BIO labels\n";
  return CorpusPtr(c);
}

ModelPtr load_model(const std::string& path) {
  hints_model* m = nullptr;
  check(hints_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "hints: cannot read " << path << '\n';
    throw Failure{kExitData};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const StringPtr& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text.get();
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f || !(f << text.get())) {
    std::cerr << "hints: cannot write " << out << '\n';
    throw Failure{kExitData};
  }
}

hints_task task_of(int t) {
  if (t != 1 && t != 2) usage_error("--task must be 1 (syntax) or 2 (entity)");
  return static_cast<hints_task>(t);
}

// ---- experiment flags ------------------------------------------------------

struct ExperimentFlags {
  std::string config, mode, learner, constraint, data_dir, out, weighting;
  std::vector<std::size_t> n, m;
  std::size_t iterations = 0, top_r = 0, pool_growth = 0;
  std::uint64_t seed = 0;
  bool confidence_filter = false, per_token = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment spec; flags given on the command line take precedence");
  cmd->add_option("--mode", f.mode, "baseline | pos-feature | self-train | one-sided-hints | two-sided-hints");
  cmd->add_option("--learner", f.learner, "hmm | perceptron");
  cmd->add_option("--constraint", f.constraint, "full | pos-only | np-only | constant");
  cmd->add_option("--n", f.n, "task-2 labeled size(s); several values sweep")->delimiter(',');
  cmd->add_option("--m", f.m, "task-1 labeled size(s); several values sweep")->delimiter(',');
  cmd->add_option("--iterations", f.iterations, "training iterations");
  cmd->add_option("--top-r", f.top_r, "add only the R best compatible examples per iteration");
  cmd->add_option("--pool-growth", f.pool_growth, "working pool growth per iteration (default 10R)");
  cmd->add_flag("--confidence-filter", f.confidence_filter, "rank candidates by model confidence");
  cmd->add_option("--weighting", f.weighting, "equal | fraction:<w> | confidence");
  cmd->add_option("--seed", f.seed, "training / split seed");
  cmd->add_option("--data-dir", f.data_dir, "directory with d1/d2/unlab/test[/dev].conll (default: synthetic data)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--per-token-mcnemar", f.per_token, "McNemar over tokens instead of sentences");
}

json experiment_json(const CLI::App* cmd, const ExperimentFlags& f) {
  json spec = json::object();
  if (!f.config.empty()) {
    try {
      spec = json::parse(slurp(f.config));
    } catch (const json::parse_error& e) {
      usage_error(f.config + ": " + e.what());
    }
  }
  auto given = [&](const char* name) { return cmd->count(name) > 0; };
  if (given("--mode")) spec["mode"] = f.mode;
  if (given("--learner")) spec["learner"] = f.learner;
  if (given("--constraint")) spec["constraint"] = f.constraint;
  if (given("--n")) {
    if (f.n.size() == 1) spec["n"] = f.n[0];
    else spec["sweep"]["n"] = f.n;
  }
  if (given("--m")) {
    if (f.m.size() == 1) spec["m"] = f.m[0];
    else spec["sweep"]["m"] = f.m;
  }
  if (given("--iterations")) spec["train"]["iterations"] = f.iterations;
  if (given("--top-r")) spec["train"]["top_r"] = f.top_r;
  if (given("--pool-growth")) spec["train"]["pool_growth"] = f.pool_growth;
  if (given("--confidence-filter")) spec["train"]["confidence_filter"] = f.confidence_filter;
  if (given("--weighting")) spec["train"]["weighting"] = f.weighting;
  if (given("--seed")) spec["train"]["seed"] = f.seed;
  if (given("--data-dir")) spec["data"]["data_dir"] = f.data_dir;
  if (given("--out")) spec["output_dir"] = f.out;
  if (given("--per-token-mcnemar")) spec["mcnemar_unit"] = "token";
  return spec;
}

int run_experiment_spec(const json& spec) {
  size_t failed = 0;
  char* summary = nullptr;
  check(hints_experiment_run(spec.dump().c_str(), &failed, &summary));
  StringPtr s(summary);
  std::cout << s.get();
  if (failed) {
    std::cerr << "hints: " << failed << " cell(s) failed; see index.tsv\n";
    return kExitCells;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning with hints: semi-supervised NER and chunking coupled by a label constraint"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hints_version()));

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus and split it into CoNLL files");
  std::string synth_config, synth_out = "data";
  std::vector<std::size_t> sizes{1000, 100, 2000, 1000, 0};
  std::uint64_t synth_seed = 1;
  bool two_sided = false;
  synth->add_option("--config", synth_config, "generator config (key = value lines)");
  synth->add_option("--sizes", sizes, "d1,d2,unlab,test,dev sentence counts")->delimiter(',')->expected(5);
  synth->add_option("--seed", synth_seed, "split seed (the generator seed lives in the config)");
  synth->add_flag("--two-sided", two_sided, "strip y1 from the unlabeled split as well");
  synth->add_option("--out,--data-dir", synth_out, "output directory");

  // train
  auto* train = app.add_subcommand("train", "train on a data directory (or synthetic data) and save models");
  ExperimentFlags train_flags;
  add_experiment_flags(train, train_flags);

  // decode
  auto* decode = app.add_subcommand("decode", "label a CoNLL file with a saved model");
  std::string dec_model, dec_input, dec_columns = "token", dec_out_columns, dec_out = "-";
  bool dec_conf = false;
  decode->add_option("--model", dec_model, "model file")->required();
  decode->add_option("--input", dec_input, "CoNLL input")->required();
  decode->add_option("--columns", dec_columns, "input column layout, e.g. token or token,pos,chunk");
  decode->add_option("--output-columns", dec_out_columns, "output layout (default: input plus the predicted task)");
  decode->add_option("--out", dec_out, "output file ('-' for stdout)");
  decode->add_flag("--confidence", dec_conf, "print per-sentence confidence to stderr");

  // eval
  auto* eval = app.add_subcommand("eval", "score predictions; with --pred-b also run McNemar");
  std::string ev_gold, ev_pred, ev_pred_b, ev_columns = "token,pos,chunk,ner";
  int ev_task = 2;
  bool ev_per_token = false;
  eval->add_option("--gold", ev_gold, "gold CoNLL file")->required();
  eval->add_option("--pred", ev_pred, "predicted CoNLL file")->required();
  eval->add_option("--pred-b", ev_pred_b, "second system for McNemar");
  eval->add_option("--columns", ev_columns, "column layout shared by all files");
  eval->add_option("--task", ev_task, "1 = syntax (chunk F), 2 = entities");
  eval->add_flag("--per-token", ev_per_token, "McNemar over tokens instead of sentences");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "discrimination, weak usefulness, uncorrelation, bound checks");
  analyze->require_subcommand(1);
  auto* disc = analyze->add_subcommand("discrimination", "how often h0's output is compatible with gold y1");
  std::string an_pool, an_model, an_model2, an_constraint = "full", an_columns = "token,pos,chunk,ner", an_out = "-";
  disc->add_option("--pool", an_pool, "CoNLL pool with POS and chunk columns")->required();
  disc->add_option("--model", an_model, "task-2 model")->required();
  disc->add_option("--constraint", an_constraint, "full | pos-only | np-only | constant | rules file");
  disc->add_option("--columns", an_columns, "pool column layout");
  disc->add_option("--out", an_out, "report file");
  auto* useful = analyze->add_subcommand("usefulness", "empirical weak-usefulness check");
  double an_eps = 0.01, an_tol = 0.05;
  bool an_per_token = false, an_as_printed = false;
  useful->add_option("--model", an_model, "model")->required();
  useful->add_option("--reference", an_pool, "labeled CoNLL reference")->required();
  useful->add_option("--columns", an_columns, "reference column layout");
  useful->add_option("--epsilon", an_eps, "epsilon");
  useful->add_flag("--per-token", an_per_token, "per-token labels instead of whole sequences");
  useful->add_flag("--as-printed", an_as_printed, "off-diagonal form of the second condition");
  useful->add_option("--out", an_out, "report file");
  auto* uncor = analyze->add_subcommand("uncorrelated", "corpus-level association of two models' outputs");
  uncor->add_option("--model", an_model, "first model")->required();
  uncor->add_option("--model2", an_model2, "second model")->required();
  uncor->add_option("--pool", an_pool, "CoNLL pool")->required();
  uncor->add_option("--columns", an_columns, "pool column layout");
  uncor->add_option("--tolerance", an_tol, "maximum allowed deviation");
  uncor->add_option("--out", an_out, "report file");
  auto* bound = analyze->add_subcommand("bound", "verify the error bound on an enumerable instance");
  std::string an_instance;
  bound->add_option("--instance", an_instance, "instance file")->required();
  bound->add_flag("--as-printed", an_as_printed, "off-diagonal form of the usefulness premise");
  bound->add_option("--out", an_out, "report file");
  auto* hamming = analyze->add_subcommand("hamming", "Hamming-loss discrimination threshold 2V(|Y|-1)");
  double an_len = 1;
  std::size_t an_labels = 2;
  hamming->add_option("--mean-len", an_len, "mean sentence length")->required();
  hamming->add_option("--labels", an_labels, "labels per vertex")->required();

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run a grid of cells and write tables");
  ExperimentFlags exp_flags;
  add_experiment_flags(experiment, exp_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) {
      std::string cfg_text = synth_config.empty() ? std::string() : slurp(synth_config);
      std::size_t total = 0;
      for (auto s : sizes) total += s;
      hints_corpus* all = nullptr;
      check(hints_synth_generate(cfg_text.c_str(), total, &all));
      CorpusPtr corpus(all);
      hints_corpus* parts[5] = {};
      check(hints_synth_split(corpus.get(), sizes[0], sizes[1], sizes[2], sizes[3], sizes[4], synth_seed, two_sided,
                              parts));
      std::vector<CorpusPtr> owned;
      for (auto* p : parts) owned.emplace_back(p);
      std::error_code ec;
      std::filesystem::create_directories(synth_out, ec);
      const char* names[5] = {"d1", "d2", "unlab", "test", "dev"};
      const char* columns[5] = {"token,pos,chunk", "token,ner", two_sided ? "token" : "token,pos,chunk",
                                "token,pos,chunk,ner", "token,pos,chunk,ner"};
      for (int i = 0; i < 5; ++i) {
        if (hints_corpus_size(parts[i]) == 0) continue;
        const std::string path = synth_out + "/" + names[i] + ".conll";
        check(hints_corpus_write(parts[i], path.c_str(), columns[i]));
        std::cout << path << '\t' << hints_corpus_size(parts[i]) << '\n';
      }
      return 0;
    }
    if (*train) {
      json spec = experiment_json(train, train_flags);
      spec["save_models"] = true;
      if (!spec.contains("compare")) spec["compare"] = json::array();
      return run_experiment_spec(spec);
    }
    if (*experiment) return run_experiment_spec(experiment_json(experiment, exp_flags));
    if (*decode) {
      auto model = load_model(dec_model);
      auto input = read_corpus(dec_input, dec_columns, "test");
      // Task follows the model; try entity first, then syntax.
      hints_corpus* out = nullptr;
      double* conf = nullptr;
      hints_task task = HINTS_TASK_ENTITY;
      hints_status s = hints_model_decode(model.get(), input.get(), task, &out, dec_conf ? &conf : nullptr);
      if (s == HINTS_ERR_USAGE) {
        task = HINTS_TASK_SYNTAX;
        s = hints_model_decode(model.get(), input.get(), task, &out, dec_conf ? &conf : nullptr);
      }
      check(s);
      CorpusPtr result(out);
      std::string cols = dec_out_columns;
      if (cols.empty()) {
        cols = dec_columns;
        const bool has_syntax = cols.find("pos") != std::string::npos;
        const bool has_ner = cols.find("ner") != std::string::npos;
        if (task == HINTS_TASK_ENTITY && !has_ner) cols += ",ner";
        if (task == HINTS_TASK_SYNTAX && !has_syntax) cols += ",pos,chunk";
      }
      const std::string path = dec_out == "-" ? "/dev/stdout" : dec_out;
      check(hints_corpus_write(result.get(), path.c_str(), cols.c_str()));
      if (conf) {
        for (size_t i = 0; i < hints_corpus_size(result.get()); ++i) std::cerr << "confidence\t" << i + 1 << '\t' << conf[i] << '\n';
        hints_doubles_free(conf);
      }
      return 0;
    }
    if (*eval) {
      const hints_task task = task_of(ev_task);
      auto gold = read_corpus(ev_gold, ev_columns, "test");
      auto pred = read_corpus(ev_pred, ev_columns, "test");
      char* report = nullptr;
      check(hints_eval(gold.get(), pred.get(), task, &report, nullptr));
      emit(StringPtr(report), "-");
      if (!ev_pred_b.empty()) {
        auto pred_b = read_corpus(ev_pred_b, ev_columns, "test");
        char* mc = nullptr;
        check(hints_mcnemar(gold.get(), pred.get(), pred_b.get(), task, ev_per_token, &mc));
        emit(StringPtr(mc), "-");
      }
      return 0;
    }
    if (*disc) {
      auto pool = read_corpus(an_pool, an_columns, "test");
      auto model = load_model(an_model);
      char* report = nullptr;
      check(hints_analyze_discrimination(pool.get(), model.get(), an_constraint.c_str(), &report));
      emit(StringPtr(report), an_out);
      return 0;
    }
    if (*useful) {
      auto ref = read_corpus(an_pool, an_columns, "test");
      auto model = load_model(an_model);
      char* report = nullptr;
      int ok = 0;
      check(hints_analyze_usefulness(model.get(), ref.get(), an_eps, an_per_token, an_as_printed, &report, &ok));
      emit(StringPtr(report), an_out);
      return 0;
    }
    if (*uncor) {
      auto pool = read_corpus(an_pool, an_columns, "test");
      auto m1 = load_model(an_model);
      auto m2 = load_model(an_model2);
      char* report = nullptr;
      int ok = 0;
      check(hints_analyze_uncorrelated(m1.get(), m2.get(), pool.get(), an_tol, &report, &ok));
      emit(StringPtr(report), an_out);
      return 0;
    }
    if (*bound) {
      const std::string text = slurp(an_instance);
      char* report = nullptr;
      int holds = 0;
      check(hints_verify_bound(text.c_str(), an_as_printed, &report, &holds));
      emit(StringPtr(report), an_out);
      return 0;
    }
    if (*hamming) {
      const double v = hints_hamming_threshold(an_len, an_labels);
      if (v < 0) usage_error(hints_last_error());
      std::cout << v << '\n';
      return 0;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
