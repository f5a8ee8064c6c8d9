#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hints/constraints.hpp"
#include "hints/eval.hpp"
#include "hints/hmm.hpp"
#include "hints/perceptron.hpp"
#include "hints/synth.hpp"
#include "hints/training.hpp"

namespace hints {

enum class Mode { Baseline, PosFeature, SelfTrain, OneSidedHints, TwoSidedHints };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);

// Where cell data comes from: CoNLL files in a directory (d1, d2, unlab,
// test and optional dev, all "<name>.conll" with token,pos,chunk,ner
// columns) or the synthetic generator.
struct DataSpec {
  std::optional<std::string> data_dir;
  SynthConfig synth;
  std::size_t unlab = 2000;
  std::size_t test = 1000;
  std::size_t dev = 0;
};

struct ExperimentSpec {
  Mode mode = Mode::OneSidedHints;
  std::vector<Mode> compare{Mode::Baseline};  // paired McNemar partners
  std::string learner = "hmm";
  ConstraintKind constraint = ConstraintKind::Full;
  std::size_t n = 100;  // task-2 labeled size
  std::size_t m = 0;    // task-1 labeled size
  std::vector<std::size_t> sweep_n;
  std::vector<std::size_t> sweep_m;
  DataSpec data;
  TrainConfig train;
  HmmOptions hmm;
  PerceptronOptions perceptron;
  McNemarUnit mcnemar_unit = McNemarUnit::Sentence;
  bool save_models = false;
  std::string output_dir = "results";

  // Keys mirror the field names; "train" holds iterations, top_r,
  // pool_growth, confidence_filter, weighting and seed; "data" holds
  // data_dir, synth (key = value text or an object), unlab, test, dev.
  static ExperimentSpec from_json(std::string_view text);
  std::string to_json() const;
  void validate() const;
};

struct CellResult {
  std::string name;
  std::size_t n = 0, m = 0;
  bool ok = false;
  std::string error;
  MetricReport task2;
  std::optional<MetricReport> task1;
  MetricReport baseline2;
  std::vector<std::pair<Mode, McNemarResult>> comparisons;
};

struct ExperimentReport {
  std::vector<CellResult> cells;
  std::size_t failures() const;
};

// Runs every (n, m) cell, writing per-cell files under output_dir plus
// index.tsv, wtl.tsv and manifest.json. Cell failures are recorded and the
// run continues.
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace hints
