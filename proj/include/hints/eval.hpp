#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hints/core.hpp"

namespace hints {

struct MetricReport {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::optional<double> accuracy;
  std::size_t gold_spans = 0;
  std::size_t predicted_spans = 0;
  std::size_t matched_spans = 0;
};

// Micro-averaged exact-match (start, end, type) span scores over BIO
// sequences. Precision with no predicted spans is 0, likewise recall with no
// gold spans.
MetricReport span_f1(std::span<const std::vector<std::string>> gold, std::span<const std::vector<std::string>> pred);

// Entity spans for task 2, chunk spans for task 1. Token accuracy is filled
// in as well.
MetricReport evaluate(const Corpus& gold, std::span<const Labeling> pred, Task task);

double token_accuracy(std::span<const std::vector<std::string>> gold, std::span<const std::vector<std::string>> pred);
// Composite labels count only when both halves match, unless pos_only.
double token_accuracy(const Corpus& gold, std::span<const Labeling> pred, Task task, bool pos_only = false);

enum class Verdict { WinA, WinB, Tie };
std::string_view verdict_name(Verdict v);

enum class McNemarUnit { Sentence, Token };

struct McNemarResult {
  std::size_t a_only = 0;  // b: A right, B wrong
  std::size_t b_only = 0;  // c: A wrong, B right
  double statistic = 0;    // chi-square statistic (continuity corrected); 0 on the exact branch
  double p_value = 1;
  bool exact = true;       // exact binomial branch used (b + c < 25)
  Verdict verdict = Verdict::Tie;
};

// Two-sided exact binomial p-value for b vs c discordant pairs under p = 1/2.
double binomial_two_sided_p(std::size_t b, std::size_t c);
McNemarResult mcnemar_from_counts(std::size_t b, std::size_t c, double alpha = 0.05);
// Units are whole sentences (exact match) by default.
McNemarResult mcnemar(std::span<const Labeling> a, std::span<const Labeling> b, const Corpus& gold, Task task,
                      McNemarUnit unit = McNemarUnit::Sentence, double alpha = 0.05);

struct WinTieLose {
  std::size_t win = 0, tie = 0, lose = 0;
  void add(Verdict v) { v == Verdict::WinA ? ++win : v == Verdict::WinB ? ++lose : ++tie; }
};

}  // namespace hints
