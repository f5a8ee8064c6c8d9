#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hints/core.hpp"

namespace hints {

enum class ConstraintKind { Full, PosOnly, NpOnly, Constant };

std::string_view constraint_name(ConstraintKind kind);
ConstraintKind parse_constraint_kind(std::string_view name);

// One line of a rules file: a (POS, chunk) pattern and the entity labels it
// admits. Empty pattern lists are wildcards. Allowed entries are "O",
// "B-*", "I-*", "*" or an exact label.
struct ConstraintRule {
  std::vector<std::string> pos;
  std::vector<std::string> chunk;
  std::vector<std::string> allowed;
};

// chi(y1, y2) over aligned syntactic (POS|chunk) and entity labelings. The
// decision is a conjunction of per-position checks: at each position the
// first rule whose patterns match decides which entity labels are allowed;
// a position no rule matches is rejected.
//
// Rules file format, one rule per line, '#' starts a comment:
//   <pos-pattern> <chunk-pattern> <allowed>
// where each field is "*" or a comma-separated list (a lone "," is the comma
// POS tag).
class ConstraintFunction {
 public:
  static ConstraintFunction make(ConstraintKind kind);
  static ConstraintFunction from_rules(std::string name, std::string_view rules_text);

  const std::string& name() const { return name_; }
  const std::vector<ConstraintRule>& rules() const { return rules_; }
  std::string rules_text() const;

  bool allows(std::string_view pos, std::string_view chunk, std::string_view entity) const;
  // True when the first rule matches everything and admits everything.
  bool trivial() const;

  // Throws Error(Contract) on length mismatch or a non-composite y1.
  bool operator()(const Labeling& y1, const Labeling& y2) const;

 private:
  ConstraintFunction(std::string name, std::vector<ConstraintRule> rules)
      : name_(std::move(name)), rules_(std::move(rules)) {}

  std::string name_;
  std::vector<ConstraintRule> rules_;
};

// The full NNP / NP rule set.
bool check_full(const Labeling& y1, const Labeling& y2);

// Number of well-formed entity labelings y2 with chi(y1, y2) = 1, by
// enumerating every well-formed sequence. Refuses when |labels|^n > 10^6.
std::size_t count_compatible(const Labeling& y1, const AlphabetPtr& entity_alphabet,
                             const ConstraintFunction& chi);

}  // namespace hints
