#include "hints/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hints {

namespace {

constexpr std::string_view kFullRules = R"(# NNP / NP rule set
NNP,NNPS  B-NP  B-*
NNP,NNPS  I-NP  B-*,I-*
NNP,NNPS  *     *
*         B-NP  B-*,O
*         I-NP  B-*,I-*,O
*         *     O
)";

constexpr std::string_view kPosOnlyRules = R"(# every NNP inside an NP is part of an entity
NNP,NNPS  B-NP,I-NP  B-*,I-*
*         *          *
)";

constexpr std::string_view kNpOnlyRules = R"(# entities are subsequences of NPs
*         B-NP  B-*,O
*         I-NP  B-*,I-*,O
NNP,NNPS  *     *
*         *     O
)";

constexpr std::string_view kConstantRules = R"(# constant 1
*  *  *
)";

std::vector<std::string> split_list(std::string_view field) {
  if (field == "*") return {};
  if (field == ",") return {","};
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto comma = field.find(',', pos);
    auto item = field.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (item.empty()) throw_usage("empty entry in constraint pattern '" + std::string(field) + "'");
    out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

bool matches(const std::vector<std::string>& pattern, std::string_view value) {
  return pattern.empty() || std::find(pattern.begin(), pattern.end(), value) != pattern.end();
}

bool admits(const std::vector<std::string>& allowed, std::string_view entity) {
  if (allowed.empty()) return true;
  for (const auto& a : allowed) {
    if (a == entity) return true;
    if (a == "B-*" && is_begin(entity)) return true;
    if (a == "I-*" && is_inside(entity)) return true;
  }
  return false;
}

std::string join(const std::vector<std::string>& v) {
  if (v.empty()) return "*";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += v[i];
  }
  return out;
}

}  // namespace

std::string_view constraint_name(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::Full: return "full";
    case ConstraintKind::PosOnly: return "pos-only";
    case ConstraintKind::NpOnly: return "np-only";
    case ConstraintKind::Constant: return "constant";
  }
  return "?";
}

ConstraintKind parse_constraint_kind(std::string_view name) {
  for (auto k : {ConstraintKind::Full, ConstraintKind::PosOnly, ConstraintKind::NpOnly, ConstraintKind::Constant})
    if (constraint_name(k) == name) return k;
  throw_usage("unknown constraint '" + std::string(name) + "' (expected full, pos-only, np-only or constant)");
}

ConstraintFunction ConstraintFunction::make(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::Full: return from_rules("full", kFullRules);
    case ConstraintKind::PosOnly: return from_rules("pos-only", kPosOnlyRules);
    case ConstraintKind::NpOnly: return from_rules("np-only", kNpOnlyRules);
    case ConstraintKind::Constant: return from_rules("constant", kConstantRules);
  }
  throw_contract("bad constraint kind");
}

ConstraintFunction ConstraintFunction::from_rules(std::string name, std::string_view text) {
  std::vector<ConstraintRule> rules;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string pos, chunk, allowed, extra;
    if (!(fields >> pos)) continue;
    if (!(fields >> chunk >> allowed) || (fields >> extra))
      throw_usage("rules line " + std::to_string(line_no) + ": expected <pos> <chunk> <allowed>");
    rules.push_back(ConstraintRule{split_list(pos), split_list(chunk), split_list(allowed)});
  }
  if (rules.empty()) throw_usage("constraint '" + name + "' has no rules");
  return ConstraintFunction(std::move(name), std::move(rules));
}

std::string ConstraintFunction::rules_text() const {
  std::string out;
  for (const auto& r : rules_) out += join(r.pos) + ' ' + join(r.chunk) + ' ' + join(r.allowed) + '\n';
  return out;
}

bool ConstraintFunction::allows(std::string_view pos, std::string_view chunk, std::string_view entity) const {
  for (const auto& r : rules_)
    if (matches(r.pos, pos) && matches(r.chunk, chunk)) return admits(r.allowed, entity);
  return false;
}

bool ConstraintFunction::trivial() const {
  const auto& r = rules_.front();
  return r.pos.empty() && r.chunk.empty() && r.allowed.empty();
}

bool ConstraintFunction::operator()(const Labeling& y1, const Labeling& y2) const {
  if (y1.size() != y2.size())
    throw_contract("constraint: y1 has " + std::to_string(y1.size()) + " labels, y2 has " +
                   std::to_string(y2.size()));
  if (!y1.alphabet()->composite()) throw_contract("constraint: y1 must use POS|chunk labels");
  for (std::size_t i = 0; i < y1.size(); ++i) {
    auto [pos, chunk] = split_composite(y1[i]);
    if (!allows(pos, chunk, y2[i])) return false;
  }
  return true;
}

bool check_full(const Labeling& y1, const Labeling& y2) {
  static const ConstraintFunction full = ConstraintFunction::make(ConstraintKind::Full);
  return full(y1, y2);
}

std::size_t count_compatible(const Labeling& y1, const AlphabetPtr& alphabet, const ConstraintFunction& chi) {
  if (!alphabet->bio_scheme()) throw_contract("count_compatible needs a BIO entity alphabet");
  const std::size_t n = y1.size(), k = alphabet->size();
  if (static_cast<double>(n) * std::log10(static_cast<double>(k)) > 6.0 + 1e-12)
    throw_usage("count_compatible: " + std::to_string(k) + "^" + std::to_string(n) + " exceeds the 10^6 guard");
  const auto& labels = alphabet->labels();
  std::vector<std::string> seq(n);
  std::size_t count = 0;
  // Depth-first over well-formed prefixes; chi is evaluated on whole sequences.
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      if (chi(y1, Labeling(alphabet, seq))) ++count;
      return;
    }
    for (const auto& l : labels) {
      if (is_inside(l) && (i == 0 || is_outside(seq[i - 1]) || bio_stem(seq[i - 1]) != bio_stem(l))) continue;
      seq[i] = l;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
  return count;
}

}  // namespace hints
