#include "hints/core.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace hints {

LabelAlphabet::LabelAlphabet(std::string task_name, std::vector<std::string> labels, Kind kind)
    : task_name_(std::move(task_name)), labels_(std::move(labels)), kind_(kind) {
  if (labels_.size() < 2) throw_usage("alphabet '" + task_name_ + "' needs at least two labels");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const std::string& l = labels_[i];
    if (l.empty()) throw_usage("alphabet '" + task_name_ + "' contains an empty label");
    if (!index_.emplace(l, i).second)
      throw_usage("alphabet '" + task_name_ + "' repeats label '" + l + "'");
    if (kind_ == Kind::Bio && !is_outside(l) && !(is_begin(l) || is_inside(l)))
      throw_usage("label '" + l + "' is not of the form O, B-X or I-X");
  }
  if (kind_ == Kind::Bio && !index_.contains("O"))
    throw_usage("BIO alphabet '" + task_name_ + "' lacks O");
}

std::shared_ptr<const LabelAlphabet> LabelAlphabet::bio(std::string task_name,
                                                        const std::vector<std::string>& stems) {
  std::vector<std::string> labels{"O"};
  for (const auto& s : stems) {
    labels.push_back("B-" + s);
    labels.push_back("I-" + s);
  }
  return std::make_shared<const LabelAlphabet>(std::move(task_name), std::move(labels), Kind::Bio);
}

std::shared_ptr<const LabelAlphabet> LabelAlphabet::composite(const LabelAlphabet& pos,
                                                              const LabelAlphabet& chunk) {
  if (!chunk.bio_scheme()) throw_usage("composite alphabet needs a BIO chunk alphabet");
  std::vector<std::string> labels;
  labels.reserve(pos.size() * chunk.size());
  for (const auto& p : pos.labels())
    for (const auto& c : chunk.labels()) labels.push_back(make_composite(p, c));
  return std::make_shared<const LabelAlphabet>("syntax", std::move(labels), Kind::Composite);
}

std::shared_ptr<const LabelAlphabet> LabelAlphabet::default_entity() {
  static const auto alphabet = bio("ner", {"PER", "ORG", "LOC", "MISC"});
  return alphabet;
}

std::shared_ptr<const LabelAlphabet> LabelAlphabet::default_chunk() {
  static const auto alphabet = bio(
      "chunk", {"NP", "VP", "PP", "ADJP", "ADVP", "SBAR", "PRT", "CONJP", "INTJ", "LST", "UCP"});
  return alphabet;
}

std::shared_ptr<const LabelAlphabet> LabelAlphabet::default_pos() {
  // Penn Treebank tag set plus the NN|SYM tag found in CoNLL-2003.
  static const auto alphabet = std::make_shared<const LabelAlphabet>(
      "pos",
      std::vector<std::string>{
          "CC",  "CD",  "DT",   "EX",  "FW",  "IN",  "JJ",  "JJR",   "JJS",   "LS",     "MD",
          "NN",  "NNS", "NNP",  "NNPS", "PDT", "POS", "PRP", "PRP$", "RB",    "RBR",    "RBS",
          "RP",  "SYM", "TO",   "UH",  "VB",  "VBD", "VBG", "VBN",   "VBP",   "VBZ",    "WDT",
          "WP",  "WP$", "WRB",  "#",   "$",   "''",  "``",  "(",     ")",     ",",      ".",
          ":",   "-LRB-", "-RRB-", "NN|SYM"},
      Kind::Plain);
  return alphabet;
}

std::shared_ptr<const LabelAlphabet> LabelAlphabet::default_syntax() {
  static const auto alphabet = composite(*default_pos(), *default_chunk());
  return alphabet;
}

std::optional<std::size_t> LabelAlphabet::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool is_outside(std::string_view label) { return label == "O"; }
bool is_begin(std::string_view label) { return label.size() > 2 && label.starts_with("B-"); }
bool is_inside(std::string_view label) { return label.size() > 2 && label.starts_with("I-"); }

std::string_view bio_stem(std::string_view label) {
  if (is_begin(label) || is_inside(label)) return label.substr(2);
  return {};
}

std::string make_composite(std::string_view pos, std::string_view chunk) {
  std::string out;
  out.reserve(pos.size() + chunk.size() + 1);
  out.append(pos).push_back('|');
  out.append(chunk);
  return out;
}

std::pair<std::string_view, std::string_view> split_composite(std::string_view label) {
  auto bar = label.rfind('|');
  if (bar == std::string_view::npos) throw_contract("'" + std::string(label) + "' is not a POS|CHUNK label");
  return {label.substr(0, bar), label.substr(bar + 1)};
}

std::size_t repair_bio(std::vector<std::string>& labels) {
  std::size_t repairs = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!is_inside(labels[i])) continue;
    auto stem = bio_stem(labels[i]);
    bool continues = i > 0 && !is_outside(labels[i - 1]) && bio_stem(labels[i - 1]) == stem;
    if (!continues) {
      labels[i][0] = 'B';
      ++repairs;
    }
  }
  return repairs;
}

bool bio_well_formed(std::span<const std::string> labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!is_inside(labels[i])) continue;
    if (i == 0 || is_outside(labels[i - 1]) || bio_stem(labels[i - 1]) != bio_stem(labels[i]))
      return false;
  }
  return true;
}

Sentence::Sentence(std::string id, std::vector<std::string> tokens)
    : id_(std::move(id)), tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw_contract("sentence '" + id_ + "' has no tokens");
  for (const auto& t : tokens_) {
    if (t.empty()) throw_contract("sentence '" + id_ + "' has an empty token");
    if (t.find_first_of("\t\n\r") != std::string::npos)
      throw_contract("sentence '" + id_ + "' has a token with tab or newline");
  }
}

namespace {

std::size_t repair_composite(std::vector<std::string>& labels) {
  std::vector<std::string> chunks;
  chunks.reserve(labels.size());
  for (const auto& l : labels) chunks.emplace_back(split_composite(l).second);
  std::size_t repairs = repair_bio(chunks);
  if (repairs == 0) return 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = make_composite(split_composite(labels[i]).first, chunks[i]);
  return repairs;
}

}  // namespace

Labeling::Labeling(AlphabetPtr alphabet, std::vector<std::string> labels)
    : alphabet_(std::move(alphabet)), labels_(std::move(labels)) {
  if (!alphabet_) throw_contract("labeling without alphabet");
  for (const auto& l : labels_)
    if (!alphabet_->contains(l))
      throw_contract("label '" + l + "' is not in alphabet '" + alphabet_->task_name() + "'");
  if (alphabet_->bio_scheme() && !bio_well_formed(labels_))
    throw_contract("ill-formed BIO labeling");
  if (alphabet_->composite() && !bio_well_formed(chunk_component(*this)))
    throw_contract("ill-formed chunk labeling");
}

Labeling Labeling::repaired(AlphabetPtr alphabet, std::vector<std::string> labels,
                            std::size_t* repairs) {
  std::size_t n = 0;
  if (alphabet && alphabet->bio_scheme()) n = repair_bio(labels);
  if (alphabet && alphabet->composite()) n = repair_composite(labels);
  if (repairs) *repairs = n;
  return Labeling(std::move(alphabet), std::move(labels));
}

std::vector<std::string> pos_component(const Labeling& syntax) {
  std::vector<std::string> out;
  out.reserve(syntax.size());
  for (const auto& l : syntax.labels()) out.emplace_back(split_composite(l).first);
  return out;
}

std::vector<std::string> chunk_component(const Labeling& syntax) {
  std::vector<std::string> out;
  out.reserve(syntax.size());
  for (const auto& l : syntax.labels()) out.emplace_back(split_composite(l).second);
  return out;
}

std::string_view role_name(Role role) {
  switch (role) {
    case Role::Labeled1: return "labeled-1";
    case Role::Labeled2: return "labeled-2";
    case Role::Unlabeled: return "unlabeled";
    case Role::Test: return "test";
  }
  return "?";
}

void check_role(const Example& ex, Role role) {
  const auto& id = ex.sentence.id();
  for (const auto* y : {&ex.y1, &ex.y2})
    if (*y && (*y)->size() != ex.sentence.size())
      throw_contract("example '" + id + "': labeling length differs from sentence length");
  switch (role) {
    case Role::Labeled1:
      if (!ex.y1) throw_contract("example '" + id + "' in a labeled-1 corpus lacks y1");
      break;
    case Role::Labeled2:
      if (!ex.y2) throw_contract("example '" + id + "' in a labeled-2 corpus lacks y2");
      break;
    case Role::Unlabeled:
      if (ex.y2) throw_contract("example '" + id + "' in an unlabeled corpus carries y2");
      break;
    case Role::Test:
      if (!ex.y1 && !ex.y2) throw_contract("example '" + id + "' in a test corpus has no labels");
      break;
  }
}

Corpus::Corpus(Role role, AlphabetPtr syntax, AlphabetPtr entity)
    : role_(role), syntax_(std::move(syntax)), entity_(std::move(entity)) {}

Corpus::Corpus(Role role, AlphabetPtr syntax, AlphabetPtr entity, std::vector<Example> examples)
    : Corpus(role, std::move(syntax), std::move(entity)) {
  examples_.reserve(examples.size());
  for (auto& ex : examples) add(std::move(ex));
}

void Corpus::add(Example example) {
  check_role(example, role_);
  if (example.y1 && syntax_ && example.y1->alphabet() != syntax_ &&
      example.y1->alphabet()->labels() != syntax_->labels())
    throw_contract("example '" + example.sentence.id() + "': y1 uses a foreign alphabet");
  if (example.y2 && entity_ && example.y2->alphabet() != entity_ &&
      example.y2->alphabet()->labels() != entity_->labels())
    throw_contract("example '" + example.sentence.id() + "': y2 uses a foreign alphabet");
  examples_.push_back(std::move(example));
}

Corpus Corpus::with_role(Role role, bool keep_y1, bool keep_y2) const {
  Corpus out(role, syntax_, entity_);
  out.examples_.reserve(examples_.size());
  for (const auto& ex : examples_) {
    Example copy{ex.sentence, keep_y1 ? ex.y1 : std::nullopt, keep_y2 ? ex.y2 : std::nullopt};
    out.add(std::move(copy));
  }
  return out;
}

std::vector<TrainingItem> training_items(const Corpus& corpus, Task task) {
  std::vector<TrainingItem> items;
  items.reserve(corpus.size());
  for (const auto& ex : corpus.examples()) {
    const auto& y = ex.labels(task);
    if (y) items.push_back(TrainingItem{&ex.sentence, &*y, 1.0, nullptr});
  }
  return items;
}

std::vector<Span> extract_spans(std::span<const std::string> labels) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < labels.size()) {
    const std::string& l = labels[i];
    if (is_outside(l)) {
      ++i;
      continue;
    }
    if (!is_begin(l) && !is_inside(l))
      throw_contract("extract_spans: '" + l + "' is not a BIO label");
    // An I-X opening a run is treated like B-X; well-formed input never has it.
    auto stem = bio_stem(l);
    std::size_t j = i + 1;
    while (j < labels.size() && is_inside(labels[j]) && bio_stem(labels[j]) == stem) ++j;
    spans.push_back(Span{i, j, std::string(stem)});
    i = j;
  }
  return spans;
}

std::vector<Span> extract_spans(const Labeling& labeling) {
  if (!labeling.alphabet()->bio_scheme())
    throw_contract("extract_spans needs a BIO alphabet, got '" + labeling.alphabet()->task_name() + "'");
  return extract_spans(std::span<const std::string>(labeling.labels()));
}

std::vector<std::string> spans_to_bio(std::span<const Span> spans, std::size_t length) {
  std::vector<std::string> out(length, "O");
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > length) throw_contract("span out of range");
    out[s.start] = "B-" + s.kind;
    for (std::size_t i = s.start + 1; i < s.end; ++i) out[i] = "I-" + s.kind;
  }
  return out;
}

ColumnSpec ColumnSpec::parse(std::string_view text) {
  ColumnSpec spec;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    auto name = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (name == "token" || name == "word") spec.columns.push_back(Column::Token);
    else if (name == "pos") spec.columns.push_back(Column::Pos);
    else if (name == "chunk") spec.columns.push_back(Column::Chunk);
    else if (name == "ner" || name == "entity") spec.columns.push_back(Column::Entity);
    else if (name == "_") spec.columns.push_back(Column::Ignore);
    else throw_usage("unknown column '" + std::string(name) + "'");
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (std::count(spec.columns.begin(), spec.columns.end(), Column::Token) != 1)
    throw_usage("column spec needs exactly one token column");
  for (Column c : {Column::Pos, Column::Chunk, Column::Entity})
    if (std::count(spec.columns.begin(), spec.columns.end(), c) > 1)
      throw_usage("column spec repeats a column");
  if (spec.has(Column::Pos) != spec.has(Column::Chunk))
    throw_usage("pos and chunk columns come as a pair");
  return spec;
}

std::string ColumnSpec::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    switch (columns[i]) {
      case Column::Token: out += "token"; break;
      case Column::Pos: out += "pos"; break;
      case Column::Chunk: out += "chunk"; break;
      case Column::Entity: out += "ner"; break;
      case Column::Ignore: out += "_"; break;
    }
  }
  return out;
}

bool ColumnSpec::has(Column c) const {
  return std::find(columns.begin(), columns.end(), c) != columns.end();
}

AlphabetPtr ColumnSpec::syntax_alphabet() const {
  if (pos == LabelAlphabet::default_pos() && chunk == LabelAlphabet::default_chunk())
    return LabelAlphabet::default_syntax();
  return LabelAlphabet::composite(*pos, *chunk);
}

namespace {

struct Block {
  std::size_t first_line = 0;
  std::vector<std::size_t> lines;
  std::vector<std::vector<std::string_view>> rows;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

Labeling build_labeling(const AlphabetPtr& alphabet, std::vector<std::string> labels,
                        const std::vector<std::size_t>& lines, std::size_t& repairs) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (alphabet->contains(labels[i])) continue;
    // I-X outside the alphabet is unknown even after repair, so report it here.
    throw_data(at_line(lines[i]) + "unknown label '" + labels[i] + "' for " + alphabet->task_name());
  }
  std::size_t n = 0;
  Labeling out = Labeling::repaired(alphabet, std::move(labels), &n);
  repairs += n;
  return out;
}

}  // namespace

ParseResult parse_conll(std::string_view text, const ColumnSpec& spec, Role role) {
  const AlphabetPtr syntax = spec.has_syntax() ? spec.syntax_alphabet() : nullptr;
  const AlphabetPtr entity = spec.has_entity() ? spec.entity : nullptr;
  ParseResult result{Corpus(role, syntax ? syntax : spec.syntax_alphabet(), spec.entity), 0};

  std::vector<Block> blocks;
  Block current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto flush = [&] {
    if (!current.rows.empty()) blocks.push_back(std::move(current));
    current = Block{};
  };
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto fields = split_ws(line);
    if (fields.empty()) {
      flush();
      continue;
    }
    if (fields[0] == "-DOCSTART-") continue;
    if (fields.size() != spec.columns.size())
      throw_data(at_line(line_no) + "expected " + std::to_string(spec.columns.size()) +
                 " columns, found " + std::to_string(fields.size()));
    if (current.rows.empty()) current.first_line = line_no;
    current.lines.push_back(line_no);
    current.rows.push_back(std::move(fields));
  }
  flush();

  std::size_t sentence_index = 0;
  for (const auto& block : blocks) {
    std::vector<std::string> tokens, pos_tags, chunks, ner;
    for (const auto& row : block.rows) {
      for (std::size_t c = 0; c < spec.columns.size(); ++c) {
        std::string v(row[c]);
        switch (spec.columns[c]) {
          case Column::Token: tokens.push_back(std::move(v)); break;
          case Column::Pos: pos_tags.push_back(std::move(v)); break;
          case Column::Chunk: chunks.push_back(std::move(v)); break;
          case Column::Entity: ner.push_back(std::move(v)); break;
          case Column::Ignore: break;
        }
      }
    }
    Example ex{Sentence("s" + std::to_string(++sentence_index), std::move(tokens)), std::nullopt,
               std::nullopt};
    if (syntax) {
      for (std::size_t i = 0; i < pos_tags.size(); ++i) {
        if (!spec.pos->contains(pos_tags[i]))
          throw_data(at_line(block.lines[i]) + "unknown POS tag '" + pos_tags[i] + "'");
        if (!spec.chunk->contains(chunks[i]))
          throw_data(at_line(block.lines[i]) + "unknown chunk label '" + chunks[i] + "'");
      }
      result.repairs += repair_bio(chunks);
      std::vector<std::string> composite;
      composite.reserve(pos_tags.size());
      for (std::size_t i = 0; i < pos_tags.size(); ++i)
        composite.push_back(make_composite(pos_tags[i], chunks[i]));
      ex.y1 = build_labeling(syntax, std::move(composite), block.lines, result.repairs);
    }
    if (entity) ex.y2 = build_labeling(entity, std::move(ner), block.lines, result.repairs);
    try {
      result.corpus.add(std::move(ex));
    } catch (const Error& e) {
      throw_data(at_line(block.first_line) + e.what());
    }
  }
  return result;
}

std::string write_conll(const Corpus& corpus, const ColumnSpec& spec) {
  std::string out;
  bool first = true;
  for (const auto& ex : corpus.examples()) {
    const bool need_syntax = spec.has_syntax();
    if (need_syntax && !ex.y1)
      throw_data("example '" + ex.sentence.id() + "' has no syntactic labeling to write");
    if (spec.has_entity() && !ex.y2)
      throw_data("example '" + ex.sentence.id() + "' has no entity labeling to write");
    if (!first) out += '\n';
    first = false;
    for (std::size_t i = 0; i < ex.sentence.size(); ++i) {
      for (std::size_t c = 0; c < spec.columns.size(); ++c) {
        if (c) out += ' ';
        switch (spec.columns[c]) {
          case Column::Token: out += ex.sentence[i]; break;
          case Column::Pos: out += split_composite((*ex.y1)[i]).first; break;
          case Column::Chunk: out += split_composite((*ex.y1)[i]).second; break;
          case Column::Entity: out += (*ex.y2)[i]; break;
          case Column::Ignore: out += '_'; break;
        }
      }
      out += '\n';
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw_data("short write to '" + path + "'");
}

}  // namespace hints
