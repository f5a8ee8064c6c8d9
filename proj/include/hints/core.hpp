#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hints/error.hpp"

namespace hints {

// Task 1 is the syntactic task (composite POS|chunk labels), task 2 is NER.
enum class Task { Syntax = 1, Entity = 2 };

class LabelAlphabet {
 public:
  enum class Kind { Plain, Bio, Composite };

  LabelAlphabet(std::string task_name, std::vector<std::string> labels, Kind kind = Kind::Plain);

  // O plus B-/I- for every stem, in that order.
  static std::shared_ptr<const LabelAlphabet> bio(std::string task_name,
                                                  const std::vector<std::string>& stems);
  // Cartesian product "POS|CHUNK"; the chunk alphabet must be BIO.
  static std::shared_ptr<const LabelAlphabet> composite(const LabelAlphabet& pos,
                                                        const LabelAlphabet& chunk);

  // {O, B/I x PER ORG LOC MISC}: 9 labels.
  static std::shared_ptr<const LabelAlphabet> default_entity();
  static std::shared_ptr<const LabelAlphabet> default_chunk();
  static std::shared_ptr<const LabelAlphabet> default_pos();
  static std::shared_ptr<const LabelAlphabet> default_syntax();

  const std::string& task_name() const { return task_name_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  Kind kind() const { return kind_; }
  bool bio_scheme() const { return kind_ == Kind::Bio; }
  bool composite() const { return kind_ == Kind::Composite; }

  std::optional<std::size_t> index_of(std::string_view label) const;
  bool contains(std::string_view label) const { return index_of(label).has_value(); }

 private:
  std::string task_name_;
  std::vector<std::string> labels_;
  Kind kind_;
  std::unordered_map<std::string, std::size_t> index_;
};

using AlphabetPtr = std::shared_ptr<const LabelAlphabet>;

// BIO helpers over plain label strings.
bool is_outside(std::string_view label);
bool is_begin(std::string_view label);
bool is_inside(std::string_view label);
std::string_view bio_stem(std::string_view label);  // "" for O

// Composite task-1 labels are "POS|CHUNK"; split happens at the last '|'
// because some treebank POS tags contain one.
std::string make_composite(std::string_view pos, std::string_view chunk);
std::pair<std::string_view, std::string_view> split_composite(std::string_view label);

// Rewrites I-X that does not continue a B-X/I-X run to B-X. Returns the
// number of rewrites.
std::size_t repair_bio(std::vector<std::string>& labels);
bool bio_well_formed(std::span<const std::string> labels);

class Sentence {
 public:
  Sentence(std::string id, std::vector<std::string> tokens);

  const std::string& id() const { return id_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  friend bool operator==(const Sentence&, const Sentence&) = default;

 private:
  std::string id_;
  std::vector<std::string> tokens_;
};

class Labeling {
 public:
  // Validates membership and, for BIO and composite alphabets, span
  // well-formedness (the chunk half for composites).
  Labeling(AlphabetPtr alphabet, std::vector<std::string> labels);

  // Same as the constructor but repairs ill-formed BIO first.
  static Labeling repaired(AlphabetPtr alphabet, std::vector<std::string> labels,
                           std::size_t* repairs = nullptr);

  const AlphabetPtr& alphabet() const { return alphabet_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  const std::string& operator[](std::size_t i) const { return labels_[i]; }

  friend bool operator==(const Labeling& a, const Labeling& b) { return a.labels_ == b.labels_; }

 private:
  AlphabetPtr alphabet_;
  std::vector<std::string> labels_;
};

// Components of a composite labeling.
std::vector<std::string> pos_component(const Labeling& syntax);
std::vector<std::string> chunk_component(const Labeling& syntax);

struct Example {
  Sentence sentence;
  std::optional<Labeling> y1;
  std::optional<Labeling> y2;

  const std::optional<Labeling>& labels(Task task) const { return task == Task::Syntax ? y1 : y2; }
};

// A training instance borrowed from a corpus. `extra` is an optional
// per-token feature channel (used by the POS-feature baseline).
struct TrainingItem {
  const Sentence* sentence = nullptr;
  const Labeling* labels = nullptr;
  double weight = 1.0;
  const std::vector<std::string>* extra = nullptr;
};

// Items for every example of `corpus` carrying the task's labeling.
class Corpus;
std::vector<TrainingItem> training_items(const Corpus& corpus, Task task);

enum class Role { Labeled1, Labeled2, Unlabeled, Test };

std::string_view role_name(Role role);

// Throws Error(Contract) when the example's labelings violate the role or
// have the wrong length.
void check_role(const Example& example, Role role);

class Corpus {
 public:
  Corpus(Role role, AlphabetPtr syntax, AlphabetPtr entity);
  Corpus(Role role, AlphabetPtr syntax, AlphabetPtr entity, std::vector<Example> examples);

  Role role() const { return role_; }
  const AlphabetPtr& syntax_alphabet() const { return syntax_; }
  const AlphabetPtr& entity_alphabet() const { return entity_; }
  const AlphabetPtr& alphabet(Task task) const { return task == Task::Syntax ? syntax_ : entity_; }

  const std::vector<Example>& examples() const { return examples_; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  const Example& operator[](std::size_t i) const { return examples_[i]; }

  void add(Example example);

  // Copy of this corpus under another role with the given labelings dropped.
  Corpus with_role(Role role, bool keep_y1, bool keep_y2) const;

 private:
  Role role_;
  AlphabetPtr syntax_;
  AlphabetPtr entity_;
  std::vector<Example> examples_;
};

struct Span {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::string kind;

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

// Maximal B-X (I-X)* runs, left to right.
std::vector<Span> extract_spans(std::span<const std::string> bio_labels);
std::vector<Span> extract_spans(const Labeling& labeling);
std::vector<std::string> spans_to_bio(std::span<const Span> spans, std::size_t length);

// CoNLL column files.
enum class Column { Token, Pos, Chunk, Entity, Ignore };

struct ColumnSpec {
  std::vector<Column> columns;
  AlphabetPtr pos = LabelAlphabet::default_pos();
  AlphabetPtr chunk = LabelAlphabet::default_chunk();
  AlphabetPtr entity = LabelAlphabet::default_entity();

  // "token,pos,chunk,ner"; "_" skips a column.
  static ColumnSpec parse(std::string_view text);
  std::string to_string() const;

  bool has(Column c) const;
  bool has_syntax() const { return has(Column::Pos) && has(Column::Chunk); }
  bool has_entity() const { return has(Column::Entity); }
  AlphabetPtr syntax_alphabet() const;
};

struct ParseResult {
  Corpus corpus;
  std::size_t repairs = 0;
};

ParseResult parse_conll(std::string_view text, const ColumnSpec& spec, Role role);
std::string write_conll(const Corpus& corpus, const ColumnSpec& spec);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace hints
