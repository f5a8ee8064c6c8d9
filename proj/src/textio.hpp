#pragma once

// Helpers shared by the model text formats.

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hints/core.hpp"

namespace hints::textio {


inline void put_row(std::ostringstream& out, const double* p, std::size_t n) {
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", p[i]);
    if (i) out << ' ';
    out << buf;
  }
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::string_view line() {
    if (pos_ >= text_.size()) throw_data("model file truncated");
    auto nl = text_.find('\n', pos_);
    auto out = text_.substr(pos_, nl == std::string_view::npos ? std::string_view::npos : nl - pos_);
    pos_ = nl == std::string_view::npos ? text_.size() : nl + 1;
    ++line_no_;
    return out;
  }

  // "key value..." line; returns the remainder after "key ".
  std::string_view keyed(std::string_view key) {
    auto l = line();
    if (!l.starts_with(key) || (l.size() > key.size() && l[key.size()] != ' '))
      fail("expected '" + std::string(key) + "'");
    return l.size() > key.size() ? l.substr(key.size() + 1) : std::string_view{};
  }

  std::size_t count(std::string_view key) { return std::stoul(std::string(keyed(key))); }

  std::vector<double> row(std::size_t n) {
    std::string l(line());
    std::vector<double> out;
    out.reserve(n);
    const char* p = l.c_str();
    char* end = nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      double v = std::strtod(p, &end);
      if (end == p) fail("expected " + std::to_string(n) + " numbers");
      out.push_back(v);
      p = end;
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw_data("model line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

inline std::string serialize_alphabet(const LabelAlphabet& a) {
  std::ostringstream out;
  const char* kind = a.bio_scheme() ? "bio" : a.composite() ? "composite" : "plain";
  out << "alphabet " << a.task_name() << ' ' << kind << ' ' << a.size() << '\n';
  for (const auto& l : a.labels()) out << l << '\n';
  return out.str();
}

inline AlphabetPtr deserialize_alphabet(std::string_view header, const std::function<std::string_view()>& next_line) {
  std::istringstream hs{std::string(header)};
  std::string name, kind;
  std::size_t n = 0;
  if (!(hs >> name >> kind >> n)) throw_data("bad alphabet header");
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.emplace_back(next_line());
  LabelAlphabet::Kind k = kind == "bio" ? LabelAlphabet::Kind::Bio
                          : kind == "composite" ? LabelAlphabet::Kind::Composite
                                                : LabelAlphabet::Kind::Plain;
  for (const auto& known : {LabelAlphabet::default_entity(), LabelAlphabet::default_syntax()})
    if (known->task_name() == name && known->kind() == k && known->labels() == labels) return known;
  return std::make_shared<const LabelAlphabet>(name, std::move(labels), k);
}

}  // namespace hints::textio
