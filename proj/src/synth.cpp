#include "hints/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hints/rng.hpp"

namespace hints {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ull ^ (seed * 0x9E3779B97F4A7C15ull);
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// Pronounceable surface form for vocabulary index i.
std::string surface(std::size_t i) {
  static constexpr std::string_view consonants = "bdfgklmnprstvz";
  static constexpr std::string_view vowels = "aeiou";
  const std::size_t base = consonants.size() * vowels.size();
  std::string out;
  do {
    std::size_t syl = i % base;
    out += consonants[syl / vowels.size()];
    out += vowels[syl % vowels.size()];
    i /= base;
  } while (i > 0);
  return out;
}

std::size_t support_size(std::string_view pos, bool entity) {
  if (entity) return pos == "NNP" ? 400 : 150;
  static const std::map<std::string_view, std::size_t> sizes{
      {"DT", 6},   {"IN", 12},  {"CC", 3},   {"MD", 5},   {"PRP", 8},  {"CD", 200}, {"RB", 60},
      {"VBD", 300}, {"VBZ", 300}, {"JJ", 400}, {"NN", 800}, {"NNS", 500}, {"NNP", 200}};
  auto it = sizes.find(pos);
  return it == sizes.end() ? 50 : it->second;
}

class Lexicon {
 public:
  explicit Lexicon(const SynthConfig& cfg) : cfg_(cfg) {}

  std::string word(Rng& rng, std::string_view pos, std::string_view type) {
    if (pos == "," || pos == ".") return std::string(pos);
    if (pos == "TO") return "to";
    const std::string key = std::string(pos) + '/' + std::string(type);
    auto it = dists_.find(key);
    if (it == dists_.end()) it = dists_.emplace(key, build(key, pos, !type.empty())).first;
    const Dist& d = it->second;
    return surface(d.support[rng.categorical(d.weights)]);
  }

 private:
  struct Dist {
    std::vector<std::size_t> support;
    std::vector<double> weights;
  };

  // Each (POS, type) draws its own random support with Zipf weights; the
  // seed depends only on the key, so build order does not matter.
  Dist build(const std::string& key, std::string_view pos, bool entity) const {
    Rng rng(fnv1a(key, cfg_.seed));
    std::vector<std::size_t> ids(cfg_.vocab_size);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    rng.shuffle(ids);
    const std::size_t n = std::min(cfg_.vocab_size, support_size(pos, entity));
    Dist d;
    d.support.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t r = 0; r < n; ++r)
      d.weights.push_back(std::pow(static_cast<double>(r + 1), -cfg_.emission_concentration));
    return d;
  }

  const SynthConfig& cfg_;
  std::map<std::string, Dist> dists_;
};

struct Token {
  std::string pos, chunk, entity, type;
};

void add_np(Rng& rng, const SynthConfig& cfg, std::size_t len, std::vector<Token>& out) {
  std::vector<Token> np(len);
  for (std::size_t i = 0; i < len; ++i) {
    np[i].chunk = i == 0 ? "B-NP" : "I-NP";
    np[i].entity = "O";
  }
  const bool det = len >= 2 && rng.bernoulli(0.4);
  if (det) np[0].pos = "DT";
  std::size_t ent_start = len, ent_end = len;
  if (!cfg.entity_types.empty() && rng.bernoulli(cfg.entity_in_np_rate)) {
    ent_start = det ? 1 : 0;
    if (len - ent_start >= 2 && rng.bernoulli(0.2)) ent_end = len - 1;
    const std::string& type = cfg.entity_types[rng.below(cfg.entity_types.size())];
    for (std::size_t i = ent_start; i < ent_end; ++i) {
      np[i].entity = (i == ent_start ? "B-" : "I-") + type;
      np[i].type = type;
      np[i].pos = rng.bernoulli(cfg.nnp_in_np_rate) ? "NNP" : (rng.bernoulli(0.7) ? "NN" : "CD");
    }
  }
  for (std::size_t i = 0; i < len; ++i) {
    if (!np[i].pos.empty()) continue;
    if (len == 1 && rng.bernoulli(0.25)) {
      np[i].pos = "PRP";
    } else if (i + 1 == len || (i + 1 == ent_start)) {
      np[i].pos = rng.bernoulli(0.65) ? "NN" : "NNS";
    } else {
      double u = rng.uniform01();
      np[i].pos = u < 0.6 ? "JJ" : u < 0.8 ? "CD" : "NN";
    }
  }
  out.insert(out.end(), np.begin(), np.end());
}

void add_other(Rng& rng, std::string_view kind, std::size_t len, std::vector<Token>& out) {
  for (std::size_t i = 0; i < len; ++i) {
    Token t;
    t.entity = "O";
    if (kind == "O") {
      t.chunk = "O";
      t.pos = rng.bernoulli(0.6) ? "," : "CC";
    } else {
      t.chunk = (i == 0 ? "B-" : "I-") + std::string(kind);
      if (kind == "VP") {
        if (len == 2 && i == 0) t.pos = rng.bernoulli(0.5) ? "MD" : "RB";
        else t.pos = rng.bernoulli(0.5) ? "VBD" : "VBZ";
      } else if (kind == "PP") {
        t.pos = rng.bernoulli(0.1) ? "TO" : "IN";
      } else {
        t.pos = "RB";
      }
    }
    out.push_back(std::move(t));
  }
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw_usage("synth config: '" + key + "' expects a number, got '" + value + "'");
  return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos)
    throw_usage("synth config: '" + key + "' expects a non-negative integer, got '" + value + "'");
  return std::stoull(value);
}

}  // namespace

void SynthConfig::validate() const {
  auto prob = [](const char* name, double p) {
    if (!(p >= 0 && p <= 1)) throw_usage(std::string("synth config: ") + name + " must lie in [0, 1]");
  };
  prob("np_rate", np_rate);
  prob("nnp_in_np_rate", nnp_in_np_rate);
  prob("entity_in_np_rate", entity_in_np_rate);
  prob("exception_rate", exception_rate);
  if (vocab_size < 10) throw_usage("synth config: vocab_size must be at least 10");
  if (!(mean_len >= 2)) throw_usage("synth config: mean_len must be at least 2");
  if (static_cast<double>(max_len) < mean_len) throw_usage("synth config: max_len must be at least mean_len");
  if (!(emission_concentration >= 0)) throw_usage("synth config: emission_concentration must be non-negative");
  if (nnp_in_np_rate > 0 && entity_in_np_rate == 0 && exception_rate == 0)
    throw_usage("synth config: nnp_in_np_rate > 0 needs entities or exceptions to place NNPs in");
  if (entity_in_np_rate > 0 && entity_types.empty()) throw_usage("synth config: no entity types");
  for (const auto& t : entity_types)
    if (t.empty() || t.find_first_of(" \t\n,|") != std::string::npos)
      throw_usage("synth config: bad entity type '" + t + "'");
}

SynthConfig SynthConfig::parse(std::string_view text) {
  SynthConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw_usage("synth config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "vocab_size") cfg.vocab_size = parse_count(key, value);
    else if (key == "mean_len") cfg.mean_len = parse_real(key, value);
    else if (key == "max_len") cfg.max_len = parse_count(key, value);
    else if (key == "np_rate") cfg.np_rate = parse_real(key, value);
    else if (key == "nnp_in_np_rate") cfg.nnp_in_np_rate = parse_real(key, value);
    else if (key == "entity_in_np_rate") cfg.entity_in_np_rate = parse_real(key, value);
    else if (key == "emission_concentration") cfg.emission_concentration = parse_real(key, value);
    else if (key == "exception_rate") cfg.exception_rate = parse_real(key, value);
    else if (key == "seed") cfg.seed = parse_count(key, value);
    else if (key == "entity_types") {
      cfg.entity_types.clear();
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) cfg.entity_types.push_back(trim(item));
    } else {
      throw_usage("synth config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string SynthConfig::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "vocab_size = " << vocab_size << '\n' << "entity_types = ";
  for (std::size_t i = 0; i < entity_types.size(); ++i) os << (i ? "," : "") << entity_types[i];
  os << '\n'
     << "mean_len = " << mean_len << '\n'
     << "max_len = " << max_len << '\n'
     << "np_rate = " << np_rate << '\n'
     << "nnp_in_np_rate = " << nnp_in_np_rate << '\n'
     << "entity_in_np_rate = " << entity_in_np_rate << '\n'
     << "emission_concentration = " << emission_concentration << '\n'
     << "exception_rate = " << exception_rate << '\n'
     << "seed = " << seed << '\n';
  return os.str();
}

Corpus generate(const SynthConfig& cfg, std::size_t n_sentences) {
  cfg.validate();
  if (n_sentences == 0) throw_usage("generate: need at least one sentence");
  const AlphabetPtr entity_alphabet =
      cfg.entity_types == SynthConfig{}.entity_types ? LabelAlphabet::default_entity()
                                                     : LabelAlphabet::bio("ner", cfg.entity_types);
  const AlphabetPtr syntax = LabelAlphabet::default_syntax();
  Corpus corpus(Role::Test, syntax, entity_alphabet);
  Rng rng(cfg.seed);
  Lexicon lexicon(cfg);

  for (std::size_t s = 0; s < n_sentences; ++s) {
    // 2 + Poisson(mean - 2), truncated at max_len
    const std::size_t len = std::min<std::size_t>(cfg.max_len, 2 + rng.poisson(cfg.mean_len - 2));
    std::vector<Token> toks;
    bool after_pp = false;
    while (toks.size() + 1 < len) {
      const std::size_t room = len - 1 - toks.size();
      if (after_pp || rng.bernoulli(cfg.np_rate)) {
        add_np(rng, cfg, std::min<std::size_t>({room, 5, 1 + rng.poisson(1.2)}), toks);
        after_pp = false;
        continue;
      }
      const double u = rng.uniform01();
      const char* kind = u < 0.45 ? "VP" : u < 0.75 ? "PP" : u < 0.85 ? "ADVP" : "O";
      std::size_t n = std::string_view(kind) == "VP" ? 1 + rng.bernoulli(0.3) : 1;
      add_other(rng, kind, std::min(n, room), toks);
      after_pp = std::string_view(kind) == "PP";
    }
    toks.push_back(Token{".", "O", "O", ""});
    for (std::size_t i = 0; i + 1 < toks.size(); ++i)
      if (toks[i].chunk.find("NP") == std::string::npos && rng.bernoulli(cfg.exception_rate)) toks[i].pos = "NNP";

    std::vector<std::string> words, y1, y2;
    for (const auto& t : toks) {
      words.push_back(lexicon.word(rng, t.pos, t.type));
      y1.push_back(make_composite(t.pos, t.chunk));
      y2.push_back(t.entity);
    }
    corpus.add(Example{Sentence("g" + std::to_string(s + 1), std::move(words)), Labeling(syntax, std::move(y1)),
                       Labeling(entity_alphabet, std::move(y2))});
  }
  return corpus;
}

Splits split(const Corpus& corpus, const SplitSizes& sz, std::uint64_t seed, UnlabMode mode) {
  const std::size_t need = sz.d1 + sz.d2 + sz.unlab + sz.test + sz.dev;
  if (need > corpus.size())
    throw_usage("split: sizes sum to " + std::to_string(need) + " but the corpus has " +
                std::to_string(corpus.size()) + " sentences");
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto& syn = corpus.syntax_alphabet();
  const auto& ent = corpus.entity_alphabet();
  Splits out{Corpus(Role::Labeled1, syn, ent), Corpus(Role::Labeled2, syn, ent), Corpus(Role::Unlabeled, syn, ent),
             Corpus(Role::Test, syn, ent), Corpus(Role::Test, syn, ent)};
  std::size_t next = 0;
  auto take = [&](Corpus& dst, std::size_t n, bool keep_y1, bool keep_y2) {
    for (std::size_t i = 0; i < n; ++i, ++next) {
      const Example& ex = corpus[order[next]];
      dst.add(Example{ex.sentence, keep_y1 ? ex.y1 : std::nullopt, keep_y2 ? ex.y2 : std::nullopt});
    }
  };
  take(out.d1, sz.d1, true, false);
  take(out.d2, sz.d2, false, true);
  take(out.unlab, sz.unlab, mode == UnlabMode::OneSided, false);
  take(out.test, sz.test, true, true);
  take(out.dev, sz.dev, true, true);
  return out;
}

}  // namespace hints
