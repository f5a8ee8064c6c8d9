#include "hints/lattice.hpp"

#include <array>
#include <limits>

#include "hints/error.hpp"

namespace hints {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double Lattice::score(const std::vector<std::size_t>& path) const {
  double s = start[path[0]] + node_at(0, path[0]);
  for (std::size_t i = 1; i < path.size(); ++i) s += edge_at(path[i - 1], path[i]) + node_at(i, path[i]);
  return s + stop[path.back()];
}

Path viterbi(const Lattice& lat) {
  const std::size_t n = lat.length, k = lat.states;
  if (n == 0 || k == 0) throw_contract("viterbi on an empty lattice");
  std::vector<double> delta(k), next(k);
  std::vector<std::size_t> back(n * k, 0);
  for (std::size_t s = 0; s < k; ++s) delta[s] = lat.start[s] + lat.node_at(0, s);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t s = 0; s < k; ++s) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t p = 0; p < k; ++p) {
        double v = delta[p] + lat.edge_at(p, s);
        if (v > best) {
          best = v;
          arg = p;
        }
      }
      next[s] = best + lat.node_at(i, s);
      back[i * k + s] = arg;
    }
    delta.swap(next);
  }
  double best = kNegInf;
  std::size_t arg = 0;
  for (std::size_t s = 0; s < k; ++s) {
    double v = delta[s] + lat.stop[s];
    if (v > best) {
      best = v;
      arg = s;
    }
  }
  Path out;
  out.states.assign(n, 0);
  out.states[n - 1] = arg;
  for (std::size_t i = n - 1; i > 0; --i) out.states[i - 1] = back[i * k + out.states[i]];
  // Recompute along the path so the returned score is the exact lattice sum.
  out.score = lat.score(out.states);
  return out;
}

namespace {

struct Entry {
  double score = kNegInf;
  std::size_t prev_state = 0;
  std::size_t prev_rank = 0;
};

// Inserts a candidate into a sorted top-2 list; ties keep the earlier entry.
void offer(std::array<Entry, 2>& top, const Entry& e) {
  if (e.score > top[0].score) {
    top[1] = top[0];
    top[0] = e;
  } else if (e.score > top[1].score) {
    top[1] = e;
  }
}

}  // namespace

TwoBest viterbi_two_best(const Lattice& lat) {
  const std::size_t n = lat.length, k = lat.states;
  if (n == 0 || k == 0) throw_contract("viterbi on an empty lattice");
  std::vector<std::array<Entry, 2>> table(n * k);
  auto cell = [&](std::size_t i, std::size_t s) -> std::array<Entry, 2>& { return table[i * k + s]; };
  for (std::size_t s = 0; s < k; ++s) cell(0, s)[0].score = lat.start[s] + lat.node_at(0, s);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t s = 0; s < k; ++s) {
      std::array<Entry, 2> top;
      for (std::size_t p = 0; p < k; ++p) {
        const auto& prev = cell(i - 1, p);
        for (std::size_t r = 0; r < 2; ++r) {
          if (prev[r].score == kNegInf) continue;
          offer(top, Entry{prev[r].score + lat.edge_at(p, s), p, r});
        }
      }
      auto& dst = cell(i, s);
      for (std::size_t r = 0; r < 2; ++r) {
        dst[r] = top[r];
        if (dst[r].score != kNegInf) dst[r].score += lat.node_at(i, s);
      }
    }
  }
  struct Final {
    double score;
    std::size_t state, rank;
  };
  Final finals[2] = {{kNegInf, 0, 0}, {kNegInf, 0, 0}};
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t r = 0; r < 2; ++r) {
      const auto& e = cell(n - 1, s)[r];
      if (e.score == kNegInf) continue;
      double v = e.score + lat.stop[s];
      if (v > finals[0].score) {
        finals[1] = finals[0];
        finals[0] = {v, s, r};
      } else if (v > finals[1].score) {
        finals[1] = {v, s, r};
      }
    }
  }
  auto trace = [&](const Final& f) {
    Path p;
    p.states.assign(n, 0);
    std::size_t s = f.state, r = f.rank;
    for (std::size_t i = n; i-- > 0;) {
      p.states[i] = s;
      if (i == 0) break;
      const auto& e = cell(i, s)[r];
      s = e.prev_state;
      r = e.prev_rank;
    }
    p.score = lat.score(p.states);
    return p;
  };
  TwoBest out;
  out.best = trace(finals[0]);
  if (finals[1].score != kNegInf) {
    out.has_second = true;
    out.second = trace(finals[1]);
  }
  return out;
}

}  // namespace hints
