#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "hints/lattice.hpp"
#include "support.hpp"

using namespace hints;

namespace {

Lattice random_lattice(Rng& rng, std::size_t n, std::size_t k, bool coarse) {
  auto draw = [&] { return coarse ? static_cast<double>(rng.below(3)) : rng.uniform01() * 10 - 5; };
  Lattice lat;
  lat.length = n;
  lat.states = k;
  lat.start.resize(k);
  lat.stop.resize(k);
  lat.edge.resize(k * k);
  lat.node.resize(n * k);
  for (auto* v : {&lat.start, &lat.stop, &lat.edge, &lat.node})
    for (auto& x : *v) x = draw();
  return lat;
}

double by_hand(const Lattice& lat, const std::vector<std::size_t>& p) {
  double s = lat.start[p[0]] + lat.stop[p.back()];
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += lat.node[i * lat.states + p[i]];
    if (i) s += lat.edge[p[i - 1] * lat.states + p[i]];
  }
  return s;
}

}  // namespace

TEST_CASE("viterbi matches enumeration") {
  Rng rng(5);
  for (int trial = 0; trial < 400; ++trial) {
    std::size_t n = 1 + rng.below(5), k = 1 + rng.below(4);
    bool coarse = trial % 2 == 0;  // integer scores produce many ties
    Lattice lat = random_lattice(rng, n, k, coarse);
    double best = -INFINITY;
    for (auto& p : testing::all_paths(n, k)) best = std::max(best, by_hand(lat, p));
    Path got = viterbi(lat);
    CHECK(got.states.size() == n);
    CHECK(std::abs(got.score - best) <= 1e-9);
    CHECK(std::abs(by_hand(lat, got.states) - best) <= 1e-9);
    CHECK(std::abs(lat.score(got.states) - by_hand(lat, got.states)) <= 1e-9);
  }
}

TEST_CASE("ties go to the lowest index") {
  Lattice lat;
  lat.length = 3;
  lat.states = 3;
  lat.start.assign(3, 0);
  lat.stop.assign(3, 0);
  lat.edge.assign(9, 0);
  lat.node.assign(9, 0);
  CHECK(viterbi(lat).states == std::vector<std::size_t>{0, 0, 0});
  lat.node[1 * 3 + 2] = 1;
  CHECK(viterbi(lat).states == std::vector<std::size_t>{0, 2, 0});
}

TEST_CASE("two best matches enumeration") {
  Rng rng(9);
  for (int trial = 0; trial < 400; ++trial) {
    std::size_t n = 1 + rng.below(4), k = 1 + rng.below(4);
    Lattice lat = random_lattice(rng, n, k, trial % 2 == 0);
    std::vector<double> scores;
    for (auto& p : testing::all_paths(n, k)) scores.push_back(by_hand(lat, p));
    std::sort(scores.rbegin(), scores.rend());
    TwoBest tb = viterbi_two_best(lat);
    CHECK(std::abs(tb.best.score - scores[0]) <= 1e-9);
    if (k == 1) {
      CHECK_FALSE(tb.has_second);
      continue;
    }
    REQUIRE(tb.has_second);
    CHECK(tb.second.states != tb.best.states);
    CHECK(std::abs(tb.second.score - scores[1]) <= 1e-9);
    CHECK(std::abs(by_hand(lat, tb.second.states) - scores[1]) <= 1e-9);
  }
}
