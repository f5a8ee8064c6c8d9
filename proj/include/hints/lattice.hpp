#pragma once

#include <cstddef>
#include <vector>

namespace hints {

// Additive first-order scoring over n positions and k states:
//   score(y) = start[y0] + sum_i node[i][y_i] + sum_{i>0} edge[y_{i-1}][y_i] + stop[y_{n-1}]
// Both taggers reduce to this form (log-probabilities for the HMM, weight sums
// for the perceptron).
struct Lattice {
  std::size_t length = 0;
  std::size_t states = 0;
  std::vector<double> start;  // k
  std::vector<double> stop;   // k
  std::vector<double> edge;   // k * k, row = previous state
  std::vector<double> node;   // n * k

  double edge_at(std::size_t prev, std::size_t cur) const { return edge[prev * states + cur]; }
  double node_at(std::size_t pos, std::size_t s) const { return node[pos * states + s]; }
  double score(const std::vector<std::size_t>& path) const;
};

struct Path {
  std::vector<std::size_t> states;
  double score = 0;
};

// Argmax path. Ties go to the lowest state index at every backpointer and at
// the final position.
Path viterbi(const Lattice& lattice);

// Best and second-best distinct paths. The second is absent when only one
// path exists (a single state).
struct TwoBest {
  Path best;
  bool has_second = false;
  Path second;
};
TwoBest viterbi_two_best(const Lattice& lattice);

}  // namespace hints
