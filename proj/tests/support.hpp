#pragma once

#include <cstdint>
#include <vector>

#include "satlab/cnf.hpp"
#include "satlab/rng.hpp"

namespace satlab::testing {

// (x1 v -x2 v x4) ^ (x2 v x3) ^ (-x3 v x4)
inline CnfFormula example_formula() {
  return CnfFormula::from_dimacs_lists(4, {{1, -2, 4}, {2, 3}, {-3, 4}});
}

inline Assignment assignment_from_bits(int n, std::uint64_t bits) {
  Assignment a;
  a.values.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) a.values[static_cast<std::size_t>(j)] = (bits >> (n - 1 - j)) & 1U;
  return a;
}

// Random clauses of length 1..max_len, possibly with repeated variables.
inline CnfFormula random_formula(Rng& rng, int n, int m, int max_len = 3,
                                 bool allow_repeats = false) {
  std::vector<std::vector<int>> clauses;
  for (int i = 0; i < m; ++i) {
    const int len = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_len)));
    std::vector<int> c;
    while (static_cast<int>(c.size()) < len) {
      const int v = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      bool present = false;
      for (int lit : c) present = present || (lit == v || lit == -v);
      if (present && !allow_repeats) {
        if (static_cast<int>(c.size()) >= n) break;
        continue;
      }
      c.push_back(rng.coin() ? -v : v);
    }
    clauses.push_back(c);
  }
  return CnfFormula::from_dimacs_lists(n, clauses);
}

}  // namespace satlab::testing
