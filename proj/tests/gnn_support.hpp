#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "satlab/gnn.hpp"
#include "satlab/rng.hpp"

namespace satlab::testing {

// Connected random graph: a spanning path plus extra edges, one-hot node
// labels of dimension 3 and sparse edge labels of dimension `edge_dim`.
inline gnn::LabeledGraph random_labeled_graph(Rng& rng, int nodes, int edge_dim,
                                              int extra_edges) {
  std::vector<std::vector<double>> labels(static_cast<std::size_t>(nodes),
                                          std::vector<double>(3, 0.0));
  for (auto& l : labels) l[rng.uniform_index(3)] = 1.0;
  std::vector<gnn::LabeledEdge> edges;
  auto label = [&] {
    std::vector<gnn::SparseEntry> out;
    for (int k = 0; k < edge_dim; ++k) {
      if (rng.coin()) out.push_back({k, rng.uniform_real(0.5, 1.5)});
    }
    return out;
  };
  for (int i = 1; i < nodes; ++i) {
    edges.push_back({static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i))), i, label()});
  }
  for (int k = 0; k < extra_edges && nodes > 1; ++k) {
    const int u = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(nodes)));
    int v = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(nodes - 1)));
    if (v >= u) ++v;
    edges.push_back({u, v, label()});
  }
  return gnn::LabeledGraph(3, edge_dim, std::move(labels), std::move(edges),
                           static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(nodes))));
}

inline void fill_pattern(std::span<double> p, double a, double b, double c) {
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = a * std::sin(b * static_cast<double>(k) + c);
}

// Relative error with a floor on the denominator, so entries that are zero
// up to rounding compare absolutely.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::vector<double> central_differences(std::span<double> params,
                                               const std::function<double()>& f,
                                               double h = 1e-5) {
  std::vector<double> g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = f();
    params[i] = saved - h;
    const double down = f();
    params[i] = saved;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// Fourth-order stencil (f(-2h) - 8f(-h) + 8f(h) - f(2h)) / 12h.
inline std::vector<double> five_point_differences(std::span<double> params,
                                                  const std::function<double()>& f,
                                                  double h = 1e-3) {
  std::vector<double> g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    double v[4];
    const double offsets[4] = {-2 * h, -h, h, 2 * h};
    for (int k = 0; k < 4; ++k) {
      params[i] = saved + offsets[k];
      v[k] = f();
    }
    params[i] = saved;
    g[i] = (v[0] - 8 * v[1] + 8 * v[2] - v[3]) / (12 * h);
  }
  return g;
}

}  // namespace satlab::testing
