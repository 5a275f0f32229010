#include "satlab/labeled_graph.hpp"

#include <stdexcept>
#include <string>

namespace satlab::gnn {

LabeledGraph::LabeledGraph(int node_label_dim, int edge_label_dim,
                           std::vector<std::vector<double>> node_labels,
                           std::vector<LabeledEdge> edges, int output_node)
    : node_label_dim_(node_label_dim),
      edge_label_dim_(edge_label_dim),
      output_node_(output_node),
      node_labels_(std::move(node_labels)),
      edges_(std::move(edges)) {
  const int n = num_nodes();
  if (output_node_ < 0 || output_node_ >= n) throw std::invalid_argument("bad output node");
  for (const auto& label : node_labels_) {
    if (static_cast<int>(label.size()) != node_label_dim_) {
      throw std::invalid_argument("node label dimension mismatch");
    }
  }
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  for (const auto& e : edges_) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n || e.u == e.v) {
      throw std::invalid_argument("edge endpoints must be distinct valid nodes");
    }
    for (const auto& entry : e.label) {
      if (entry.index < 0 || entry.index >= edge_label_dim_) {
        throw std::invalid_argument("edge label index " + std::to_string(entry.index) +
                                    " outside dimension " + std::to_string(edge_label_dim_));
      }
    }
    ++degree[e.u];
    ++degree[e.v];
  }
  arc_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) arc_offsets_[i + 1] = arc_offsets_[i] + degree[i];
  arcs_.resize(2 * edges_.size());
  std::vector<int> fill(arc_offsets_.begin(), arc_offsets_.end() - 1);
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    const auto& edge = edges_[e];
    arcs_[fill[edge.u]++] = Arc{edge.u, edge.v, e};
    arcs_[fill[edge.v]++] = Arc{edge.v, edge.u, e};
  }
}

std::vector<double> LabeledGraph::dense_edge_label(int e) const {
  std::vector<double> dense(static_cast<std::size_t>(edge_label_dim_), 0.0);
  for (const auto& entry : edges_[e].label) dense[entry.index] += entry.value;
  return dense;
}

LabeledGraph LabeledGraph::permuted(std::span<const int> perm) const {
  const int n = num_nodes();
  if (static_cast<int>(perm.size()) != n) throw std::invalid_argument("permutation size");
  std::vector<std::vector<double>> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[perm[i]] = node_labels_[i];
  std::vector<LabeledEdge> edges = edges_;
  for (auto& e : edges) {
    e.u = perm[e.u];
    e.v = perm[e.v];
  }
  return LabeledGraph(node_label_dim_, edge_label_dim_, std::move(labels), std::move(edges),
                      perm[output_node_]);
}

}  // namespace satlab::gnn
