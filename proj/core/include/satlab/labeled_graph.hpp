#pragma once

#include <span>
#include <vector>

namespace satlab::gnn {

struct SparseEntry {
  int index = 0;
  double value = 0.0;
};

/// Undirected edge with a sparse label of the graph's edge_label_dim.
struct LabeledEdge {
  int u = 0;
  int v = 0;
  std::vector<SparseEntry> label;
};

/// Directed view of an undirected edge: `source` is a neighbor of `target`.
struct Arc {
  int target = 0;
  int source = 0;
  int edge = 0;
};

/// Undirected graph with dense node labels, sparse edge labels and one
/// designated output node. Every undirected edge yields two arcs; arcs are
/// grouped by target node in edge order, which fixes all summation orders.
class LabeledGraph {
 public:
  LabeledGraph() = default;
  LabeledGraph(int node_label_dim, int edge_label_dim,
               std::vector<std::vector<double>> node_labels,
               std::vector<LabeledEdge> edges, int output_node);

  int num_nodes() const { return static_cast<int>(node_labels_.size()); }
  int node_label_dim() const { return node_label_dim_; }
  int edge_label_dim() const { return edge_label_dim_; }
  int output_node() const { return output_node_; }

  std::span<const double> node_label(int n) const { return node_labels_[n]; }
  const std::vector<LabeledEdge>& edges() const { return edges_; }
  std::span<const SparseEntry> edge_label(int e) const { return edges_[e].label; }
  std::vector<double> dense_edge_label(int e) const;

  std::span<const Arc> arcs() const { return arcs_; }
  std::span<const Arc> in_arcs(int n) const {
    return std::span<const Arc>(arcs_).subspan(arc_offsets_[n],
                                               arc_offsets_[n + 1] - arc_offsets_[n]);
  }
  int degree(int n) const { return arc_offsets_[n + 1] - arc_offsets_[n]; }

  /// Relabels node i as perm[i].
  LabeledGraph permuted(std::span<const int> perm) const;

 private:
  int node_label_dim_ = 0;
  int edge_label_dim_ = 0;
  int output_node_ = 0;
  std::vector<std::vector<double>> node_labels_;
  std::vector<LabeledEdge> edges_;
  std::vector<Arc> arcs_;
  std::vector<int> arc_offsets_{0};
};

}  // namespace satlab::gnn
