#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "satlab/cnf.hpp"
#include "satlab/labeled_graph.hpp"

namespace satlab::graph {

enum class NodeKind { PositiveLiteral = 0, NegativeLiteral = 1, Output = 2 };
enum class EdgeKind { ClauseCooccurrence = 0, SpecialVariableLink = 1, OutputLink = 2 };

inline constexpr int kNodeLabelDim = 3;
inline constexpr int kEdgeKindCount = 3;

struct GraphNode {
  int id = 0;
  NodeKind kind = NodeKind::Output;
  std::optional<int> var;  // 1-indexed, absent for the output node

  /// One-hot over {positive, negative, output}.
  std::array<double, kNodeLabelDim> label() const;
};

/// Undirected edge stored once with u < v. `clauses` holds the 0-based
/// indices i for which the label entry e_i is 1.
struct GraphEdge {
  int u = 0;
  int v = 0;
  EdgeKind kind = EdgeKind::ClauseCooccurrence;
  std::vector<int> clauses;
};

struct EncodeOptions {
  /// Replace the per-clause indicator block with a single shared-clause count.
  bool compress_edge_labels = false;
};

/// Variable-variable graph of a CNF formula.
///
/// Node ids: positive literals of x1..xn are 0..n-1, negative literals are
/// n..2n-1, the output node is 2n. Edges are sorted by (u, v). Edge labels
/// have dimension m + 3 (or 1 + 3 when compressed): the clause indicator
/// block followed by a one-hot edge kind flag.
class VarVarGraph {
 public:
  int num_vars() const { return num_vars_; }
  int m() const { return m_; }
  bool compressed() const { return compressed_; }
  int output_node() const { return 2 * num_vars_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  int label_block_dim() const { return compressed_ ? 1 : m_; }
  int edge_label_dim() const { return label_block_dim() + kEdgeKindCount; }
  std::vector<double> dense_edge_label(const GraphEdge& edge) const;

  static int positive_node(int var) { return var - 1; }
  int negative_node(int var) const { return num_vars_ + var - 1; }
  int literal_node(Literal lit) const {
    return lit.negated ? negative_node(lit.var) : positive_node(lit.var);
  }

  /// Edge between two nodes in either order, if present.
  const GraphEdge* find_edge(int a, int b) const;

  /// Generic labeled graph for the GNN engine.
  gnn::LabeledGraph to_labeled_graph() const;

 private:
  friend VarVarGraph encode_var_var(const CnfFormula&, int, EncodeOptions);
  int num_vars_ = 0;
  int m_ = 0;
  bool compressed_ = false;
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
};

/// Throws std::invalid_argument if the formula has more than m_max clauses
/// or a clause contains a variable in both polarities.
VarVarGraph encode_var_var(const CnfFormula& formula, int m_max, EncodeOptions options = {});

struct GraphStats {
  int node_count = 0;
  int edge_count = 0;
  std::array<int, kEdgeKindCount> edges_by_kind{};
  /// degree (all edge kinds) -> number of nodes with that degree
  std::map<int, int> degree_histogram;
  /// largest number of literal-literal edges at one literal node
  int max_literal_degree = 0;
};

GraphStats graph_stats(const VarVarGraph& graph);

/// Debug dump: {nodes:[{id,kind,var}], edges:[{u,v,kind,ones}], output_node, m}.
nlohmann::json to_json(const VarVarGraph& graph);

}  // namespace satlab::graph
