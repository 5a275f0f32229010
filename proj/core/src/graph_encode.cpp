#include "satlab/graph_encode.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace satlab::graph {
namespace {

const char* kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::PositiveLiteral: return "positive";
    case NodeKind::NegativeLiteral: return "negative";
    case NodeKind::Output: return "output";
  }
  return "?";
}

const char* kind_name(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::ClauseCooccurrence: return "cooccurrence";
    case EdgeKind::SpecialVariableLink: return "special";
    case EdgeKind::OutputLink: return "output";
  }
  return "?";
}

}  // namespace

std::array<double, kNodeLabelDim> GraphNode::label() const {
  std::array<double, kNodeLabelDim> out{};
  out[static_cast<int>(kind)] = 1.0;
  return out;
}

std::vector<double> VarVarGraph::dense_edge_label(const GraphEdge& edge) const {
  std::vector<double> label(static_cast<std::size_t>(edge_label_dim()), 0.0);
  if (compressed_) {
    label[0] = static_cast<double>(edge.clauses.size());
  } else {
    for (int c : edge.clauses) label[c] = 1.0;
  }
  label[label_block_dim() + static_cast<int>(edge.kind)] = 1.0;
  return label;
}

const GraphEdge* VarVarGraph::find_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{a, b},
                             [](const GraphEdge& e, const std::pair<int, int>& key) {
                               return std::pair{e.u, e.v} < key;
                             });
  if (it != edges_.end() && it->u == a && it->v == b) return &*it;
  return nullptr;
}

gnn::LabeledGraph VarVarGraph::to_labeled_graph() const {
  std::vector<std::vector<double>> node_labels;
  node_labels.reserve(nodes_.size());
  for (const auto& node : nodes_) {
    const auto l = node.label();
    node_labels.emplace_back(l.begin(), l.end());
  }
  std::vector<gnn::LabeledEdge> edges;
  edges.reserve(edges_.size());
  for (const auto& e : edges_) {
    gnn::LabeledEdge out{e.u, e.v, {}};
    if (compressed_) {
      if (!e.clauses.empty()) out.label.push_back({0, static_cast<double>(e.clauses.size())});
    } else {
      for (int c : e.clauses) out.label.push_back({c, 1.0});
    }
    out.label.push_back({label_block_dim() + static_cast<int>(e.kind), 1.0});
    edges.push_back(std::move(out));
  }
  return gnn::LabeledGraph(kNodeLabelDim, edge_label_dim(), std::move(node_labels),
                           std::move(edges), output_node());
}

VarVarGraph encode_var_var(const CnfFormula& formula, int m_max, EncodeOptions options) {
  if (m_max < 1) throw std::invalid_argument("m_max must be positive");
  if (formula.num_clauses() > m_max) {
    throw std::invalid_argument("formula has " + std::to_string(formula.num_clauses()) +
                                " clauses, more than m_max = " + std::to_string(m_max));
  }
  VarVarGraph g;
  const int n = formula.num_vars();
  g.num_vars_ = n;
  g.m_ = m_max;
  g.compressed_ = options.compress_edge_labels;

  g.nodes_.reserve(2 * static_cast<std::size_t>(n) + 1);
  for (int v = 1; v <= n; ++v) g.nodes_.push_back({v - 1, NodeKind::PositiveLiteral, v});
  for (int v = 1; v <= n; ++v) g.nodes_.push_back({n + v - 1, NodeKind::NegativeLiteral, v});
  g.nodes_.push_back({2 * n, NodeKind::Output, std::nullopt});

  std::map<std::pair<int, int>, std::vector<int>> cooccurrence;
  for (int c = 0; c < formula.num_clauses(); ++c) {
    const auto& lits = formula.clause(c).literals;
    for (std::size_t a = 0; a < lits.size(); ++a) {
      for (std::size_t b = a + 1; b < lits.size(); ++b) {
        if (lits[a].var == lits[b].var) {
          if (lits[a].negated != lits[b].negated) {
            throw std::invalid_argument("clause " + std::to_string(c + 1) + " contains x" +
                                        std::to_string(lits[a].var) + " in both polarities");
          }
          continue;
        }
        int u = g.literal_node(lits[a]);
        int v = g.literal_node(lits[b]);
        if (u > v) std::swap(u, v);
        auto& ones = cooccurrence[{u, v}];
        if (ones.empty() || ones.back() != c) ones.push_back(c);
      }
    }
  }

  for (auto& [key, ones] : cooccurrence) {
    g.edges_.push_back({key.first, key.second, EdgeKind::ClauseCooccurrence, std::move(ones)});
  }
  for (int v = 1; v <= n; ++v) {
    g.edges_.push_back({VarVarGraph::positive_node(v), g.negative_node(v),
                        EdgeKind::SpecialVariableLink, {}});
  }
  for (int id = 0; id < 2 * n; ++id) {
    g.edges_.push_back({id, g.output_node(), EdgeKind::OutputLink, {}});
  }
  std::sort(g.edges_.begin(), g.edges_.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::pair{a.u, a.v} < std::pair{b.u, b.v};
  });
  return g;
}

GraphStats graph_stats(const VarVarGraph& graph) {
  GraphStats stats;
  stats.node_count = graph.num_nodes();
  stats.edge_count = static_cast<int>(graph.edges().size());
  std::vector<int> degree(static_cast<std::size_t>(graph.num_nodes()), 0);
  std::vector<int> literal_degree(static_cast<std::size_t>(graph.num_nodes()), 0);
  for (const auto& e : graph.edges()) {
    ++stats.edges_by_kind[static_cast<int>(e.kind)];
    ++degree[e.u];
    ++degree[e.v];
    if (e.kind != EdgeKind::OutputLink) {
      ++literal_degree[e.u];
      ++literal_degree[e.v];
    }
  }
  for (int d : degree) ++stats.degree_histogram[d];
  for (int d : literal_degree) stats.max_literal_degree = std::max(stats.max_literal_degree, d);
  return stats;
}

nlohmann::json to_json(const VarVarGraph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : graph.nodes()) {
    nlohmann::json j{{"id", node.id}, {"kind", kind_name(node.kind)}};
    j["var"] = node.var ? nlohmann::json(*node.var) : nlohmann::json(nullptr);
    nodes.push_back(std::move(j));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : graph.edges()) {
    edges.push_back({{"u", e.u}, {"v", e.v}, {"kind", kind_name(e.kind)}, {"ones", e.clauses}});
  }
  return {{"nodes", std::move(nodes)},
          {"edges", std::move(edges)},
          {"output_node", graph.output_node()},
          {"m", graph.m()}};
}

}  // namespace satlab::graph
