#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "satlab/labeled_graph.hpp"
#include "satlab/oracle.hpp"

namespace satlab::gnn {

enum class Variant { Linear, Nonlinear };

std::string_view to_string(Variant variant);
Variant variant_from_string(std::string_view text);

struct ModelShape {
  Variant variant = Variant::Nonlinear;
  int state_dim = 10;
  int hidden = 32;  // nonlinear transition only
  int node_label_dim = 3;
  int edge_label_dim = 0;
  double mu = 0.9;  // contraction factor, in (0, 1)

  bool operator==(const ModelShape&) const = default;
};

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

/// Parameters of the transition function h_w and the readout g_w, stored in
/// one flat vector so optimizers and gradient checks can treat them
/// uniformly.
///
/// Nonlinear h_w is a one-hidden-layer tanh network of the concatenation
/// (l_n, l_nu, x_u, l_u):
///   W1 [hidden x (2*node_label + edge_label + state)], b1 [hidden],
///   W2 [state x hidden], b2 [state].
/// Linear h_w is A_nu x_u + b_n with
///   A_nu = mu / (state * |ne[n]|) * tanh(Phi (l_n, l_nu, l_u) + phi0),
///   b_n  = B l_n + b0,
/// so the aggregated map at every node has max-norm gain at most mu.
/// The readout is an affine map of the output node state to two logits:
///   R [2 x state], r0 [2]   (index 0 = SAT, 1 = UNSAT).
class GnnModel {
 public:
  GnnModel() = default;
  explicit GnnModel(ModelShape shape);

  /// Parameters drawn uniformly from [-scale, scale].
  static GnnModel random(ModelShape shape, std::uint64_t seed, double scale = 0.1);

  const ModelShape& shape() const { return shape_; }
  Variant variant() const { return shape_.variant; }
  int state_dim() const { return shape_.state_dim; }
  double mu() const { return shape_.mu; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  const TensorInfo& tensor_info(std::string_view name) const;
  std::span<double> tensor(std::string_view name);
  std::span<const double> tensor(std::string_view name) const;

  /// Width of the concatenated (l_n, l_nu, l_u) label input.
  int label_input_dim() const { return 2 * shape_.node_label_dim + shape_.edge_label_dim; }

 private:
  void add_tensor(std::string name, int rows, int cols);

  ModelShape shape_;
  std::vector<TensorInfo> tensors_;
  std::vector<double> params_;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FixedPointConfig {
  int max_iterations = 50;
  double tolerance = 1e-6;
};

/// Node states x_n, row-major [num_nodes x state_dim].
struct NodeStates {
  int num_nodes = 0;
  int state_dim = 0;
  std::vector<double> values;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // max-norm of the last update

  std::span<const double> row(int n) const {
    return std::span<const double>(values).subspan(static_cast<std::size_t>(n) * state_dim,
                                                   state_dim);
  }
};

/// Single contribution h_w(l_n, l_nu, x_u, l_u) for a neighbor u of n, with
/// dense labels. `target_degree` is |ne[n]|, used by the linear rescaling.
std::vector<double> transition(const GnnModel& model, std::span<const double> target_label,
                               std::span<const double> edge_label,
                               std::span<const double> neighbor_state,
                               std::span<const double> neighbor_label, int target_degree);

/// Synchronous iteration x <- H(x) from `initial` (zeros when empty) until the
/// max-norm update is <= tolerance or max_iterations is reached. Throws
/// NumericalError if a state becomes non-finite.
NodeStates forward_fixed_point(const GnnModel& model, const LabeledGraph& graph,
                               const FixedPointConfig& config,
                               std::span<const double> initial = {});

struct Probabilities {
  double sat = 0.5;
  double unsat = 0.5;

  double of(SatStatus label) const { return label == SatStatus::Sat ? sat : unsat; }
};

std::array<double, 2> readout_logits(const GnnModel& model, const NodeStates& states,
                                     const LabeledGraph& graph);
Probabilities softmax(std::array<double, 2> logits);
/// g_w: softmax of the affine readout of the output node's state.
Probabilities readout(const GnnModel& model, const NodeStates& states,
                      const LabeledGraph& graph);

/// Exact ties go to UNSAT.
SatStatus classify(const Probabilities& p);

inline constexpr double kProbabilityFloor = 1e-12;

/// -log of the probability of the true class, clamped at kProbabilityFloor.
double cross_entropy(const Probabilities& p, SatStatus target);
/// max(0, jacobian_norm - mu)^2
double contraction_penalty(double jacobian_norm, double mu);
double loss(const Probabilities& p, SatStatus target, double penalty_weight = 0.0,
            double jacobian_norm = 0.0, double mu = 1.0);

struct JacobianEstimate {
  double norm = 0.0;
  std::vector<double> direction;  // unit vector v with norm = |J v|
};

/// Spectral norm estimate of dH/dx at `states` by power iteration on J^T J
/// from the normalized all-ones vector. For the linear variant J does not
/// depend on the states.
JacobianEstimate estimate_jacobian_norm(const GnnModel& model, const LabeledGraph& graph,
                                        const NodeStates& states, int iterations = 5);
/// |J v| / |v| for a fixed direction v.
double jacobian_gain(const GnnModel& model, const LabeledGraph& graph,
                     const NodeStates& states, std::span<const double> direction);

struct BackwardResult {
  std::vector<double> gradient;  // same layout as GnnModel::params()
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

/// Gradient of a loss that depends on the parameters through the readout
/// logits and the fixed point. Solves the adjoint system z = z J + dL/dx by
/// iteration (recurrent backpropagation), then accumulates parameter
/// gradients through h_w and g_w. `state_gradient` optionally adds a direct
/// dL/dx term for every node.
BackwardResult backward_fixed_point(const GnnModel& model, const LabeledGraph& graph,
                                    const NodeStates& states,
                                    std::span<const double, 2> logit_gradient,
                                    const FixedPointConfig& config,
                                    std::span<const double> state_gradient = {});

struct LossOptions {
  double penalty_weight = 0.0;  // lambda; the penalty applies to the nonlinear variant
  int power_iterations = 5;
  /// Use this direction for the Jacobian estimate instead of power iteration.
  const std::vector<double>* frozen_direction = nullptr;
};

struct ExampleResult {
  NodeStates states;
  Probabilities probabilities;
  double cross_entropy = 0.0;
  double jacobian_norm = 0.0;
  double penalty = 0.0;
  double loss = 0.0;
  std::vector<double> jacobian_direction;
  BackwardResult backward;  // empty gradient unless requested
};

/// Forward pass, readout and loss for one graph; with `with_gradient` also
/// the full parameter gradient of the loss. The penalty's dependence on the
/// power-iteration direction is not differentiated.
ExampleResult evaluate_example(const GnnModel& model, const LabeledGraph& graph,
                               SatStatus target, const FixedPointConfig& config,
                               const LossOptions& options, bool with_gradient);

}  // namespace satlab::gnn
