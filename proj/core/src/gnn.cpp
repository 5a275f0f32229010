#include "satlab/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "satlab/rng.hpp"

namespace satlab::gnn {

std::string_view to_string(Variant variant) {
  return variant == Variant::Linear ? "linear" : "nonlinear";
}

Variant variant_from_string(std::string_view text) {
  if (text == "linear") return Variant::Linear;
  if (text == "nonlinear") return Variant::Nonlinear;
  throw std::invalid_argument("unknown GNN variant '" + std::string(text) + "'");
}

GnnModel::GnnModel(ModelShape shape) : shape_(shape) {
  if (shape_.state_dim < 1 || shape_.node_label_dim < 0 || shape_.edge_label_dim < 0) {
    throw std::invalid_argument("invalid GNN dimensions");
  }
  if (!(shape_.mu > 0.0 && shape_.mu < 1.0)) throw std::invalid_argument("mu must be in (0,1)");
  const int s = shape_.state_dim;
  const int labels = label_input_dim();
  if (shape_.variant == Variant::Nonlinear) {
    if (shape_.hidden < 1) throw std::invalid_argument("hidden width must be positive");
    add_tensor("W1", shape_.hidden, labels + s);
    add_tensor("b1", shape_.hidden, 1);
    add_tensor("W2", s, shape_.hidden);
    add_tensor("b2", s, 1);
  } else {
    add_tensor("Phi", s * s, labels);
    add_tensor("phi0", s * s, 1);
    add_tensor("B", s, shape_.node_label_dim);
    add_tensor("b0", s, 1);
  }
  add_tensor("R", 2, s);
  add_tensor("r0", 2, 1);
}

void GnnModel::add_tensor(std::string name, int rows, int cols) {
  TensorInfo info{std::move(name), rows, cols, params_.size()};
  params_.resize(params_.size() + info.size(), 0.0);
  tensors_.push_back(std::move(info));
}

GnnModel GnnModel::random(ModelShape shape, std::uint64_t seed, double scale) {
  GnnModel model(shape);
  Rng rng(seed);
  for (double& p : model.params_) p = rng.uniform_real(-scale, scale);
  return model;
}

const TensorInfo& GnnModel::tensor_info(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("no tensor named '" + std::string(name) + "'");
}

std::span<double> GnnModel::tensor(std::string_view name) {
  const auto& t = tensor_info(name);
  return std::span<double>(params_).subspan(t.offset, t.size());
}

std::span<const double> GnnModel::tensor(std::string_view name) const {
  const auto& t = tensor_info(name);
  return std::span<const double>(params_).subspan(t.offset, t.size());
}

namespace {

// tanh through one exp: about four times faster than std::tanh, absolute
// error below 1e-15, and exactly +-1 once exp saturates.
inline double tanh_exp(double v) { return 1.0 - 2.0 / (std::exp(2.0 * v) + 1.0); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Concatenated label input (l_n, l_nu, l_u) of one arc as sparse columns in
// [0, label_input_dim).
struct LabelEntry {
  int col;
  double value;
};

// Evaluates the transition map of one model on one graph. Label-only terms
// are computed once per instance, so each fixed-point sweep only touches the
// state-dependent part.
class Propagator {
 public:
  Propagator(const GnnModel& model, const LabeledGraph& graph)
      : model_(model), graph_(graph), s_(model.state_dim()),
        num_nodes_(graph.num_nodes()), num_arcs_(static_cast<int>(graph.arcs().size())) {
    const auto& shape = model.shape();
    if (graph.node_label_dim() != shape.node_label_dim ||
        graph.edge_label_dim() != shape.edge_label_dim) {
      throw std::invalid_argument("graph label dimensions do not match the model");
    }
    build_label_entries();
    if (model.variant() == Variant::Nonlinear) {
      prepare_nonlinear();
    } else {
      prepare_linear();
    }
  }

  int state_size() const { return num_nodes_ * s_; }

  // out = H(x). For the nonlinear variant also records activations at x.
  void apply(std::span<const double> x, std::span<double> out) {
    if (model_.variant() == Variant::Nonlinear) {
      compute_activations(x);
      const auto W2 = model_.tensor("W2");
      const auto b2 = model_.tensor("b2");
      const int H = hidden_;
      for (int n = 0; n < num_nodes_; ++n) {
        const double* S = &sum_act_[static_cast<std::size_t>(n) * H];
        const double deg = graph_.degree(n);
        double* xn = &out[static_cast<std::size_t>(n) * s_];
        for (int i = 0; i < s_; ++i) {
          double acc = deg * b2[i];
          const double* w = &W2[static_cast<std::size_t>(i) * H];
          for (int h = 0; h < H; ++h) acc += w[h] * S[h];
          xn[i] = acc;
        }
      }
    } else {
      for (int n = 0; n < num_nodes_; ++n) {
        double* xn = &out[static_cast<std::size_t>(n) * s_];
        std::copy_n(&node_bias_[static_cast<std::size_t>(n) * s_], s_, xn);
      }
      const auto arcs = graph_.arcs();
      for (int e = 0; e < num_arcs_; ++e) {
        const double* A = &arc_matrix_[static_cast<std::size_t>(e) * s_ * s_];
        const double* xu = &x[static_cast<std::size_t>(arcs[e].source) * s_];
        double* xn = &out[static_cast<std::size_t>(arcs[e].target) * s_];
        for (int i = 0; i < s_; ++i) {
          double acc = 0.0;
          for (int j = 0; j < s_; ++j) acc += A[i * s_ + j] * xu[j];
          xn[i] += acc;
        }
      }
    }
  }

  // Records activations at x without producing H(x).
  void linearize_at(std::span<const double> x) {
    if (model_.variant() == Variant::Nonlinear) compute_activations(x);
  }

  // out = z J  (row vector times Jacobian), using the last linearization.
  void transpose_apply(std::span<const double> z, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const auto arcs = graph_.arcs();
    if (model_.variant() == Variant::Nonlinear) {
      const int H = hidden_;
      project_w2_transposed(z, node_hidden_);
      std::fill(source_hidden_.begin(), source_hidden_.end(), 0.0);
      for (int e = 0; e < num_arcs_; ++e) {
        const double* g = &node_hidden_[static_cast<std::size_t>(arcs[e].target) * H];
        const double* d = &act_deriv_[static_cast<std::size_t>(e) * H];
        double* D = &source_hidden_[static_cast<std::size_t>(arcs[e].source) * H];
        for (int h = 0; h < H; ++h) D[h] += d[h] * g[h];
      }
      const auto W1 = model_.tensor("W1");
      for (int u = 0; u < num_nodes_; ++u) {
        const double* D = &source_hidden_[static_cast<std::size_t>(u) * H];
        double* ou = &out[static_cast<std::size_t>(u) * s_];
        for (int h = 0; h < H; ++h) {
          if (D[h] == 0.0) continue;
          const double* w = &W1[static_cast<std::size_t>(h) * in_dim_ + state_col_];
          for (int j = 0; j < s_; ++j) ou[j] += D[h] * w[j];
        }
      }
    } else {
      for (int e = 0; e < num_arcs_; ++e) {
        const double* A = &arc_matrix_[static_cast<std::size_t>(e) * s_ * s_];
        const double* zn = &z[static_cast<std::size_t>(arcs[e].target) * s_];
        double* ou = &out[static_cast<std::size_t>(arcs[e].source) * s_];
        for (int i = 0; i < s_; ++i) {
          for (int j = 0; j < s_; ++j) ou[j] += A[i * s_ + j] * zn[i];
        }
      }
    }
  }

  // out = J v, using the last linearization.
  void jacobian_apply(std::span<const double> v, std::span<double> out) {
    if (model_.variant() == Variant::Linear) {
      std::fill(out.begin(), out.end(), 0.0);
      const auto arcs = graph_.arcs();
      for (int e = 0; e < num_arcs_; ++e) {
        const double* A = &arc_matrix_[static_cast<std::size_t>(e) * s_ * s_];
        const double* vu = &v[static_cast<std::size_t>(arcs[e].source) * s_];
        double* on = &out[static_cast<std::size_t>(arcs[e].target) * s_];
        for (int i = 0; i < s_; ++i) {
          double acc = 0.0;
          for (int j = 0; j < s_; ++j) acc += A[i * s_ + j] * vu[j];
          on[i] += acc;
        }
      }
      return;
    }
    const int H = hidden_;
    project_w1_state(v, node_hidden_);  // q_u = W1x v_u
    const auto arcs = graph_.arcs();
    std::fill(source_hidden_.begin(), source_hidden_.end(), 0.0);  // per-target sums
    for (int e = 0; e < num_arcs_; ++e) {
      const double* q = &node_hidden_[static_cast<std::size_t>(arcs[e].source) * H];
      const double* d = &act_deriv_[static_cast<std::size_t>(e) * H];
      double* T = &source_hidden_[static_cast<std::size_t>(arcs[e].target) * H];
      for (int h = 0; h < H; ++h) T[h] += d[h] * q[h];
    }
    const auto W2 = model_.tensor("W2");
    for (int n = 0; n < num_nodes_; ++n) {
      const double* T = &source_hidden_[static_cast<std::size_t>(n) * H];
      double* on = &out[static_cast<std::size_t>(n) * s_];
      for (int i = 0; i < s_; ++i) {
        double acc = 0.0;
        const double* w = &W2[static_cast<std::size_t>(i) * H];
        for (int h = 0; h < H; ++h) acc += w[h] * T[h];
        on[i] = acc;
      }
    }
  }

  // grad += z dH/dtheta at the last linearization point x.
  void accumulate_parameter_gradient(std::span<const double> z, std::span<const double> x,
                                     std::span<double> grad) {
    const auto arcs = graph_.arcs();
    if (model_.variant() == Variant::Nonlinear) {
      const int H = hidden_;
      const auto& w1 = model_.tensor_info("W1");
      const auto& b1 = model_.tensor_info("b1");
      const auto& w2 = model_.tensor_info("W2");
      const auto& b2 = model_.tensor_info("b2");
      project_w2_transposed(z, node_hidden_);
      for (int n = 0; n < num_nodes_; ++n) {
        const double* zn = &z[static_cast<std::size_t>(n) * s_];
        const double* S = &sum_act_[static_cast<std::size_t>(n) * H];
        const double deg = graph_.degree(n);
        for (int i = 0; i < s_; ++i) {
          if (zn[i] == 0.0) continue;
          double* gw = &grad[w2.offset + static_cast<std::size_t>(i) * H];
          for (int h = 0; h < H; ++h) gw[h] += zn[i] * S[h];
          grad[b2.offset + i] += deg * zn[i];
        }
      }
      std::vector<double> delta(static_cast<std::size_t>(H));
      for (int e = 0; e < num_arcs_; ++e) {
        const double* g = &node_hidden_[static_cast<std::size_t>(arcs[e].target) * H];
        const double* d = &act_deriv_[static_cast<std::size_t>(e) * H];
        for (int h = 0; h < H; ++h) delta[h] = d[h] * g[h];
        accumulate_first_layer(e, delta.data(), x, grad, w1, b1);
      }
    } else {
      const auto& phi = model_.tensor_info("Phi");
      const auto& phi0 = model_.tensor_info("phi0");
      const auto& B = model_.tensor_info("B");
      const auto& b0 = model_.tensor_info("b0");
      const int ss = s_ * s_;
      const int labels = model_.label_input_dim();
      const int nl = model_.shape().node_label_dim;
      std::vector<double> dP(static_cast<std::size_t>(ss));
      for (int e = 0; e < num_arcs_; ++e) {
        const int n = arcs[e].target;
        const double* zn = &z[static_cast<std::size_t>(n) * s_];
        const double* xu = &x[static_cast<std::size_t>(arcs[e].source) * s_];
        const double* t = &arc_tanh_[static_cast<std::size_t>(e) * ss];
        const double scale = arc_scale_[e];
        for (int i = 0; i < s_; ++i) {
          for (int j = 0; j < s_; ++j) {
            const double tij = t[i * s_ + j];
            dP[i * s_ + j] = zn[i] * xu[j] * scale * (1.0 - tij * tij);
          }
        }
        for (int k = 0; k < ss; ++k) grad[phi0.offset + k] += dP[k];
        for (const auto& entry : label_entries(e)) {
          for (int k = 0; k < ss; ++k) {
            grad[phi.offset + static_cast<std::size_t>(k) * labels + entry.col] +=
                dP[k] * entry.value;
          }
        }
      }
      for (int n = 0; n < num_nodes_; ++n) {
        const double* zn = &z[static_cast<std::size_t>(n) * s_];
        const double deg = graph_.degree(n);
        const auto ln = graph_.node_label(n);
        for (int i = 0; i < s_; ++i) {
          grad[b0.offset + i] += deg * zn[i];
          for (int k = 0; k < nl; ++k) {
            grad[B.offset + static_cast<std::size_t>(i) * nl + k] += deg * zn[i] * ln[k];
          }
        }
      }
    }
  }

  // Gradient of |J v| (v fixed) with respect to parameters and states, scaled
  // by `coef`, at the last linearization point x. Nonlinear variant only.
  // Returns |J v|.
  double accumulate_gain_gradient(std::span<const double> v, std::span<const double> x,
                                  double coef, std::span<double> grad,
                                  std::span<double> state_grad) {
    const int H = hidden_;
    std::vector<double> w(static_cast<std::size_t>(state_size()));
    jacobian_apply(v, w);
    const double gain = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (gain == 0.0 || coef == 0.0) return gain;
    for (double& wi : w) wi /= gain;  // unit direction of J v

    const auto& w1 = model_.tensor_info("W1");
    const auto& b1 = model_.tensor_info("b1");
    const auto& w2 = model_.tensor_info("W2");
    const auto W1 = model_.tensor("W1");
    const auto arcs = graph_.arcs();

    std::vector<double> q(static_cast<std::size_t>(num_nodes_) * H);
    project_w1_state(v, q);
    std::vector<double> r(static_cast<std::size_t>(num_nodes_) * H);
    project_w2_transposed(w, r);

    std::vector<double> weighted(static_cast<std::size_t>(H));
    std::vector<double> xi(static_cast<std::size_t>(H));
    std::vector<double> target_sum(static_cast<std::size_t>(num_nodes_) * H, 0.0);
    for (int e = 0; e < num_arcs_; ++e) {
      const int n = arcs[e].target;
      const int u = arcs[e].source;
      const double* a = &act_[static_cast<std::size_t>(e) * H];
      const double* d = &act_deriv_[static_cast<std::size_t>(e) * H];
      const double* qu = &q[static_cast<std::size_t>(u) * H];
      const double* rn = &r[static_cast<std::size_t>(n) * H];
      double* T = &target_sum[static_cast<std::size_t>(n) * H];
      for (int h = 0; h < H; ++h) {
        T[h] += d[h] * qu[h];
        weighted[h] = coef * rn[h] * d[h];             // through W1x v_u
        xi[h] = -2.0 * coef * rn[h] * qu[h] * a[h] * d[h];  // through tanh'
      }
      // dW1 (state block) from q_u = W1x v_u
      const double* vu = &v[static_cast<std::size_t>(u) * s_];
      for (int h = 0; h < H; ++h) {
        double* row = &grad[w1.offset + static_cast<std::size_t>(h) * in_dim_ + state_col_];
        for (int j = 0; j < s_; ++j) row[j] += weighted[h] * vu[j];
      }
      accumulate_first_layer(e, xi.data(), x, grad, w1, b1);
      double* gu = &state_grad[static_cast<std::size_t>(u) * s_];
      for (int h = 0; h < H; ++h) {
        if (xi[h] == 0.0) continue;
        const double* wrow = &W1[static_cast<std::size_t>(h) * in_dim_ + state_col_];
        for (int j = 0; j < s_; ++j) gu[j] += xi[h] * wrow[j];
      }
    }
    for (int n = 0; n < num_nodes_; ++n) {
      const double* wn = &w[static_cast<std::size_t>(n) * s_];
      const double* T = &target_sum[static_cast<std::size_t>(n) * H];
      for (int i = 0; i < s_; ++i) {
        double* gw = &grad[w2.offset + static_cast<std::size_t>(i) * H];
        for (int h = 0; h < H; ++h) gw[h] += coef * wn[i] * T[h];
      }
    }
    return gain;
  }

 private:
  std::span<const LabelEntry> label_entries(int e) const {
    return std::span<const LabelEntry>(labels_).subspan(label_offsets_[e],
                                                        label_offsets_[e + 1] - label_offsets_[e]);
  }

  void build_label_entries() {
    const int nl = model_.shape().node_label_dim;
    const int el = model_.shape().edge_label_dim;
    label_offsets_.assign(static_cast<std::size_t>(num_arcs_) + 1, 0);
    const auto arcs = graph_.arcs();
    for (int e = 0; e < num_arcs_; ++e) {
      const auto ln = graph_.node_label(arcs[e].target);
      for (int k = 0; k < nl; ++k) {
        if (ln[k] != 0.0) labels_.push_back({k, ln[k]});
      }
      for (const auto& entry : graph_.edge_label(arcs[e].edge)) {
        if (entry.value != 0.0) labels_.push_back({nl + entry.index, entry.value});
      }
      const auto lu = graph_.node_label(arcs[e].source);
      for (int k = 0; k < nl; ++k) {
        if (lu[k] != 0.0) labels_.push_back({nl + el + k, lu[k]});
      }
      label_offsets_[e + 1] = static_cast<int>(labels_.size());
    }
  }

  // Nonlinear W1 columns are ordered (l_n, l_nu, x_u, l_u); label column c
  // maps past the state block when it belongs to l_u.
  int w1_column(int label_col) const {
    return label_col < state_col_ ? label_col : label_col + s_;
  }

  void prepare_nonlinear() {
    hidden_ = model_.shape().hidden;
    const int H = hidden_;
    state_col_ = model_.shape().node_label_dim + model_.shape().edge_label_dim;
    in_dim_ = model_.label_input_dim() + s_;
    const auto W1 = model_.tensor("W1");
    const auto b1 = model_.tensor("b1");
    arc_const_.assign(static_cast<std::size_t>(num_arcs_) * H, 0.0);
    for (int e = 0; e < num_arcs_; ++e) {
      double* c = &arc_const_[static_cast<std::size_t>(e) * H];
      std::copy(b1.begin(), b1.end(), c);
      for (const auto& entry : label_entries(e)) {
        const int col = w1_column(entry.col);
        for (int h = 0; h < H; ++h) c[h] += W1[static_cast<std::size_t>(h) * in_dim_ + col] * entry.value;
      }
    }
    act_.assign(arc_const_.size(), 0.0);
    act_deriv_.assign(arc_const_.size(), 0.0);
    sum_act_.assign(static_cast<std::size_t>(num_nodes_) * H, 0.0);
    node_hidden_.assign(static_cast<std::size_t>(num_nodes_) * H, 0.0);
    source_hidden_.assign(static_cast<std::size_t>(num_nodes_) * H, 0.0);
  }

  void prepare_linear() {
    const int ss = s_ * s_;
    const int labels = model_.label_input_dim();
    const int nl = model_.shape().node_label_dim;
    const auto Phi = model_.tensor("Phi");
    const auto phi0 = model_.tensor("phi0");
    const auto B = model_.tensor("B");
    const auto b0 = model_.tensor("b0");
    const auto arcs = graph_.arcs();
    arc_tanh_.assign(static_cast<std::size_t>(num_arcs_) * ss, 0.0);
    arc_matrix_.assign(arc_tanh_.size(), 0.0);
    arc_scale_.assign(static_cast<std::size_t>(num_arcs_), 0.0);
    std::vector<double> pre(static_cast<std::size_t>(ss));
    for (int e = 0; e < num_arcs_; ++e) {
      std::copy(phi0.begin(), phi0.end(), pre.begin());
      for (const auto& entry : label_entries(e)) {
        for (int k = 0; k < ss; ++k) {
          pre[k] += Phi[static_cast<std::size_t>(k) * labels + entry.col] * entry.value;
        }
      }
      const double scale = model_.mu() / (s_ * graph_.degree(arcs[e].target));
      arc_scale_[e] = scale;
      for (int k = 0; k < ss; ++k) {
        const double t = tanh_exp(pre[k]);
        arc_tanh_[static_cast<std::size_t>(e) * ss + k] = t;
        arc_matrix_[static_cast<std::size_t>(e) * ss + k] = scale * t;
      }
    }
    node_bias_.assign(static_cast<std::size_t>(num_nodes_) * s_, 0.0);
    for (int n = 0; n < num_nodes_; ++n) {
      const auto ln = graph_.node_label(n);
      const double deg = graph_.degree(n);
      for (int i = 0; i < s_; ++i) {
        double b = b0[i];
        for (int k = 0; k < nl; ++k) b += B[static_cast<std::size_t>(i) * nl + k] * ln[k];
        node_bias_[static_cast<std::size_t>(n) * s_ + i] = deg * b;
      }
    }
  }

  // out_u = W1x v_u for every node.
  void project_w1_state(std::span<const double> v, std::vector<double>& out) const {
    const int H = hidden_;
    const auto W1 = model_.tensor("W1");
    for (int u = 0; u < num_nodes_; ++u) {
      const double* vu = &v[static_cast<std::size_t>(u) * s_];
      double* o = &out[static_cast<std::size_t>(u) * H];
      for (int h = 0; h < H; ++h) {
        const double* w = &W1[static_cast<std::size_t>(h) * in_dim_ + state_col_];
        double acc = 0.0;
        for (int j = 0; j < s_; ++j) acc += w[j] * vu[j];
        o[h] = acc;
      }
    }
  }

  // out_n = W2^T z_n for every node.
  void project_w2_transposed(std::span<const double> z, std::vector<double>& out) const {
    const int H = hidden_;
    const auto W2 = model_.tensor("W2");
    std::fill(out.begin(), out.end(), 0.0);
    for (int n = 0; n < num_nodes_; ++n) {
      const double* zn = &z[static_cast<std::size_t>(n) * s_];
      double* o = &out[static_cast<std::size_t>(n) * H];
      for (int i = 0; i < s_; ++i) {
        if (zn[i] == 0.0) continue;
        const double* w = &W2[static_cast<std::size_t>(i) * H];
        for (int h = 0; h < H; ++h) o[h] += zn[i] * w[h];
      }
    }
  }

  void compute_activations(std::span<const double> x) {
    const int H = hidden_;
    project_w1_state(x, node_hidden_);
    std::fill(sum_act_.begin(), sum_act_.end(), 0.0);
    const auto arcs = graph_.arcs();
    for (int e = 0; e < num_arcs_; ++e) {
      const double* c = &arc_const_[static_cast<std::size_t>(e) * H];
      const double* y = &node_hidden_[static_cast<std::size_t>(arcs[e].source) * H];
      double* a = &act_[static_cast<std::size_t>(e) * H];
      double* d = &act_deriv_[static_cast<std::size_t>(e) * H];
      double* S = &sum_act_[static_cast<std::size_t>(arcs[e].target) * H];
      for (int h = 0; h < H; ++h) {
        const double t = tanh_exp(c[h] + y[h]);
        a[h] = t;
        d[h] = 1.0 - t * t;
        S[h] += t;
      }
    }
  }

  // Gradient of the first layer given d loss / d pre-activation for arc e.
  void accumulate_first_layer(int e, const double* delta, std::span<const double> x,
                              std::span<double> grad, const TensorInfo& w1,
                              const TensorInfo& b1) const {
    const int H = hidden_;
    const auto arcs = graph_.arcs();
    const double* xu = &x[static_cast<std::size_t>(arcs[e].source) * s_];
    for (int h = 0; h < H; ++h) {
      const double dh = delta[h];
      if (dh == 0.0) continue;
      grad[b1.offset + h] += dh;
      double* row = &grad[w1.offset + static_cast<std::size_t>(h) * in_dim_];
      for (int j = 0; j < s_; ++j) row[state_col_ + j] += dh * xu[j];
      for (const auto& entry : label_entries(e)) row[w1_column(entry.col)] += dh * entry.value;
    }
  }

  const GnnModel& model_;
  const LabeledGraph& graph_;
  int s_;
  int num_nodes_;
  int num_arcs_;
  int hidden_ = 0;
  int state_col_ = 0;
  int in_dim_ = 0;
  std::vector<LabelEntry> labels_;
  std::vector<int> label_offsets_;

  // nonlinear
  std::vector<double> arc_const_;
  std::vector<double> act_;
  std::vector<double> act_deriv_;
  std::vector<double> sum_act_;
  std::vector<double> node_hidden_;
  std::vector<double> source_hidden_;

  // linear
  std::vector<double> arc_tanh_;
  std::vector<double> arc_matrix_;
  std::vector<double> arc_scale_;
  std::vector<double> node_bias_;
};

double norm2(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

std::vector<double> transition(const GnnModel& model, std::span<const double> target_label,
                               std::span<const double> edge_label,
                               std::span<const double> neighbor_state,
                               std::span<const double> neighbor_label, int target_degree) {
  const auto& shape = model.shape();
  const int s = shape.state_dim;
  if (static_cast<int>(target_label.size()) != shape.node_label_dim ||
      static_cast<int>(neighbor_label.size()) != shape.node_label_dim ||
      static_cast<int>(edge_label.size()) != shape.edge_label_dim ||
      static_cast<int>(neighbor_state.size()) != s) {
    throw std::invalid_argument("transition input dimensions do not match the model");
  }
  if (target_degree < 1) throw std::invalid_argument("target degree must be positive");

  std::vector<double> out(static_cast<std::size_t>(s), 0.0);
  if (model.variant() == Variant::Nonlinear) {
    std::vector<double> input;
    input.insert(input.end(), target_label.begin(), target_label.end());
    input.insert(input.end(), edge_label.begin(), edge_label.end());
    input.insert(input.end(), neighbor_state.begin(), neighbor_state.end());
    input.insert(input.end(), neighbor_label.begin(), neighbor_label.end());
    const auto W1 = model.tensor("W1");
    const auto b1 = model.tensor("b1");
    const auto W2 = model.tensor("W2");
    const auto b2 = model.tensor("b2");
    const int H = shape.hidden;
    const auto in = input.size();
    std::vector<double> hidden(static_cast<std::size_t>(H));
    for (int h = 0; h < H; ++h) {
      double acc = b1[h];
      for (std::size_t k = 0; k < in; ++k) acc += W1[h * in + k] * input[k];
      hidden[h] = tanh_exp(acc);
    }
    for (int i = 0; i < s; ++i) {
      double acc = b2[i];
      for (int h = 0; h < H; ++h) acc += W2[static_cast<std::size_t>(i) * H + h] * hidden[h];
      out[i] = acc;
    }
  } else {
    std::vector<double> labels;
    labels.insert(labels.end(), target_label.begin(), target_label.end());
    labels.insert(labels.end(), edge_label.begin(), edge_label.end());
    labels.insert(labels.end(), neighbor_label.begin(), neighbor_label.end());
    const auto Phi = model.tensor("Phi");
    const auto phi0 = model.tensor("phi0");
    const auto B = model.tensor("B");
    const auto b0 = model.tensor("b0");
    const int nl = shape.node_label_dim;
    const double scale = shape.mu / (s * target_degree);
    for (int i = 0; i < s; ++i) {
      double acc = b0[i];
      for (int k = 0; k < nl; ++k) acc += B[static_cast<std::size_t>(i) * nl + k] * target_label[k];
      for (int j = 0; j < s; ++j) {
        const int row = i * s + j;
        double pre = phi0[row];
        for (std::size_t k = 0; k < labels.size(); ++k) pre += Phi[row * labels.size() + k] * labels[k];
        acc += scale * tanh_exp(pre) * neighbor_state[j];
      }
      out[i] = acc;
    }
  }
  return out;
}

NodeStates forward_fixed_point(const GnnModel& model, const LabeledGraph& graph,
                               const FixedPointConfig& config,
                               std::span<const double> initial) {
  if (config.max_iterations < 1 || !(config.tolerance > 0)) {
    throw std::invalid_argument("fixed point needs max_iterations >= 1 and tolerance > 0");
  }
  Propagator prop(model, graph);
  NodeStates states;
  states.num_nodes = graph.num_nodes();
  states.state_dim = model.state_dim();
  states.values.assign(static_cast<std::size_t>(prop.state_size()), 0.0);
  if (!initial.empty()) {
    if (initial.size() != states.values.size()) {
      throw std::invalid_argument("initial state size mismatch");
    }
    std::copy(initial.begin(), initial.end(), states.values.begin());
  }
  std::vector<double> next(states.values.size());
  for (int k = 1; k <= config.max_iterations; ++k) {
    prop.apply(states.values, next);
    if (!all_finite(next)) {
      throw NumericalError("non-finite node state at fixed-point iteration " +
                           std::to_string(k));
    }
    states.residual = max_abs_diff(next, states.values);
    states.values.swap(next);
    states.iterations = k;
    if (states.residual <= config.tolerance) {
      states.converged = true;
      break;
    }
  }
  return states;
}

std::array<double, 2> readout_logits(const GnnModel& model, const NodeStates& states,
                                     const LabeledGraph& graph) {
  const auto R = model.tensor("R");
  const auto r0 = model.tensor("r0");
  const auto x = states.row(graph.output_node());
  const int s = model.state_dim();
  std::array<double, 2> logits{r0[0], r0[1]};
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < s; ++i) logits[c] += R[static_cast<std::size_t>(c) * s + i] * x[i];
  }
  return logits;
}

Probabilities softmax(std::array<double, 2> logits) {
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

Probabilities readout(const GnnModel& model, const NodeStates& states,
                      const LabeledGraph& graph) {
  return softmax(readout_logits(model, states, graph));
}

SatStatus classify(const Probabilities& p) {
  return p.sat > p.unsat ? SatStatus::Sat : SatStatus::Unsat;
}

double cross_entropy(const Probabilities& p, SatStatus target) {
  return -std::log(std::max(p.of(target), kProbabilityFloor));
}

double contraction_penalty(double jacobian_norm, double mu) {
  const double excess = std::max(0.0, jacobian_norm - mu);
  return excess * excess;
}

double loss(const Probabilities& p, SatStatus target, double penalty_weight,
            double jacobian_norm, double mu) {
  return cross_entropy(p, target) + penalty_weight * contraction_penalty(jacobian_norm, mu);
}

JacobianEstimate estimate_jacobian_norm(const GnnModel& model, const LabeledGraph& graph,
                                        const NodeStates& states, int iterations) {
  Propagator prop(model, graph);
  prop.linearize_at(states.values);
  const std::size_t size = static_cast<std::size_t>(prop.state_size());
  JacobianEstimate est;
  est.direction.assign(size, 1.0 / std::sqrt(static_cast<double>(size)));
  std::vector<double> w(size);
  std::vector<double> back(size);
  for (int k = 0; k < iterations; ++k) {
    prop.jacobian_apply(est.direction, w);
    prop.transpose_apply(w, back);
    const double nrm = norm2(back);
    if (nrm == 0.0) break;
    for (std::size_t i = 0; i < size; ++i) est.direction[i] = back[i] / nrm;
  }
  prop.jacobian_apply(est.direction, w);
  est.norm = norm2(w);
  return est;
}

double jacobian_gain(const GnnModel& model, const LabeledGraph& graph,
                     const NodeStates& states, std::span<const double> direction) {
  Propagator prop(model, graph);
  prop.linearize_at(states.values);
  std::vector<double> w(static_cast<std::size_t>(prop.state_size()));
  prop.jacobian_apply(direction, w);
  return norm2(w) / norm2(direction);
}

BackwardResult backward_fixed_point(const GnnModel& model, const LabeledGraph& graph,
                                    const NodeStates& states,
                                    std::span<const double, 2> logit_gradient,
                                    const FixedPointConfig& config,
                                    std::span<const double> state_gradient) {
  Propagator prop(model, graph);
  const std::size_t size = static_cast<std::size_t>(prop.state_size());
  if (states.values.size() != size) throw std::invalid_argument("state size mismatch");
  if (!state_gradient.empty() && state_gradient.size() != size) {
    throw std::invalid_argument("state gradient size mismatch");
  }
  const int s = model.state_dim();
  const auto R = model.tensor("R");

  // Right-hand side dL/dx: readout at the output node plus any direct term.
  std::vector<double> rhs(size, 0.0);
  if (!state_gradient.empty()) std::copy(state_gradient.begin(), state_gradient.end(), rhs.begin());
  const std::size_t out_row = static_cast<std::size_t>(graph.output_node()) * s;
  for (int i = 0; i < s; ++i) {
    rhs[out_row + i] += logit_gradient[0] * R[i] + logit_gradient[1] * R[s + i];
  }

  BackwardResult result;
  result.gradient.assign(model.num_params(), 0.0);
  prop.linearize_at(states.values);
  std::vector<double> z = rhs;
  std::vector<double> next(size);
  const bool trivial = std::all_of(rhs.begin(), rhs.end(), [](double v) { return v == 0.0; });
  if (trivial) {
    result.converged = true;
  } else {
    for (int k = 1; k <= config.max_iterations; ++k) {
      prop.transpose_apply(z, next);
      for (std::size_t i = 0; i < size; ++i) next[i] += rhs[i];
      if (!all_finite(next)) throw NumericalError("non-finite adjoint state");
      result.residual = max_abs_diff(next, z);
      z.swap(next);
      result.iterations = k;
      if (result.residual <= config.tolerance) {
        result.converged = true;
        break;
      }
    }
    prop.accumulate_parameter_gradient(z, states.values, result.gradient);
  }

  const auto& r_info = model.tensor_info("R");
  const auto& r0_info = model.tensor_info("r0");
  const auto x_out = states.row(graph.output_node());
  for (int c = 0; c < 2; ++c) {
    result.gradient[r0_info.offset + c] += logit_gradient[c];
    for (int i = 0; i < s; ++i) {
      result.gradient[r_info.offset + static_cast<std::size_t>(c) * s + i] +=
          logit_gradient[c] * x_out[i];
    }
  }
  return result;
}

ExampleResult evaluate_example(const GnnModel& model, const LabeledGraph& graph,
                               SatStatus target, const FixedPointConfig& config,
                               const LossOptions& options, bool with_gradient) {
  ExampleResult r;
  r.states = forward_fixed_point(model, graph, config);
  const auto logits = readout_logits(model, r.states, graph);
  r.probabilities = softmax(logits);
  r.cross_entropy = cross_entropy(r.probabilities, target);

  const bool penalized =
      model.variant() == Variant::Nonlinear && options.penalty_weight > 0.0;
  if (penalized) {
    if (options.frozen_direction != nullptr) {
      r.jacobian_direction = *options.frozen_direction;
      r.jacobian_norm = jacobian_gain(model, graph, r.states, r.jacobian_direction);
    } else {
      auto est = estimate_jacobian_norm(model, graph, r.states, options.power_iterations);
      r.jacobian_norm = est.norm;
      r.jacobian_direction = std::move(est.direction);
    }
    r.penalty = contraction_penalty(r.jacobian_norm, model.mu());
  }
  r.loss = r.cross_entropy + options.penalty_weight * r.penalty;
  if (!std::isfinite(r.loss)) throw NumericalError("non-finite loss");
  if (!with_gradient) return r;

  // d(-log p_t)/d logits = p - onehot(t), zero where the floor is active.
  std::array<double, 2> dlogits{0.0, 0.0};
  if (r.probabilities.of(target) > kProbabilityFloor) {
    dlogits = {r.probabilities.sat, r.probabilities.unsat};
    dlogits[target == SatStatus::Sat ? 0 : 1] -= 1.0;
  }

  std::vector<double> penalty_grad;
  std::vector<double> state_grad;
  if (penalized && r.jacobian_norm > model.mu()) {
    const double coef = options.penalty_weight * 2.0 * (r.jacobian_norm - model.mu());
    penalty_grad.assign(model.num_params(), 0.0);
    state_grad.assign(r.states.values.size(), 0.0);
    Propagator prop(model, graph);
    prop.linearize_at(r.states.values);
    const double nrm = norm2(r.jacobian_direction);
    std::vector<double> unit = r.jacobian_direction;
    for (double& v : unit) v /= nrm;
    prop.accumulate_gain_gradient(unit, r.states.values, coef, penalty_grad, state_grad);
  }
  r.backward = backward_fixed_point(model, graph, r.states, dlogits, config, state_grad);
  for (std::size_t i = 0; i < penalty_grad.size(); ++i) r.backward.gradient[i] += penalty_grad[i];
  return r;
}

}  // namespace satlab::gnn
