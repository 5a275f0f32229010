#include "satlab/gnn_train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace satlab::gnn {
namespace {

constexpr std::size_t kMaxChunks = 64;

// Runs fn(chunk, begin, end) over a partition of [0, count) that depends on
// count only, so any reduction done in chunk order is thread-count
// independent.
template <typename Fn>
void for_each_chunk(std::size_t count, int threads, Fn&& fn) {
  const std::size_t chunks = std::min(count, kMaxChunks);
  if (chunks == 0) return;
  auto bounds = [&](std::size_t k) { return k * count / chunks; };
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(chunks));
  if (workers == 1) {
    for (std::size_t k = 0; k < chunks; ++k) fn(k, bounds(k), bounds(k + 1));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t k = next++; k < chunks; k = next++) {
      if (failed) return;
      try {
        fn(k, bounds(k), bounds(k + 1));
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TrainingState TrainingState::fresh(const GnnModel& initial, const RpropConfig& rprop) {
  TrainingState state;
  state.current = initial;
  state.best = initial;
  state.rprop.step.assign(initial.num_params(), rprop.initial_step);
  state.rprop.previous_gradient.assign(initial.num_params(), 0.0);
  return state;
}

void rprop_step(std::span<double> params, std::span<const double> gradient, RpropState& state,
                const RpropConfig& config) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = gradient[i];
    const double product = g * state.previous_gradient[i];
    if (product > 0.0) {
      state.step[i] = std::min(state.step[i] * config.increase, config.max_step);
    } else if (product < 0.0) {
      state.step[i] = std::max(state.step[i] * config.decrease, config.min_step);
      g = 0.0;
    }
    if (g > 0.0) {
      params[i] -= state.step[i];
    } else if (g < 0.0) {
      params[i] += state.step[i];
    }
    state.previous_gradient[i] = g;
  }
}

BatchResult evaluate_batch(const GnnModel& model, std::span<const TrainingExample> examples,
                           const TrainConfig& config, bool with_gradient) {
  BatchResult result;
  result.probabilities.resize(examples.size());
  if (examples.empty()) return result;
  const std::size_t chunks = std::min(examples.size(), kMaxChunks);
  std::vector<double> chunk_loss(chunks, 0.0);
  std::vector<int> chunk_correct(chunks, 0);
  std::vector<int> chunk_fwd(chunks, 0);
  std::vector<int> chunk_adj(chunks, 0);
  std::vector<std::vector<double>> chunk_grad(with_gradient ? chunks : 0);

  LossOptions options;
  options.penalty_weight = config.penalty_weight;
  options.power_iterations = config.power_iterations;

  for_each_chunk(examples.size(), config.threads, [&](std::size_t k, std::size_t begin,
                                                      std::size_t end) {
    if (with_gradient) chunk_grad[k].assign(model.num_params(), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& ex = examples[i];
      auto r = evaluate_example(model, ex.graph, ex.target, config.fixed_point, options,
                                with_gradient);
      chunk_loss[k] += r.loss;
      chunk_correct[k] += classify(r.probabilities) == ex.target ? 1 : 0;
      chunk_fwd[k] += r.states.converged ? 0 : 1;
      result.probabilities[i] = r.probabilities;
      if (with_gradient) {
        chunk_adj[k] += r.backward.converged ? 0 : 1;
        auto& g = chunk_grad[k];
        for (std::size_t p = 0; p < g.size(); ++p) g[p] += r.backward.gradient[p];
      }
    }
  });

  const double inv = 1.0 / static_cast<double>(examples.size());
  int correct = 0;
  double total_loss = 0.0;
  for (std::size_t k = 0; k < chunks; ++k) {
    total_loss += chunk_loss[k];
    correct += chunk_correct[k];
    result.unconverged_forward += chunk_fwd[k];
    result.unconverged_adjoint += chunk_adj[k];
  }
  result.mean_loss = total_loss * inv;
  result.accuracy = correct * inv;
  if (with_gradient) {
    result.gradient.assign(model.num_params(), 0.0);
    for (std::size_t k = 0; k < chunks; ++k) {
      for (std::size_t p = 0; p < result.gradient.size(); ++p) {
        result.gradient[p] += chunk_grad[k][p];
      }
    }
    for (double& g : result.gradient) g *= inv;
  }
  return result;
}

TrainingState train(TrainingState state, std::span<const TrainingExample> train_set,
                    std::span<const TrainingExample> validation_set,
                    const TrainConfig& config, const EpochCallback& on_epoch) {
  if (train_set.empty()) throw std::invalid_argument("empty training set");
  while (state.epoch < config.epochs) {
    const int epoch = state.epoch + 1;
    BatchResult tr = evaluate_batch(state.current, train_set, config, true);
    if (!std::isfinite(tr.mean_loss) ||
        !std::all_of(tr.gradient.begin(), tr.gradient.end(),
                     [](double g) { return std::isfinite(g); })) {
      throw NumericalError(fmt::format("training diverged at epoch {}: loss {}", epoch,
                                       tr.mean_loss));
    }
    CurveRecord rec{epoch, tr.mean_loss, tr.accuracy, 0.0, 0.0};
    if (!validation_set.empty()) {
      BatchResult va = evaluate_batch(state.current, validation_set, config, false);
      rec.val_loss = va.mean_loss;
      rec.val_acc = va.accuracy;
    }
    if (rec.val_acc > state.best_val_acc) {
      state.best_val_acc = rec.val_acc;
      state.best_epoch = epoch;
      state.best = state.current;
    }
    state.curve.push_back(rec);
    if (on_epoch) on_epoch(rec, tr);
    rprop_step(state.current.params(), tr.gradient, state.rprop, config.rprop);
    state.epoch = epoch;
  }
  return state;
}

Metrics metrics_from_predictions(std::span<const Probabilities> predictions,
                                 std::span<const TrainingExample> examples) {
  if (examples.empty()) throw std::invalid_argument("cannot evaluate an empty dataset");
  Metrics m;
  m.total = static_cast<int>(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const int actual = examples[i].target == SatStatus::Sat ? 0 : 1;
    const int predicted = classify(predictions[i]) == SatStatus::Sat ? 0 : 1;
    ++m.confusion[actual][predicted];
  }
  m.correct = m.confusion[0][0] + m.confusion[1][1];
  m.accuracy = static_cast<double>(m.correct) / m.total;
  const int sat = m.confusion[0][0] + m.confusion[0][1];
  const int unsat = m.confusion[1][0] + m.confusion[1][1];
  m.sat_accuracy = sat > 0 ? static_cast<double>(m.confusion[0][0]) / sat : 0.0;
  m.unsat_accuracy = unsat > 0 ? static_cast<double>(m.confusion[1][1]) / unsat : 0.0;
  return m;
}

Metrics evaluate_accuracy(const GnnModel& model, std::span<const TrainingExample> examples,
                          const TrainConfig& config) {
  if (examples.empty()) throw std::invalid_argument("cannot evaluate an empty dataset");
  BatchResult r = evaluate_batch(model, examples, config, false);
  Metrics m = metrics_from_predictions(r.probabilities, examples);
  m.mean_loss = r.mean_loss;
  return m;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"total", m.total},
          {"correct", m.correct},
          {"accuracy", m.accuracy},
          {"sat_accuracy", m.sat_accuracy},
          {"unsat_accuracy", m.unsat_accuracy},
          {"mean_loss", m.mean_loss},
          {"confusion", {{"sat_as_sat", m.confusion[0][0]},
                         {"sat_as_unsat", m.confusion[0][1]},
                         {"unsat_as_sat", m.confusion[1][0]},
                         {"unsat_as_unsat", m.confusion[1][1]}}}};
}

namespace {

constexpr const char* kCheckpointFormat = "satlab-gnn-checkpoint";
constexpr int kCheckpointVersion = 1;

nlohmann::json tensors_to_json(const GnnModel& model) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& t : model.tensors()) out[t.name] = to_vector(model.tensor(t.name));
  return out;
}

void tensors_from_json(GnnModel& model, const nlohmann::json& json) {
  for (const auto& t : model.tensors()) {
    const auto values = json.at(t.name).get<std::vector<double>>();
    if (values.size() != t.size()) {
      throw std::runtime_error("checkpoint tensor " + t.name + " has wrong size");
    }
    std::copy(values.begin(), values.end(), model.tensor(t.name).begin());
  }
}

}  // namespace

nlohmann::json model_to_json(const GnnModel& model) {
  const auto& s = model.shape();
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"variant", std::string(to_string(s.variant))},
          {"state_dim", s.state_dim},
          {"hidden", s.hidden},
          {"node_label_dim", s.node_label_dim},
          {"edge_label_dim", s.edge_label_dim},
          {"mu", s.mu},
          {"params", tensors_to_json(model)}};
}

GnnModel model_from_json(const nlohmann::json& json) {
  if (json.value("format", std::string{}) != kCheckpointFormat) {
    throw std::runtime_error("not a satlab GNN checkpoint");
  }
  if (json.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  ModelShape shape;
  shape.variant = variant_from_string(json.at("variant").get<std::string>());
  shape.state_dim = json.at("state_dim").get<int>();
  shape.hidden = json.at("hidden").get<int>();
  shape.node_label_dim = json.at("node_label_dim").get<int>();
  shape.edge_label_dim = json.at("edge_label_dim").get<int>();
  shape.mu = json.at("mu").get<double>();
  GnnModel model(shape);
  tensors_from_json(model, json.at("params"));
  return model;
}

nlohmann::json checkpoint_to_json(const TrainingState& state) {
  nlohmann::json out = model_to_json(state.best);
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& r : state.curve) {
    curve.push_back({r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc});
  }
  out["training"] = {{"epoch", state.epoch},
                     {"best_epoch", state.best_epoch},
                     {"best_val_acc", state.best_val_acc},
                     {"current", tensors_to_json(state.current)},
                     {"rprop_step", state.rprop.step},
                     {"rprop_previous_gradient", state.rprop.previous_gradient},
                     {"curve", std::move(curve)}};
  return out;
}

TrainingState checkpoint_from_json(const nlohmann::json& json) {
  TrainingState state;
  state.best = model_from_json(json);
  state.current = state.best;
  state.rprop.step.assign(state.best.num_params(), RpropConfig{}.initial_step);
  state.rprop.previous_gradient.assign(state.best.num_params(), 0.0);
  if (!json.contains("training")) return state;
  const auto& t = json.at("training");
  state.epoch = t.at("epoch").get<int>();
  state.best_epoch = t.at("best_epoch").get<int>();
  state.best_val_acc = t.at("best_val_acc").get<double>();
  tensors_from_json(state.current, t.at("current"));
  state.rprop.step = t.at("rprop_step").get<std::vector<double>>();
  state.rprop.previous_gradient = t.at("rprop_previous_gradient").get<std::vector<double>>();
  if (state.rprop.step.size() != state.best.num_params() ||
      state.rprop.previous_gradient.size() != state.best.num_params()) {
    throw std::runtime_error("checkpoint optimizer state has wrong size");
  }
  for (const auto& row : t.at("curve")) {
    state.curve.push_back({row.at(0).get<int>(), row.at(1).get<double>(),
                           row.at(2).get<double>(), row.at(3).get<double>(),
                           row.at(4).get<double>()});
  }
  return state;
}

void write_checkpoint(const std::filesystem::path& path, const TrainingState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(state).dump() << '\n';
}

TrainingState read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return checkpoint_from_json(nlohmann::json::parse(in));
}

void write_curve_csv(std::ostream& out, std::span<const CurveRecord> curve) {
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& r : curve) {
    out << fmt::format("{},{},{},{},{}\n", r.epoch, r.train_loss, r.train_acc, r.val_loss,
                       r.val_acc);
  }
}

std::vector<CurveRecord> read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_loss,train_acc,val_loss,val_acc") {
    throw std::runtime_error("unexpected curve CSV header");
  }
  std::vector<CurveRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    CurveRecord r;
    char comma = 0;
    row >> r.epoch >> comma >> r.train_loss >> comma >> r.train_acc >> comma >> r.val_loss >>
        comma >> r.val_acc;
    if (!row) throw std::runtime_error("malformed curve CSV row: " + line);
    out.push_back(r);
  }
  return out;
}

}  // namespace satlab::gnn
