#include "satlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "satlab/graph_encode.hpp"
#include "satlab/oracle.hpp"
#include "satlab/rng.hpp"

namespace satlab::experiment {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Copies the keys of `src` into fields registered with `field`; any key that
// was not registered is an error.
class Section {
 public:
  Section(const json& src, std::string name) : src_(src), name_(std::move(name)) {
    if (!src_.is_object()) throw std::invalid_argument("config section '" + name_ + "' must be an object");
  }

  template <typename T>
  Section& field(const char* key, T& target) {
    known_.insert(key);
    if (auto it = src_.find(key); it != src_.end()) {
      try {
        target = it->get<T>();
      } catch (const json::exception& e) {
        throw std::invalid_argument("config key '" + name_ + "." + key + "': " + e.what());
      }
    }
    return *this;
  }

  const json* sub(const char* key) {
    known_.insert(key);
    auto it = src_.find(key);
    return it == src_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : src_.items()) {
      if (!known_.count(key)) {
        throw std::invalid_argument("unknown config key '" + name_ + "." + key + "'");
      }
    }
  }

 private:
  const json& src_;
  std::string name_;
  std::set<std::string> known_;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_curves(const fs::path& path, const std::vector<gnn::CurveRecord>& curve) {
  std::ostringstream s;
  gnn::write_curve_csv(s, curve);
  write_text(path, s.str());
}

gnn::ModelShape shape_for(const ModelConfig& model, int edge_label_dim) {
  gnn::ModelShape shape;
  shape.variant = model.variant;
  shape.state_dim = model.state_dim;
  shape.hidden = model.hidden;
  shape.node_label_dim = graph::kNodeLabelDim;
  shape.edge_label_dim = edge_label_dim;
  shape.mu = model.mu;
  return shape;
}

void say(std::ostream* log, const std::string& line) {
  if (log) *log << line << '\n' << std::flush;
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
  const auto& t = c.train;
  const auto& a = c.anneal_sweep.solver;
  return {
      {"seed", c.seed},
      {"out", c.out.string()},
      {"data_dir", c.data_dir.string()},
      {"dataset",
       {{"num_vars", c.dataset.num_vars},
        {"ratio", c.dataset.ratio},
        {"train_count", c.dataset.train_count},
        {"val_count", c.dataset.val_count},
        {"test_count", c.dataset.test_count}}},
      {"model",
       {{"variant", std::string(gnn::to_string(c.model.variant))},
        {"state_dim", c.model.state_dim},
        {"hidden", c.model.hidden},
        {"mu", c.model.mu},
        {"init_scale", c.model.init_scale},
        {"compress_edge_labels", c.model.compress_edge_labels}}},
      {"train",
       {{"epochs", t.epochs},
        {"max_iterations", t.fixed_point.max_iterations},
        {"tolerance", t.fixed_point.tolerance},
        {"penalty_weight", t.penalty_weight},
        {"power_iterations", t.power_iterations},
        {"threads", t.threads},
        {"checkpoint_every", c.checkpoint_every},
        {"resume", c.resume},
        {"rprop",
         {{"initial_step", t.rprop.initial_step},
          {"increase", t.rprop.increase},
          {"decrease", t.rprop.decrease},
          {"min_step", t.rprop.min_step},
          {"max_step", t.rprop.max_step}}}}},
      {"phase_sweep",
       {{"num_vars", c.phase_sweep.num_vars},
        {"ratios", c.phase_sweep.ratios},
        {"samples", c.phase_sweep.samples}}},
      {"anneal_sweep",
       {{"num_vars", c.anneal_sweep.num_vars},
        {"ratio", c.anneal_sweep.ratio},
        {"satisfiable_per_point", c.anneal_sweep.satisfiable_per_point},
        {"restarts", a.restarts},
        {"steps", a.steps},
        {"step_size", a.step_size},
        {"beta0", a.beta0},
        {"beta_max", a.beta_max},
        {"noise", a.noise},
        {"clip", a.clip},
        {"objective", std::string(circuit::to_string(a.objective))}}},
  };
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  Section top(j, "config");
  std::string out = c.out.string();
  std::string data_dir = c.data_dir.string();
  top.field("seed", c.seed).field("out", out).field("data_dir", data_dir);
  c.out = out;
  c.data_dir = data_dir;

  if (const json* d = top.sub("dataset")) {
    Section(*d, "dataset")
        .field("num_vars", c.dataset.num_vars)
        .field("ratio", c.dataset.ratio)
        .field("train_count", c.dataset.train_count)
        .field("val_count", c.dataset.val_count)
        .field("test_count", c.dataset.test_count)
        .finish();
  }
  if (const json* m = top.sub("model")) {
    std::string variant(gnn::to_string(c.model.variant));
    Section(*m, "model")
        .field("variant", variant)
        .field("state_dim", c.model.state_dim)
        .field("hidden", c.model.hidden)
        .field("mu", c.model.mu)
        .field("init_scale", c.model.init_scale)
        .field("compress_edge_labels", c.model.compress_edge_labels)
        .finish();
    c.model.variant = gnn::variant_from_string(variant);
  }
  if (const json* t = top.sub("train")) {
    auto& tc = c.train;
    Section s(*t, "train");
    s.field("epochs", tc.epochs)
        .field("max_iterations", tc.fixed_point.max_iterations)
        .field("tolerance", tc.fixed_point.tolerance)
        .field("penalty_weight", tc.penalty_weight)
        .field("power_iterations", tc.power_iterations)
        .field("threads", tc.threads)
        .field("checkpoint_every", c.checkpoint_every)
        .field("resume", c.resume);
    if (const json* r = s.sub("rprop")) {
      Section(*r, "train.rprop")
          .field("initial_step", tc.rprop.initial_step)
          .field("increase", tc.rprop.increase)
          .field("decrease", tc.rprop.decrease)
          .field("min_step", tc.rprop.min_step)
          .field("max_step", tc.rprop.max_step)
          .finish();
    }
    s.finish();
  }
  if (const json* p = top.sub("phase_sweep")) {
    Section(*p, "phase_sweep")
        .field("num_vars", c.phase_sweep.num_vars)
        .field("ratios", c.phase_sweep.ratios)
        .field("samples", c.phase_sweep.samples)
        .finish();
  }
  if (const json* a = top.sub("anneal_sweep")) {
    auto& sc = c.anneal_sweep.solver;
    std::string objective(circuit::to_string(sc.objective));
    Section(*a, "anneal_sweep")
        .field("num_vars", c.anneal_sweep.num_vars)
        .field("ratio", c.anneal_sweep.ratio)
        .field("satisfiable_per_point", c.anneal_sweep.satisfiable_per_point)
        .field("restarts", sc.restarts)
        .field("steps", sc.steps)
        .field("step_size", sc.step_size)
        .field("beta0", sc.beta0)
        .field("beta_max", sc.beta_max)
        .field("noise", sc.noise)
        .field("clip", sc.clip)
        .field("objective", objective)
        .finish();
    sc.objective = circuit::objective_from_string(objective);
  }
  top.finish();
  c.train.seed = c.seed;
  return c;
}

ExperimentConfig read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
  };
  const auto& d = c.dataset;
  require(d.num_vars >= 3, "dataset.num_vars must be at least 3");
  require(d.ratio > 0 && std::isfinite(d.ratio), "dataset.ratio must be positive");
  for (int count : {d.train_count, d.val_count, d.test_count}) {
    require(count >= 0 && count % 2 == 0, "dataset counts must be even and non-negative");
  }
  require(c.model.state_dim >= 1 && c.model.hidden >= 1, "model dimensions must be positive");
  require(c.model.mu > 0 && c.model.mu < 1, "model.mu must lie in (0, 1)");
  require(c.train.epochs >= 0, "train.epochs must be non-negative");
  require(c.train.fixed_point.max_iterations >= 1, "train.max_iterations must be at least 1");
  require(c.train.fixed_point.tolerance > 0, "train.tolerance must be positive");
  require(c.train.penalty_weight >= 0, "train.penalty_weight must be non-negative");
  require(c.checkpoint_every >= 1, "train.checkpoint_every must be at least 1");
  require(c.phase_sweep.num_vars >= 3, "phase_sweep.num_vars must be at least 3");
  require(c.phase_sweep.samples >= 1, "phase_sweep.samples must be positive");
  for (double r : c.phase_sweep.ratios) {
    require(r >= 1.0 && r <= 12.0, fmt::format("phase_sweep ratio {} outside [1, 12]", r));
  }
  for (int n : c.anneal_sweep.num_vars) require(n >= 3, "anneal_sweep.num_vars entries must be >= 3");
  require(c.anneal_sweep.ratio > 0, "anneal_sweep.ratio must be positive");
  require(c.anneal_sweep.satisfiable_per_point >= 1, "anneal_sweep.satisfiable_per_point must be positive");
  require(c.anneal_sweep.solver.restarts >= 1 && c.anneal_sweep.solver.steps >= 0,
          "anneal_sweep needs restarts >= 1 and steps >= 0");
}

json cmd_gen(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  const auto& d = config.dataset;
  const int counts[] = {d.train_count, d.val_count, d.test_count};
  json summary = json::object();
  std::set<std::uint64_t> seen;
  for (int k = 0; k < 3; ++k) {
    const std::string split = kSplitNames[k];
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(k + 1));
    DatasetManifest m =
        build_balanced_dataset(d.num_vars, d.ratio, counts[k], seed, split + "/");
    for (const auto& r : m.records) {
      if (!seen.insert(r.seed).second) {
        throw std::runtime_error(fmt::format("instance seed {} appears in two splits", r.seed));
      }
    }
    write_dataset(config.out, split, m);
    int sat = 0;
    for (const auto& r : m.records) sat += r.label == SatStatus::Sat;
    summary[split] = {{"count", m.records.size()},
                      {"sat", sat},
                      {"unsat", static_cast<int>(m.records.size()) - sat},
                      {"attempts", m.total_attempts},
                      {"seed", seed},
                      {"m_max", m.m_max()}};
    say(log, fmt::format("{}: {} records ({} SAT) from {} candidates", split, m.records.size(),
                         sat, m.total_attempts));
  }
  return summary;
}

SplitData load_split(const fs::path& dir, const std::string& split, const ModelConfig& model) {
  SplitData data;
  data.manifest = read_dataset(dir / (split + ".json"));
  const graph::EncodeOptions options{model.compress_edge_labels};
  data.examples.reserve(data.manifest.records.size());
  for (const auto& r : data.manifest.records) {
    auto g = graph::encode_var_var(r.formula, data.manifest.m_max(), options);
    data.examples.push_back({g.to_labeled_graph(), r.label});
  }
  return data;
}

json run_record_to_json(const RunRecord& r) {
  return {{"config", r.config},
          {"metrics",
           {{"train", gnn::metrics_to_json(r.train)},
            {"val", gnn::metrics_to_json(r.val)},
            {"test", gnn::metrics_to_json(r.test)}}},
          {"epochs_run", r.epochs_run},
          {"best_epoch", r.best_epoch},
          {"curve_path", r.curve_path.string()},
          {"checkpoint_path", r.checkpoint_path.string()},
          {"wall_clock_seconds", r.wall_clock_seconds}};
}

RunRecord cmd_train(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  const fs::path data = config.dataset_dir();
  SplitData train_data = load_split(data, "train", config.model);
  SplitData val_data = load_split(data, "val", config.model);
  SplitData test_data = load_split(data, "test", config.model);
  if (train_data.examples.empty()) throw std::invalid_argument("training split is empty");
  if (val_data.manifest.m_max() != train_data.manifest.m_max() ||
      test_data.manifest.m_max() != train_data.manifest.m_max()) {
    throw std::invalid_argument("dataset splits disagree on m_max");
  }

  const int edge_dim = train_data.examples.front().graph.edge_label_dim();
  const gnn::ModelShape shape = shape_for(config.model, edge_dim);

  RunRecord record;
  record.config = config_to_json(config);
  record.curve_path = config.out / "curves.csv";
  record.checkpoint_path = config.out / "checkpoint.json";
  fs::create_directories(config.out);

  gnn::TrainingState state;
  if (config.resume && fs::exists(record.checkpoint_path)) {
    state = gnn::read_checkpoint(record.checkpoint_path);
    if (!(state.best.shape() == shape)) {
      throw std::invalid_argument("checkpoint model shape does not match the configuration");
    }
    say(log, fmt::format("resuming from epoch {}", state.epoch));
  } else {
    const auto initial =
        gnn::GnnModel::random(shape, derive_seed(config.seed, 100), config.model.init_scale);
    state = gnn::TrainingState::fresh(initial, config.train.rprop);
  }

  // Training runs in slices so a checkpoint exists every checkpoint_every
  // epochs; train() is deterministic, so slicing does not change the result.
  while (state.epoch < config.train.epochs) {
    gnn::TrainConfig slice = config.train;
    slice.epochs = std::min(config.train.epochs, state.epoch + config.checkpoint_every);
    state = gnn::train(std::move(state), train_data.examples, val_data.examples, slice,
                       [&](const gnn::CurveRecord& r, const gnn::BatchResult& b) {
                         say(log, fmt::format("epoch {:4d} train_loss {:.5f} train_acc {:.4f} "
                                              "val_loss {:.5f} val_acc {:.4f}{}",
                                              r.epoch, r.train_loss, r.train_acc, r.val_loss,
                                              r.val_acc,
                                              b.unconverged_forward > 0
                                                  ? fmt::format(" ({} unconverged)",
                                                                b.unconverged_forward)
                                                  : std::string()));
                       });
    gnn::write_checkpoint(record.checkpoint_path, state);
    write_curves(record.curve_path, state.curve);
  }
  if (state.curve.empty()) {
    gnn::write_checkpoint(record.checkpoint_path, state);
    write_curves(record.curve_path, state.curve);
  }

  record.epochs_run = state.epoch;
  record.best_epoch = state.best_epoch;
  record.train = gnn::evaluate_accuracy(state.best, train_data.examples, config.train);
  if (!val_data.examples.empty()) {
    record.val = gnn::evaluate_accuracy(state.best, val_data.examples, config.train);
  }
  if (!test_data.examples.empty()) {
    record.test = gnn::evaluate_accuracy(state.best, test_data.examples, config.train);
  }
  record.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(config.out / "run.json", run_record_to_json(record).dump(2) + "\n");
  say(log, fmt::format("best epoch {}: train {:.4f} val {:.4f} test {:.4f}", record.best_epoch,
                       record.train.accuracy, record.val.accuracy, record.test.accuracy));
  return record;
}

gnn::Metrics cmd_eval(const ExperimentConfig& config, const fs::path& checkpoint,
                      const fs::path& manifest) {
  const gnn::TrainingState state = gnn::read_checkpoint(checkpoint);
  const DatasetManifest m = read_dataset(manifest);
  const graph::EncodeOptions options{config.model.compress_edge_labels};
  std::vector<gnn::TrainingExample> examples;
  for (const auto& r : m.records) {
    auto g = graph::encode_var_var(r.formula, m.m_max(), options);
    examples.push_back({g.to_labeled_graph(), r.label});
  }
  if (!examples.empty() &&
      examples.front().graph.edge_label_dim() != state.best.shape().edge_label_dim) {
    throw std::invalid_argument("dataset edge labels do not fit the checkpoint model");
  }
  const gnn::Metrics metrics = gnn::evaluate_accuracy(state.best, examples, config.train);
  json out = gnn::metrics_to_json(metrics);
  out["checkpoint"] = checkpoint.string();
  out["manifest"] = manifest.string();
  write_text(config.out / "eval.json", out.dump(2) + "\n");
  return metrics;
}

void write_phase_csv(std::ostream& out, const std::vector<PhasePoint>& points) {
  out << "ratio,samples,satisfiable,sat_fraction\n";
  for (const auto& p : points) {
    out << fmt::format("{},{},{},{}\n", p.ratio, p.samples, p.satisfiable, p.sat_fraction());
  }
}

std::vector<PhasePoint> read_phase_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "ratio,samples,satisfiable,sat_fraction") {
    throw std::runtime_error("unexpected phase sweep CSV header");
  }
  std::vector<PhasePoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    PhasePoint p;
    double fraction = 0;
    char comma = 0;
    row >> p.ratio >> comma >> p.samples >> comma >> p.satisfiable >> comma >> fraction;
    if (!row) throw std::runtime_error("malformed phase sweep row: " + line);
    out.push_back(p);
  }
  return out;
}

std::vector<PhasePoint> cmd_phase_sweep(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  const auto& p = config.phase_sweep;
  std::vector<PhasePoint> points;
  for (std::size_t k = 0; k < p.ratios.size(); ++k) {
    const std::uint64_t point_seed = derive_seed(config.seed, 1000 + k);
    const int m = clauses_for_ratio(p.ratios[k], p.num_vars);
    PhasePoint pt{p.ratios[k], p.samples, 0};
    for (int s = 0; s < p.samples; ++s) {
      const auto f = generate_random_3sat(p.num_vars, m, derive_seed(point_seed, s));
      pt.satisfiable += dpll_sat(f).is_sat();
    }
    say(log, fmt::format("ratio {}: {}/{} satisfiable", pt.ratio, pt.satisfiable, pt.samples));
    points.push_back(pt);
  }
  std::ostringstream s;
  write_phase_csv(s, points);
  write_text(config.out / "phase_sweep.csv", s.str());
  return points;
}

void write_anneal_csv(std::ostream& out, const std::vector<AnnealPoint>& points) {
  out << "n,instances,satisfiable,solved,miss_rate\n";
  for (const auto& p : points) {
    out << fmt::format("{},{},{},{},{}\n", p.num_vars, p.instances, p.satisfiable, p.solved,
                       p.miss_rate());
  }
}

std::vector<AnnealPoint> read_anneal_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "n,instances,satisfiable,solved,miss_rate") {
    throw std::runtime_error("unexpected anneal sweep CSV header");
  }
  std::vector<AnnealPoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    AnnealPoint p;
    double miss = 0;
    char comma = 0;
    row >> p.num_vars >> comma >> p.instances >> comma >> p.satisfiable >> comma >> p.solved >>
        comma >> miss;
    if (!row) throw std::runtime_error("malformed anneal sweep row: " + line);
    out.push_back(p);
  }
  return out;
}

std::vector<AnnealPoint> cmd_anneal_sweep(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  const auto& a = config.anneal_sweep;
  std::vector<AnnealPoint> points;
  for (std::size_t k = 0; k < a.num_vars.size(); ++k) {
    const int n = a.num_vars[k];
    const int m = clauses_for_ratio(a.ratio, n);
    const std::uint64_t point_seed = derive_seed(config.seed, 2000 + k);
    const long long budget = static_cast<long long>(kAttemptsPerRecord) * a.satisfiable_per_point;
    AnnealPoint pt{n, 0, 0, 0};
    while (pt.satisfiable < a.satisfiable_per_point) {
      if (pt.instances >= budget) {
        throw std::runtime_error(fmt::format(
            "found only {} satisfiable instances in {} draws at n={} ratio={}", pt.satisfiable,
            pt.instances, n, a.ratio));
      }
      const std::uint64_t instance_seed = derive_seed(point_seed, pt.instances);
      ++pt.instances;
      const auto f = generate_random_3sat(n, m, instance_seed);
      if (!dpll_sat(f).is_sat()) continue;
      ++pt.satisfiable;
      circuit::AnnealConfig solver = a.solver;
      solver.seed = derive_seed(instance_seed, 1);
      const auto outcome = circuit::anneal_solve(circuit::encode_w(f), solver);
      pt.solved += outcome.status == circuit::SolveStatus::Solved;
    }
    say(log, fmt::format("n={}: solved {}/{} satisfiable ({} drawn), miss rate {}", n, pt.solved,
                         pt.satisfiable, pt.instances, pt.miss_rate()));
    points.push_back(pt);
  }
  std::ostringstream s;
  write_anneal_csv(s, points);
  write_text(config.out / "anneal_sweep.csv", s.str());
  return points;
}

}  // namespace satlab::experiment
