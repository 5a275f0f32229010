#include "satlab/dataset.hpp"

#include <fstream>

#include <fmt/format.h>

#include "satlab/dimacs.hpp"
#include "satlab/rng.hpp"

namespace satlab {

std::uint64_t candidate_seed(std::uint64_t dataset_seed, std::uint64_t attempt) {
  return derive_seed(dataset_seed, attempt);
}

DatasetManifest build_balanced_dataset(int num_vars, double ratio, int count,
                                       std::uint64_t seed, const std::string& path_prefix) {
  if (count < 0 || count % 2 != 0) {
    throw std::invalid_argument("dataset count must be even and non-negative");
  }
  if (!(ratio > 0)) throw std::invalid_argument("clause-to-atom ratio must be positive");

  DatasetManifest manifest;
  manifest.spec = {num_vars, ratio, count, seed};
  const int num_clauses = manifest.spec.num_clauses();
  const int per_class = count / 2;
  const std::uint64_t budget = kAttemptsPerRecord * static_cast<std::uint64_t>(count);

  int sat = 0;
  int unsat = 0;
  std::uint64_t attempt = 0;
  while (sat < per_class || unsat < per_class) {
    if (attempt >= budget) {
      throw BudgetExhausted(
          fmt::format("attempt budget of {} exhausted at n={} ratio={}: collected {} SAT and "
                      "{} UNSAT of {} each",
                      budget, num_vars, ratio, sat, unsat, per_class),
          attempt, sat, unsat);
    }
    const std::uint64_t instance_seed = candidate_seed(seed, attempt);
    ++attempt;
    CnfFormula formula = generate_random_3sat(num_vars, num_clauses, instance_seed);
    const SatStatus label = dpll_sat(formula).status;
    int& have = label == SatStatus::Sat ? sat : unsat;
    if (have >= per_class) continue;
    ++have;
    DatasetRecord record;
    record.path = fmt::format("{}{:06d}.cnf", path_prefix, manifest.records.size());
    record.label = label;
    record.seed = instance_seed;
    record.attempts = attempt;
    record.formula = std::move(formula);
    manifest.records.push_back(std::move(record));
  }
  manifest.total_attempts = attempt;
  return manifest;
}

nlohmann::json manifest_to_json(const DatasetManifest& manifest) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : manifest.records) {
    records.push_back({{"path", r.path},
                       {"label", std::string(to_string(r.label))},
                       {"seed", r.seed},
                       {"attempts", r.attempts}});
  }
  return {{"spec",
           {{"num_vars", manifest.spec.num_vars},
            {"ratio", manifest.spec.ratio},
            {"count", manifest.spec.count},
            {"seed", manifest.spec.seed},
            {"num_clauses", manifest.spec.num_clauses()},
            {"m_max", manifest.m_max()}}},
          {"total_attempts", manifest.total_attempts},
          {"records", std::move(records)}};
}

DatasetManifest manifest_from_json(const nlohmann::json& json) {
  DatasetManifest manifest;
  const auto& spec = json.at("spec");
  manifest.spec.num_vars = spec.at("num_vars").get<int>();
  manifest.spec.ratio = spec.at("ratio").get<double>();
  manifest.spec.count = spec.at("count").get<int>();
  manifest.spec.seed = spec.at("seed").get<std::uint64_t>();
  manifest.total_attempts = json.value("total_attempts", std::uint64_t{0});
  for (const auto& r : json.at("records")) {
    DatasetRecord record;
    record.path = r.at("path").get<std::string>();
    record.label = sat_status_from_string(r.at("label").get<std::string>());
    record.seed = r.at("seed").get<std::uint64_t>();
    record.attempts = r.value("attempts", std::uint64_t{0});
    manifest.records.push_back(std::move(record));
  }
  return manifest;
}

void write_dataset(const std::filesystem::path& dir, const std::string& name,
                   const DatasetManifest& manifest) {
  std::filesystem::create_directories(dir);
  for (const auto& record : manifest.records) {
    const auto path = dir / record.path;
    std::filesystem::create_directories(path.parent_path());
    write_dimacs_file(path, record.formula);
  }
  std::ofstream out(dir / (name + ".json"), std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << manifest_to_json(manifest).dump(2) << '\n';
}

DatasetManifest read_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest_path.string());
  DatasetManifest manifest = manifest_from_json(nlohmann::json::parse(in));
  const auto base = manifest_path.parent_path();
  for (auto& record : manifest.records) record.formula = read_dimacs_file(base / record.path);
  return manifest;
}

}  // namespace satlab
