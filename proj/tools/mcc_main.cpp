#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcc/evaluation.hpp"
#include "mcc/inference.hpp"
#include "mcc/io.hpp"
#include "mcc/synthgen.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInference = 3;

struct FitArgs {
  std::string data_path;
  std::string schema_path;
  std::string out_dir = ".";
  int views = 10;
  int feature_clusters = 10;
  int object_clusters = 10;
  int restarts = 100;
  int max_iters = 500;
  int threads = 1;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  long n = 100;
  long d = 50;
  double missing = 0.0;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

struct EvaluateArgs {
  std::string truth_path;
  std::string result_path;
  std::string out_path;
};

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

int run_fit(const FitArgs& args) {
  mcc::Dataset dataset;
  try {
    std::ifstream data(args.data_path);
    if (!data) {
      std::cerr << "error: cannot read " << args.data_path << "\n";
      return kExitInput;
    }
    std::ifstream schema(args.schema_path);
    if (!schema) {
      std::cerr << "error: cannot read " << args.schema_path << "\n";
      return kExitInput;
    }
    dataset = mcc::read_dataset(data, schema);
  } catch (const mcc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  const std::vector<mcc::Violation> violations = mcc::validate(dataset);
  if (!violations.empty()) {
    for (const mcc::Violation& v : violations) {
      std::cerr << "error:";
      if (v.family >= 0) std::cerr << " family " << v.family;
      if (v.feature >= 0) std::cerr << " feature " << v.feature;
      if (v.row >= 0) std::cerr << " row " << v.row;
      std::cerr << ": " << v.reason << "\n";
    }
    return kExitInput;
  }

  mcc::TruncationConfig config;
  config.views = args.views;
  config.feature_clusters = args.feature_clusters;
  config.object_clusters = args.object_clusters;
  mcc::FitOptions options;
  options.tol = args.tol;
  options.max_iters = args.max_iters;
  options.restarts = args.restarts;
  options.base_seed = args.seed;
  options.threads = args.threads;

  mcc::ClusteringResult result;
  try {
    result = mcc::fit(dataset, config, options);
  } catch (const mcc::FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInference;
  }

  const std::filesystem::path out_dir(args.out_dir);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out = open_output(out_dir / "assignments.csv");
    mcc::write_assignments_file(result.assignments, dataset, out);
  }
  {
    std::ofstream out = open_output(out_dir / "summary.txt");
    mcc::write_summary(result, mcc::model_mode(config), out);
  }
  {
    std::ofstream out = open_output(out_dir / "elbo_trace.txt");
    mcc::write_elbo_trace(result.elbo_trace, out);
  }
  std::cout << "fit: elbo " << mcc::format_real(result.elbo) << ", active views "
            << result.active_views << ", outputs in " << out_dir.string() << "\n";
  return kExitOk;
}

std::string replicate_name(int r, const char* suffix) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "sim_%03d%s", r, suffix);
  return buffer;
}

int run_simulate(const SimulateArgs& args) {
  if (args.missing < 0.0 || args.missing >= 1.0) {
    std::cerr << "error: --missing must lie in [0, 1)\n";
    return kExitInput;
  }
  const std::filesystem::path out_dir(args.out_dir);
  std::filesystem::create_directories(out_dir);
  for (int r = 0; r < args.replicates; ++r) {
    const mcc::Scenario scenario =
        mcc::benchmark_scenario(args.n, args.d, args.missing, args.seed + r);
    mcc::Dataset dataset;
    mcc::Assignments truth;
    try {
      std::tie(dataset, truth) = mcc::generate(scenario);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInput;
    }
    if (r == 0) {
      std::ofstream out = open_output(out_dir / "schema.txt");
      mcc::write_schema(dataset, out);
    }
    {
      std::ofstream out = open_output(out_dir / replicate_name(r, ".csv"));
      mcc::write_dataset_csv(dataset, out);
    }
    {
      std::ofstream out = open_output(out_dir / replicate_name(r, "_truth.csv"));
      mcc::write_assignments_file(truth, dataset, out);
    }
  }
  std::cout << "simulate: wrote " << args.replicates << " replicate(s) to "
            << out_dir.string() << "\n";
  return kExitOk;
}

// Object partitions per view, with objects aligned by id across both files.
struct ObjectUniverse {
  std::vector<std::string> ids;
  std::map<std::string, int> position;
};

std::vector<mcc::Partition> object_partitions(const mcc::AssignmentsFile& file,
                                              ObjectUniverse& universe, bool allow_new_ids) {
  std::map<int, mcc::Partition> by_view;
  std::map<int, std::vector<bool>> filled;
  for (const auto& record : file.objects) {
    auto pos = universe.position.find(record.id);
    if (pos == universe.position.end()) {
      if (!allow_new_ids)
        throw mcc::ParseError("object '" + record.id + "' is not present in the truth file");
      pos = universe.position.emplace(record.id, static_cast<int>(universe.ids.size())).first;
      universe.ids.push_back(record.id);
    }
    auto& partition = by_view[record.view];
    auto& seen = filled[record.view];
    if (partition.labels.size() < universe.ids.size()) {
      partition.labels.resize(universe.ids.size(), 0);
      seen.resize(universe.ids.size(), false);
    }
    if (seen[pos->second])
      throw mcc::ParseError("object '" + record.id + "' appears twice in view " +
                            std::to_string(record.view));
    seen[pos->second] = true;
    partition.labels[pos->second] = record.cluster;
  }
  std::vector<mcc::Partition> partitions;
  for (auto& [view, partition] : by_view) {
    if (partition.labels.size() != universe.ids.size())
      throw mcc::ParseError("view " + std::to_string(view) +
                            " does not cover every object");
    const auto& seen = filled[view];
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (!seen[i])
        throw mcc::ParseError("object '" + universe.ids[i] + "' is missing from view " +
                              std::to_string(view));
    partitions.push_back(std::move(partition));
  }
  if (partitions.empty()) throw mcc::ParseError("no object records found");
  return partitions;
}

int run_evaluate(const EvaluateArgs& args) {
  try {
    std::ifstream truth_in(args.truth_path);
    if (!truth_in) {
      std::cerr << "error: cannot read " << args.truth_path << "\n";
      return kExitInput;
    }
    std::ifstream result_in(args.result_path);
    if (!result_in) {
      std::cerr << "error: cannot read " << args.result_path << "\n";
      return kExitInput;
    }
    const mcc::AssignmentsFile truth = mcc::read_assignments_file(truth_in);
    const mcc::AssignmentsFile result = mcc::read_assignments_file(result_in);

    std::map<std::pair<std::string, std::string>, std::size_t> feature_position;
    mcc::Partition truth_views, result_views;
    for (const auto& record : truth.features) {
      if (!feature_position.emplace(std::make_pair(record.family, record.name),
                                    truth_views.labels.size())
               .second)
        throw mcc::ParseError("duplicate feature '" + record.name + "' in the truth file");
      truth_views.labels.push_back(record.view);
    }
    if (result.features.size() != truth.features.size())
      throw mcc::ParseError("the files declare different feature counts");
    result_views.labels.assign(truth_views.labels.size(), 0);
    std::vector<bool> matched(truth_views.labels.size(), false);
    for (const auto& record : result.features) {
      const auto pos = feature_position.find({record.family, record.name});
      if (pos == feature_position.end())
        throw mcc::ParseError("feature '" + record.name +
                              "' is not present in the truth file");
      if (matched[pos->second])
        throw mcc::ParseError("duplicate feature '" + record.name + "' in the result file");
      matched[pos->second] = true;
      result_views.labels[pos->second] = record.view;
    }

    ObjectUniverse universe;
    const std::vector<mcc::Partition> truth_partitions =
        object_partitions(truth, universe, true);
    const std::vector<mcc::Partition> result_partitions =
        object_partitions(result, universe, false);

    const mcc::ViewMatch match = mcc::match_views(truth_partitions, result_partitions);
    const double view_ari = mcc::adjusted_rand_index(truth_views, result_views);

    std::ofstream out = open_output(args.out_path);
    for (std::size_t t = 0; t < match.per_true_max.size(); ++t)
      out << "object_ari_view_" << t << ' ' << mcc::format_real(match.per_true_max[t])
          << '\n';
    out << "object_ari_mean " << mcc::format_real(match.mean) << '\n';
    out << "view_ari " << mcc::format_real(view_ari) << '\n';
  } catch (const mcc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric multiple co-clustering for mixed-type tabular data"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the model to a CSV dataset");
  fit_cmd->add_option("--data", fit_args.data_path, "dataset CSV")->required();
  fit_cmd->add_option("--schema", fit_args.schema_path, "schema file")->required();
  fit_cmd->add_option("--views", fit_args.views, "view truncation")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--feature-clusters", fit_args.feature_clusters,
                      "feature-cluster truncation")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--object-clusters", fit_args.object_clusters,
                      "object-cluster truncation")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--restarts", fit_args.restarts, "random restarts")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--tol", fit_args.tol, "relative ELBO convergence tolerance")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--max-iters", fit_args.max_iters, "iteration cap per restart")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit_args.seed, "base seed");
  fit_cmd->add_option("--threads", fit_args.threads,
                      "worker threads (0 = hardware concurrency)");
  fit_cmd->add_option("--out", fit_args.out_dir, "output directory");

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Generate benchmark datasets with ground truth");
  sim_cmd->add_option("--n", sim_args.n, "objects per dataset")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--d", sim_args.d, "features per view per family")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--missing", sim_args.missing, "missing-cell ratio in [0,1)");
  sim_cmd->add_option("--replicates", sim_args.replicates, "dataset count")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_args.seed, "base seed");
  sim_cmd->add_option("--out", sim_args.out_dir, "output directory");

  EvaluateArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "Score a result against ground truth");
  eval_cmd->add_option("--truth", eval_args.truth_path, "truth assignments CSV")->required();
  eval_cmd->add_option("--result", eval_args.result_path, "result assignments CSV")
      ->required();
  eval_cmd->add_option("--out", eval_args.out_path, "metrics output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (eval_cmd->parsed()) return run_evaluate(eval_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
