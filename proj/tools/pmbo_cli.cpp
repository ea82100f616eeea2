// pmbo: command-line front end for optimisation runs, hyper-parameter sweeps,
// surrogate RMSE comparisons and aggregation of earlier results.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "pmbo/config.hpp"
#include "pmbo/harness.hpp"

namespace {

struct Overrides {
  std::string config_file;
  std::vector<int> functions;
  std::vector<int> dimensions;
  std::vector<std::string> algorithms;
  std::vector<std::string> kernels;
  std::vector<double> ranges;
  std::vector<double> variances;
  std::optional<int> budget;
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::optional<int> jobs;
  bool progress = false;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_file, "YAML experiment file; flags override its keys")
      ->check(CLI::ExistingFile);
  cmd->add_option("--function", o.functions, "Benchmark id(s): 1, 6, 10, 15, 20")->delimiter(',');
  cmd->add_option("--dim", o.dimensions, "Dimension(s)")->delimiter(',');
  cmd->add_option("--algo", o.algorithms, "pmbo and/or bo_fixed")->delimiter(',');
  cmd->add_option("--kernel", o.kernels, "matern32, matern52, se")->delimiter(',');
  cmd->add_option("--range", o.ranges, "Kernel range(s) l")->delimiter(',');
  cmd->add_option("--sigma2", o.variances, "Process variance(s)")->delimiter(',');
  cmd->add_option("--budget", o.budget, "Evaluations per run (default 100 m)");
  cmd->add_option("--replicates", o.replicates, "Replicates per grid cell");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--format", o.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--progress", o.progress, "Report each finished run on stderr");
}

pmbo::ExperimentConfig resolve(const Overrides& o, pmbo::ExperimentConfig base) {
  if (!o.config_file.empty()) base = pmbo::load_experiment_config(o.config_file, std::move(base));
  if (!o.functions.empty()) base.functions = o.functions;
  if (!o.dimensions.empty()) base.dimensions = o.dimensions;
  if (!o.algorithms.empty()) {
    base.algorithms.clear();
    for (const auto& a : o.algorithms) base.algorithms.push_back(pmbo::parse_algorithm(a));
  }
  if (!o.kernels.empty()) {
    base.kernels.clear();
    for (const auto& k : o.kernels) base.kernels.push_back(pmbo::parse_kernel_family(k));
  }
  if (!o.ranges.empty()) base.ranges = o.ranges;
  if (!o.variances.empty()) base.variances = o.variances;
  if (o.budget) base.budget = *o.budget;
  if (o.replicates) base.replicates = *o.replicates;
  if (o.seed) base.seed = *o.seed;
  if (!o.out.empty()) base.output_dir = o.out;
  if (!o.format.empty()) base.format = pmbo::parse_output_format(o.format);
  if (o.jobs) base.jobs = *o.jobs;
  return base;
}

void print_summaries(const std::vector<pmbo::Summary>& summaries) {
  std::printf("%-4s %-3s %-9s %-28s %5s %14s %14s %14s %14s\n", "fid", "m", "algorithm", "cell", "runs", "median",
              "q1", "q3", "iqr");
  for (const auto& s : summaries) {
    std::string cell = "all";
    if (s.kernel) {
      cell = std::string(pmbo::to_string(s.kernel->family)) + " l=" + pmbo::format_double(s.kernel->range) +
             " s2=" + pmbo::format_double(s.kernel->process_variance);
    }
    std::printf("%-4d %-3d %-9s %-28s %5zu %14.6g %14.6g %14.6g %14.6g\n", s.function_id, s.dimension,
                std::string(pmbo::to_string(s.algorithm)).c_str(), cell.c_str(), s.runs, s.median, s.q1, s.q3,
                s.iqr());
  }
}

int execute(const pmbo::ExperimentConfig& config, bool progress, bool per_cell) {
  pmbo::ProgressCallback report_progress;
  if (progress) {
    report_progress = [](std::size_t done, std::size_t total, const pmbo::RunRecord& r) {
      std::fprintf(stderr, "[%zu/%zu] f%d m%d %s %s l=%g s2=%g r%d best=%.6g %s\n", done, total, r.function_id,
                   r.dimension, std::string(pmbo::to_string(r.algorithm)).c_str(),
                   std::string(pmbo::to_string(r.kernel.family)).c_str(), r.kernel.range, r.kernel.process_variance,
                   r.replicate, r.final_best, r.ok() ? "" : r.error.c_str());
    };
  }
  const auto report = pmbo::run_experiment(config, report_progress);
  print_summaries(per_cell ? report.cell_summaries() : report.summaries());
  for (const auto& r : report.runs) {
    if (!r.ok()) std::fprintf(stderr, "run %zu failed: %s\n", r.run_id, r.error.c_str());
  }
  if (!config.output_dir.empty()) std::printf("results written to %s\n", config.output_dir.string().c_str());
  return report.failures() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Each iteration allocates and frees multi-megabyte candidate matrices;
  // keep them on the heap instead of paying for fresh mmap'd pages each time.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
  CLI::App app{"Polynomial-model-based optimisation and fixed-hyper-parameter Bayesian optimisation"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "Run one algorithm on one function (single kernel cell)");
  add_common_flags(run, run_opts);

  Overrides sweep_opts;
  bool sweep_per_cell = false;
  auto* sweep = app.add_subcommand("sweep", "Run the kernel x range x variance grid for both algorithms");
  add_common_flags(sweep, sweep_opts);
  sweep->add_flag("--per-cell", sweep_per_cell, "Print aggregates per grid cell instead of per algorithm");

  Overrides rmse_opts;
  int rmse_samples = 50;
  int rmse_degree = 2;
  int rmse_grid = 10000;
  bool cube_units = false;
  auto* rmse = app.add_subcommand("rmse", "Compare surrogate RMSE of both algorithms on a fixed sample");
  rmse->add_option("--function", rmse_opts.functions, "Benchmark id(s)")->delimiter(',');
  rmse->add_option("--dim", rmse_opts.dimensions, "Dimension")->delimiter(',');
  rmse->add_option("--kernel", rmse_opts.kernels, "Kernel family")->delimiter(',');
  rmse->add_option("--range", rmse_opts.ranges, "Kernel range l")->delimiter(',');
  rmse->add_option("--sigma2", rmse_opts.variances, "Process variance")->delimiter(',');
  rmse->add_option("--replicates", rmse_opts.replicates, "Independent samples per function");
  rmse->add_option("--seed", rmse_opts.seed, "Master seed");
  rmse->add_option("--samples", rmse_samples, "Sample size N")->check(CLI::PositiveNumber);
  rmse->add_option("--degree", rmse_degree, "Polynomial degree of the prior mean")->check(CLI::NonNegativeNumber);
  rmse->add_option("--grid", rmse_grid, "Number of test points")->check(CLI::PositiveNumber);
  rmse->add_flag("--cube-units", cube_units, "Read --range on [-1, 1]^m instead of objective units");
  rmse->add_option("--out", rmse_opts.out, "Output directory");
  rmse->add_option("--format", rmse_opts.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  std::vector<std::string> compare_files;
  bool compare_per_cell = false;
  auto* compare = app.add_subcommand("compare", "Aggregate summary files from earlier runs");
  compare->add_option("files", compare_files, "summary.csv or summary.jsonl files")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_flag("--per-cell", compare_per_cell, "Aggregate per grid cell");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      pmbo::ExperimentConfig base;
      base.algorithms = {pmbo::Algorithm::pmbo};
      base.kernels = {pmbo::KernelFamily::matern32};
      base.ranges = {1.0};
      base.variances = {1.0};
      base.replicates = 1;
      auto config = resolve(run_opts, base);
      if (config.functions.size() != 1 || config.algorithms.size() != 1) {
        throw pmbo::Error(pmbo::ErrorKind::invalid_config, "run takes one function and one algorithm; use sweep");
      }
      return execute(config, run_opts.progress, false);
    }
    if (*sweep) {
      return execute(resolve(sweep_opts, {}), sweep_opts.progress, sweep_per_cell);
    }
    if (*rmse) {
      pmbo::RmseConfig config;
      if (!rmse_opts.functions.empty()) config.functions = rmse_opts.functions;
      if (!rmse_opts.dimensions.empty()) config.dimension = rmse_opts.dimensions.front();
      if (!rmse_opts.kernels.empty()) config.kernel.family = pmbo::parse_kernel_family(rmse_opts.kernels.front());
      if (!rmse_opts.ranges.empty()) config.kernel.range = rmse_opts.ranges.front();
      if (!rmse_opts.variances.empty()) config.kernel.process_variance = rmse_opts.variances.front();
      if (rmse_opts.replicates) config.replicates = *rmse_opts.replicates;
      if (rmse_opts.seed) config.seed = *rmse_opts.seed;
      config.samples = rmse_samples;
      config.degree = rmse_degree;
      config.grid = rmse_grid;
      config.objective_units = !cube_units;
      config.kernel.validate();
      const auto records = pmbo::run_rmse_comparison(config);

      std::printf("%-4s %-3s %-4s %14s %14s\n", "fid", "m", "rep", "rmse_pmbo", "rmse_bo_fixed");
      for (const auto& r : records) {
        std::printf("%-4d %-3d %-4d %14.6g %14.6g\n", r.function_id, r.dimension, r.replicate, r.rmse_pmbo,
                    r.rmse_bo_fixed);
      }
      if (!rmse_opts.out.empty()) {
        const std::filesystem::path dir = rmse_opts.out;
        pmbo::detail::prepare_directory(dir);
        const bool jsonl = rmse_opts.format == "jsonl";
        auto out = pmbo::detail::open_for_write(dir / (jsonl ? "rmse.jsonl" : "rmse.csv"));
        if (!jsonl) out << "function_id,dimension,replicate,seed,kernel,l,sigma2,rmse_pmbo,rmse_bo_fixed\n";
        for (const auto& r : records) {
          if (jsonl) {
            out << nlohmann::json{{"function_id", r.function_id},
                                  {"dimension", r.dimension},
                                  {"replicate", r.replicate},
                                  {"seed", r.seed},
                                  {"kernel", pmbo::to_string(r.kernel.family)},
                                  {"l", r.kernel.range},
                                  {"sigma2", r.kernel.process_variance},
                                  {"rmse_pmbo", r.rmse_pmbo},
                                  {"rmse_bo_fixed", r.rmse_bo_fixed}}
                       .dump()
                << '\n';
          } else {
            out << r.function_id << ',' << r.dimension << ',' << r.replicate << ',' << r.seed << ','
                << pmbo::to_string(r.kernel.family) << ',' << pmbo::format_double(r.kernel.range) << ','
                << pmbo::format_double(r.kernel.process_variance) << ',' << pmbo::format_double(r.rmse_pmbo) << ','
                << pmbo::format_double(r.rmse_bo_fixed) << '\n';
          }
        }
      }
      return 0;
    }
    if (*compare) {
      std::vector<pmbo::RunRecord> runs;
      for (const auto& f : compare_files) {
        auto part = pmbo::read_summary(f);
        runs.insert(runs.end(), part.begin(), part.end());
      }
      print_summaries(compare_per_cell ? pmbo::summarize_by_cell(runs) : pmbo::summarize_by_algorithm(runs));
      return 0;
    }
  } catch (const pmbo::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", pmbo::to_string(e.kind()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
