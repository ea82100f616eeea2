#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmbo/benchmarks.hpp"
#include "pmbo/error.hpp"
#include "pmbo/gp.hpp"
#include "pmbo/optimizer.hpp"

namespace pmbo {

enum class OutputFormat { csv, jsonl };

inline std::string_view to_string(OutputFormat f) noexcept { return f == OutputFormat::csv ? "csv" : "jsonl"; }

inline OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "jsonl") return OutputFormat::jsonl;
  throw Error(ErrorKind::invalid_config, "unknown output format '" + std::string(name) + "'");
}

/// Range / process-variance values of the sweep: eight decades-ish values,
/// cut to three for m = 5.
inline std::vector<double> hyper_parameter_grid(int m) {
  if (m == 5) return {1e-3, 1.0, 1000.0};
  return {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 500.0, 1000.0};
}

/// Seed streams under the experiment's master seed.
inline constexpr std::uint64_t kReplicateStream = 4;
inline constexpr std::uint64_t kShiftStream = 5;
inline constexpr std::uint64_t kRmseStream = 6;

/// Seed shared by every run of replicate r (both algorithms, every grid cell),
/// so initial designs coincide across them.
inline std::uint64_t replicate_seed(std::uint64_t master, int replicate) {
  return derive_seed(master, kReplicateStream, static_cast<std::uint64_t>(replicate));
}

struct ExperimentConfig {
  std::vector<int> functions{benchmark_id::sphere};
  std::vector<int> dimensions{2};
  std::vector<Algorithm> algorithms{Algorithm::pmbo, Algorithm::bo_fixed};
  std::vector<KernelFamily> kernels{KernelFamily::matern32, KernelFamily::matern52,
                                    KernelFamily::squared_exponential};
  std::vector<double> ranges;     // empty: hyper_parameter_grid(m)
  std::vector<double> variances;  // empty: hyper_parameter_grid(m)
  int replicates = 5;
  int budget = 0;  // 0: 100 m
  std::uint64_t seed = 1;
  bool shift = false;  // random optimum shift per replicate

  int initial_degree = 2;
  double degree_norm = 2.0;
  SamplingStrategy sampling = SamplingStrategy::simple_random;
  AcquisitionSpec acquisition;
  VarianceForm variance_form = VarianceForm::universal_kriging;

  int rmse_grid = 10000;  // test points for the final-surrogate RMSE; 0 skips it
  std::filesystem::path output_dir;  // empty: nothing is written
  OutputFormat format = OutputFormat::csv;
  bool write_traces = true;
  int jobs = 1;

  std::vector<double> ranges_for(int m) const { return ranges.empty() ? hyper_parameter_grid(m) : ranges; }
  std::vector<double> variances_for(int m) const {
    return variances.empty() ? hyper_parameter_grid(m) : variances;
  }

  void validate() const {
    if (replicates < 1) throw Error(ErrorKind::invalid_config, "replicates must be >= 1");
    if (functions.empty() || dimensions.empty() || algorithms.empty() || kernels.empty()) {
      throw Error(ErrorKind::invalid_config, "functions, dimensions, algorithms and kernels must be non-empty");
    }
    for (const auto* grid : {&ranges, &variances}) {
      for (double v : *grid) {
        if (!(v > 0.0)) throw Error(ErrorKind::invalid_config, "grid values must be positive");
      }
    }
    for (int id : functions) (void)benchmark_name(id);
    for (int m : dimensions) {
      if (m < 1) throw Error(ErrorKind::invalid_dimension, "dimension must be >= 1");
    }
    if (budget < 0) throw Error(ErrorKind::invalid_config, "budget must be >= 0");
    if (rmse_grid < 0) throw Error(ErrorKind::invalid_config, "rmse grid must be >= 0");
    if (jobs < 1) throw Error(ErrorKind::invalid_config, "jobs must be >= 1");
  }

  PmboConfig run_config(const ObjectiveSpec& objective, const KernelSpec& kernel, std::uint64_t run_seed) const {
    PmboConfig c = PmboConfig::for_objective(objective, run_seed);
    c.initial_degree = initial_degree;
    c.degree_norm = degree_norm;
    c.budget = budget;
    c.sampling = sampling;
    c.kernel = kernel;
    c.acquisition = acquisition;
    c.variance_form = variance_form;
    return c;
  }
};

/// One optimisation run of the sweep.
struct RunRecord {
  std::size_t run_id = 0;
  int function_id = 0;
  int dimension = 0;
  Algorithm algorithm = Algorithm::pmbo;
  KernelSpec kernel;
  int replicate = 0;
  std::uint64_t seed = 0;
  double final_best = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  int final_degree = -1;
  std::size_t evaluations = 0;  // objective values obtained by the run
  double wall_time_ms = 0.0;
  std::vector<double> best_so_far;
  std::string error;  // empty on success

  bool ok() const noexcept { return error.empty(); }
};

/// Median and quartiles of final_best over a group of runs.
struct Summary {
  int function_id = 0;
  int dimension = 0;
  Algorithm algorithm = Algorithm::pmbo;
  std::optional<KernelSpec> kernel;  // set when grouped per grid cell
  std::size_t runs = 0;
  double median = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();

  double iqr() const noexcept { return q3 - q1; }
};

/// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

namespace detail {

inline Summary summarize_group(const std::vector<const RunRecord*>& group, bool per_cell) {
  Summary s;
  const RunRecord& first = *group.front();
  s.function_id = first.function_id;
  s.dimension = first.dimension;
  s.algorithm = first.algorithm;
  if (per_cell) s.kernel = first.kernel;
  std::vector<double> finals;
  for (const RunRecord* r : group) {
    if (r->ok() && std::isfinite(r->final_best)) finals.push_back(r->final_best);
  }
  s.runs = finals.size();
  s.median = quantile(finals, 0.5);
  s.q1 = quantile(finals, 0.25);
  s.q3 = quantile(finals, 0.75);
  return s;
}

template <class Key, class KeyOf>
std::vector<Summary> summarize_by(const std::vector<RunRecord>& runs, KeyOf key_of, bool per_cell) {
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : runs) groups[key_of(r)].push_back(&r);
  std::vector<Summary> out;
  out.reserve(groups.size());
  for (const auto& [key, group] : groups) out.push_back(summarize_group(group, per_cell));
  return out;
}

}  // namespace detail

/// Aggregates over all grid cells and replicates, per function, dimension and algorithm.
inline std::vector<Summary> summarize_by_algorithm(const std::vector<RunRecord>& runs) {
  using Key = std::tuple<int, int, int>;
  return detail::summarize_by<Key>(
      runs, [](const RunRecord& r) { return Key{r.function_id, r.dimension, static_cast<int>(r.algorithm)}; }, false);
}

/// Aggregates over replicates only, per grid cell.
inline std::vector<Summary> summarize_by_cell(const std::vector<RunRecord>& runs) {
  using Key = std::tuple<int, int, int, int, double, double>;
  return detail::summarize_by<Key>(
      runs,
      [](const RunRecord& r) {
        return Key{r.function_id, r.dimension, static_cast<int>(r.algorithm), static_cast<int>(r.kernel.family),
                   r.kernel.range, r.kernel.process_variance};
      },
      true);
}

struct ComparisonReport {
  std::vector<RunRecord> runs;

  std::vector<Summary> summaries() const { return summarize_by_algorithm(runs); }
  std::vector<Summary> cell_summaries() const { return summarize_by_cell(runs); }
  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const auto& r) { return !r.ok(); }));
  }
};

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline double parse_double(const std::string& text) {
  if (text == "nan" || text.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw Error(ErrorKind::invalid_config, "malformed number '" + text + "'");
  return v;
}

inline constexpr std::string_view kSummaryHeader =
    "function_id,dimension,algorithm,kernel,l,sigma2,replicate,seed,final_best,rmse,n_final_degree,wall_time_ms";

inline std::string summary_csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.function_id << ',' << r.dimension << ',' << to_string(r.algorithm) << ',' << to_string(r.kernel.family) << ','
     << format_double(r.kernel.range) << ',' << format_double(r.kernel.process_variance) << ',' << r.replicate << ','
     << r.seed << ',' << format_double(r.final_best) << ',' << format_double(r.rmse) << ',' << r.final_degree << ','
     << format_double(r.wall_time_ms);
  return os.str();
}

inline nlohmann::json summary_json(const RunRecord& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"function_id", r.function_id},
          {"dimension", r.dimension},
          {"algorithm", to_string(r.algorithm)},
          {"kernel", to_string(r.kernel.family)},
          {"l", r.kernel.range},
          {"sigma2", r.kernel.process_variance},
          {"replicate", r.replicate},
          {"seed", r.seed},
          {"final_best", num(r.final_best)},
          {"rmse", num(r.rmse)},
          {"n_final_degree", r.final_degree},
          {"wall_time_ms", r.wall_time_ms}};
}

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_failure, "cannot write " + path.string());
  return out;
}

inline void prepare_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::io_failure, "cannot create output directory " + dir.string());
  }
  // create_directories succeeds on read-only directories that already exist.
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw Error(ErrorKind::io_failure, "output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace detail

/// Writes the per-run summary, the best-so-far curves and (if any run failed)
/// a failure list into `dir`. File names follow the format: summary.csv /
/// curves.csv or summary.jsonl / curves.jsonl. Curves refer to runs by run_id.
inline void emit_report(const ComparisonReport& report, const std::filesystem::path& dir, OutputFormat format) {
  detail::prepare_directory(dir);
  const std::string ext = format == OutputFormat::csv ? ".csv" : ".jsonl";
  auto summary = detail::open_for_write(dir / ("summary" + ext));
  auto curves = detail::open_for_write(dir / ("curves" + ext));
  if (format == OutputFormat::csv) {
    summary << kSummaryHeader << '\n';
    curves << "run_id,iteration,best_so_far\n";
  }
  for (const RunRecord& r : report.runs) {
    if (format == OutputFormat::csv) {
      summary << summary_csv_row(r) << '\n';
      for (std::size_t i = 0; i < r.best_so_far.size(); ++i) {
        curves << r.run_id << ',' << i << ',' << format_double(r.best_so_far[i]) << '\n';
      }
    } else {
      summary << summary_json(r).dump() << '\n';
      for (std::size_t i = 0; i < r.best_so_far.size(); ++i) {
        curves << nlohmann::json{{"run_id", r.run_id}, {"iteration", i}, {"best_so_far", r.best_so_far[i]}}.dump()
               << '\n';
      }
    }
  }
  if (report.failures() > 0) {
    auto failed = detail::open_for_write(dir / "failures.txt");
    for (const RunRecord& r : report.runs) {
      if (!r.ok()) failed << r.run_id << ": " << r.error << '\n';
    }
  }
  if (!summary || !curves) throw Error(ErrorKind::io_failure, "write to " + dir.string() + " failed");
}

/// Reads summary rows written by emit_report (csv or jsonl, chosen by the
/// file extension). Curves are not read.
inline std::vector<RunRecord> read_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_failure, "cannot read " + path.string());
  std::vector<RunRecord> runs;
  std::string line;
  if (path.extension() == ".jsonl") {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      auto num = [&](const char* key) {
        return j.at(key).is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at(key).get<double>();
      };
      RunRecord r;
      r.run_id = runs.size();
      r.function_id = j.at("function_id").get<int>();
      r.dimension = j.at("dimension").get<int>();
      r.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
      r.kernel = {parse_kernel_family(j.at("kernel").get<std::string>()), j.at("l").get<double>(),
                  j.at("sigma2").get<double>()};
      r.replicate = j.at("replicate").get<int>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.final_best = num("final_best");
      r.rmse = num("rmse");
      r.final_degree = j.at("n_final_degree").get<int>();
      r.wall_time_ms = j.at("wall_time_ms").get<double>();
      runs.push_back(std::move(r));
    }
    return runs;
  }
  if (!std::getline(in, line) || line != kSummaryHeader) {
    throw Error(ErrorKind::io_failure, path.string() + " does not start with the summary header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 12) throw Error(ErrorKind::io_failure, "malformed summary row: " + line);
    RunRecord r;
    r.run_id = runs.size();
    r.function_id = std::stoi(f[0]);
    r.dimension = std::stoi(f[1]);
    r.algorithm = parse_algorithm(f[2]);
    r.kernel = {parse_kernel_family(f[3]), parse_double(f[4]), parse_double(f[5])};
    r.replicate = std::stoi(f[6]);
    r.seed = std::stoull(f[7]);
    r.final_best = parse_double(f[8]);
    r.rmse = parse_double(f[9]);
    r.final_degree = std::stoi(f[10]);
    r.wall_time_ms = parse_double(f[11]);
    runs.push_back(std::move(r));
  }
  return runs;
}

namespace detail {

inline void write_trace(const std::filesystem::path& path, const OptimizationTrace& trace) {
  auto out = open_for_write(path);
  out << "iteration,value,best_so_far,degree,degree_increased,rank_deficient,wall_time_ms";
  const auto m = trace.records.empty() ? 0 : trace.records.front().point.size();
  for (Eigen::Index i = 0; i < m; ++i) out << ",x" << i + 1;
  out << '\n';
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << format_double(r.value) << ',' << format_double(r.best_so_far) << ',' << r.degree
        << ',' << r.degree_increased << ',' << r.rank_deficient << ',' << format_double(r.wall_time_ms);
    for (Eigen::Index i = 0; i < r.point.size(); ++i) out << ',' << format_double(r.point[i]);
    out << '\n';
  }
}

struct RunTask {
  int function_id;
  int dimension;
  Algorithm algorithm;
  KernelSpec kernel;
  int replicate;
};

inline RunRecord execute(const ExperimentConfig& config, const RunTask& task, std::size_t run_id) {
  using Clock = std::chrono::steady_clock;
  RunRecord rec;
  rec.run_id = run_id;
  rec.function_id = task.function_id;
  rec.dimension = task.dimension;
  rec.algorithm = task.algorithm;
  rec.kernel = task.kernel;
  rec.replicate = task.replicate;
  rec.seed = replicate_seed(config.seed, task.replicate);

  const auto start = Clock::now();
  std::optional<std::uint64_t> shift;
  if (config.shift) shift = derive_seed(rec.seed, kShiftStream, static_cast<std::uint64_t>(task.function_id));
  OptimizationTrace trace;
  try {
    const ObjectiveSpec objective = make_objective(task.function_id, task.dimension, shift);
    const PmboConfig run_config = config.run_config(objective, task.kernel, rec.seed);
    trace = run_algorithm(task.algorithm, objective, run_config);
    rec.evaluations = objective.calls();
    if (rec.evaluations != static_cast<std::size_t>(run_config.resolved_budget())) {
      throw Error(ErrorKind::invalid_config, "run made " + std::to_string(rec.evaluations) +
                                                 " objective calls, budget is " +
                                                 std::to_string(run_config.resolved_budget()));
    }
    if (config.rmse_grid > 0) {
      const auto surrogate = fit_surrogate(task.algorithm, trace.points(), trace.values(), run_config,
                                           std::max(trace.final_degree(), 0));
      rec.rmse = surrogate_rmse_batch([&](const Eigen::MatrixXd& pts) { return surrogate.predict(pts); }, objective,
                                      config.rmse_grid, derive_seed(rec.seed, kRmseStream, 0));
    }
  } catch (const RunError& e) {
    trace = e.partial_trace();
    rec.evaluations = trace.records.size();
    rec.error = std::string(to_string(e.kind())) + ": " + e.what();
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wall_time_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  rec.final_best = trace.records.empty() ? std::numeric_limits<double>::quiet_NaN() : trace.best_value;
  rec.final_degree = trace.final_degree();
  rec.best_so_far.reserve(trace.records.size());
  for (const auto& r : trace.records) rec.best_so_far.push_back(r.best_so_far);
  if (config.write_traces && !config.output_dir.empty() && !trace.records.empty()) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%06zu.csv", run_id);
    try {
      write_trace(config.output_dir / "traces" / name, trace);
    } catch (const Error& e) {
      if (rec.error.empty()) rec.error = e.what();
    }
  }
  return rec;
}

}  // namespace detail

/// Called after each finished run with (finished, total, record).
using ProgressCallback = std::function<void(std::size_t, std::size_t, const RunRecord&)>;

/// Runs every (function, dimension, kernel, l, sigma^2, replicate, algorithm)
/// combination. Runs are independent and spread over `jobs` threads; records
/// come back in enumeration order whatever the scheduling. Failed runs keep
/// their partial best-so-far curve and an error message. With an output
/// directory the report and one trace file per run are written there.
inline ComparisonReport run_experiment(const ExperimentConfig& config, const ProgressCallback& progress = {}) {
  config.validate();
  if (!config.output_dir.empty()) {
    detail::prepare_directory(config.output_dir);
    if (config.write_traces) detail::prepare_directory(config.output_dir / "traces");
  }

  std::vector<detail::RunTask> tasks;
  for (int id : config.functions) {
    for (int m : config.dimensions) {
      for (KernelFamily family : config.kernels) {
        for (double l : config.ranges_for(m)) {
          for (double s2 : config.variances_for(m)) {
            for (int r = 0; r < config.replicates; ++r) {
              for (Algorithm a : config.algorithms) tasks.push_back({id, m, a, KernelSpec{family, l, s2}, r});
            }
          }
        }
      }
    }
  }

  ComparisonReport report;
  report.runs.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      report.runs[i] = detail::execute(config, tasks[i], i);
      const std::size_t done = ++finished;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(done, tasks.size(), report.runs[i]);
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, config.jobs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, tasks.size()); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!config.output_dir.empty()) emit_report(report, config.output_dir, config.format);
  return report;
}

/// Kernel whose range is `range` in objective units, expressed on the cube
/// (a box of width w maps onto width 2).
inline KernelSpec kernel_in_objective_units(const ObjectiveSpec& objective, KernelSpec kernel) {
  const double width = (objective.upper() - objective.lower()).mean();
  kernel.range *= 2.0 / width;
  return kernel;
}

struct RmseConfig {
  std::vector<int> functions{benchmark_id::sphere, benchmark_id::rastrigin, benchmark_id::schwefel};
  int dimension = 2;
  int samples = 50;
  int replicates = 5;
  std::uint64_t seed = 1;
  KernelSpec kernel;            // Matern32, unit range and variance
  bool objective_units = true;  // kernel range measured in objective units
  int degree = 2;
  double degree_norm = 2.0;
  SamplingStrategy sampling = SamplingStrategy::simple_random;
  int grid = 10000;
  bool shift = false;
};

struct RmseRecord {
  int function_id = 0;
  int dimension = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  KernelSpec kernel;  // as used on the cube
  double rmse_pmbo = 0.0;
  double rmse_bo_fixed = 0.0;
};

/// Surrogate accuracy comparison: both surrogates fitted to the same sample
/// of each objective, scored on a separate uniform test set.
inline std::vector<RmseRecord> run_rmse_comparison(const RmseConfig& config) {
  if (config.samples < 1 || config.replicates < 1 || config.grid < 1) {
    throw Error(ErrorKind::invalid_config, "samples, replicates and grid must be >= 1");
  }
  std::vector<RmseRecord> out;
  for (int id : config.functions) {
    for (int r = 0; r < config.replicates; ++r) {
      RmseRecord rec;
      rec.function_id = id;
      rec.dimension = config.dimension;
      rec.replicate = r;
      rec.seed = replicate_seed(config.seed, r);
      std::optional<std::uint64_t> shift;
      if (config.shift) shift = derive_seed(rec.seed, kShiftStream, static_cast<std::uint64_t>(id));
      const ObjectiveSpec objective = make_objective(id, config.dimension, shift);
      rec.kernel = config.objective_units ? kernel_in_objective_units(objective, config.kernel) : config.kernel;

      PmboConfig pc = PmboConfig::for_objective(objective, rec.seed);
      pc.kernel = rec.kernel;
      pc.degree_norm = config.degree_norm;
      const DomainTransform domain = pc.transform();
      const Eigen::MatrixXd cube =
          initial_design(config.sampling, config.samples, config.dimension, derive_seed(rec.seed, kDesignStream, 0));
      Eigen::MatrixXd points(cube.rows(), cube.cols());
      Eigen::VectorXd values(cube.rows());
      for (Eigen::Index i = 0; i < cube.rows(); ++i) {
        const Eigen::VectorXd x = domain.from_cube(cube.row(i).transpose());
        points.row(i) = x.transpose();
        values[i] = objective.peek(x);
      }
      const std::uint64_t test_seed = derive_seed(rec.seed, kRmseStream, 0);
      for (Algorithm a : {Algorithm::pmbo, Algorithm::bo_fixed}) {
        const auto surrogate = fit_surrogate(a, points, values, pc, config.degree);
        const double e = surrogate_rmse_batch([&](const Eigen::MatrixXd& pts) { return surrogate.predict(pts); },
                                              objective, config.grid, test_seed);
        (a == Algorithm::pmbo ? rec.rmse_pmbo : rec.rmse_bo_fixed) = e;
      }
      out.push_back(rec);
    }
  }
  return out;
}

}  // namespace pmbo
