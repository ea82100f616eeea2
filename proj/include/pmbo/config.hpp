#pragma once

#include <filesystem>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "pmbo/harness.hpp"

namespace pmbo {

namespace detail {

template <class T, class Parse>
std::vector<T> yaml_list(const YAML::Node& node, Parse parse) {
  std::vector<T> out;
  if (node.IsSequence()) {
    for (const auto& item : node) out.push_back(parse(item));
  } else {
    out.push_back(parse(node));
  }
  return out;
}

inline double yaml_norm(const YAML::Node& node) {
  const auto text = node.as<std::string>();
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  return node.as<double>();
}

}  // namespace detail

/// Applies the keys of a YAML mapping on top of `config`. Scalars and lists
/// are both accepted where a list is expected. Unknown keys are an error.
///
///   functions: [1, 15]        dimensions: [2]         algorithms: [pmbo, bo_fixed]
///   kernels: [matern32, matern52, se]                 ranges: [...]   variances: [...]
///   replicates, budget, seed, shift, initial_degree, degree_norm (number or inf),
///   sampling (random|sobol|lcl), acquisition (ei|pi|ucb), ucb_beta, candidates,
///   refine, literal_variance, rmse_grid, out, format (csv|jsonl), traces, jobs
inline void apply_yaml(ExperimentConfig& config, const YAML::Node& root) {
  if (!root || root.IsNull()) return;
  if (!root.IsMap()) throw Error(ErrorKind::invalid_config, "config file must be a mapping of keys to values");
  static const std::set<std::string> known{
      "functions", "dimensions", "algorithms", "kernels",   "ranges",      "variances",        "replicates",
      "budget",    "seed",       "shift",      "initial_degree", "degree_norm", "sampling",   "acquisition",
      "ucb_beta",  "candidates", "refine",     "literal_variance", "rmse_grid", "out",        "format",
      "traces",    "jobs"};
  try {
    for (const auto& kv : root) {
      const auto key = kv.first.as<std::string>();
      if (!known.contains(key)) throw Error(ErrorKind::invalid_config, "unknown config key '" + key + "'");
    }
    auto as_int = [](const YAML::Node& n) { return n.as<int>(); };
    auto as_double = [](const YAML::Node& n) { return n.as<double>(); };
    if (root["functions"]) config.functions = detail::yaml_list<int>(root["functions"], as_int);
    if (root["dimensions"]) config.dimensions = detail::yaml_list<int>(root["dimensions"], as_int);
    if (root["algorithms"]) {
      config.algorithms = detail::yaml_list<Algorithm>(
          root["algorithms"], [](const YAML::Node& n) { return parse_algorithm(n.as<std::string>()); });
    }
    if (root["kernels"]) {
      config.kernels = detail::yaml_list<KernelFamily>(
          root["kernels"], [](const YAML::Node& n) { return parse_kernel_family(n.as<std::string>()); });
    }
    if (root["ranges"]) config.ranges = detail::yaml_list<double>(root["ranges"], as_double);
    if (root["variances"]) config.variances = detail::yaml_list<double>(root["variances"], as_double);
    if (root["replicates"]) config.replicates = root["replicates"].as<int>();
    if (root["budget"]) config.budget = root["budget"].as<int>();
    if (root["seed"]) config.seed = root["seed"].as<std::uint64_t>();
    if (root["shift"]) config.shift = root["shift"].as<bool>();
    if (root["initial_degree"]) config.initial_degree = root["initial_degree"].as<int>();
    if (root["degree_norm"]) config.degree_norm = detail::yaml_norm(root["degree_norm"]);
    if (root["sampling"]) config.sampling = parse_sampling_strategy(root["sampling"].as<std::string>());
    if (root["acquisition"]) config.acquisition.family = parse_acquisition_family(root["acquisition"].as<std::string>());
    if (root["ucb_beta"]) config.acquisition.ucb_beta = root["ucb_beta"].as<double>();
    if (root["candidates"]) config.acquisition.candidate_count = root["candidates"].as<int>();
    if (root["refine"]) config.acquisition.refine = root["refine"].as<bool>();
    if (root["literal_variance"]) {
      config.variance_form =
          root["literal_variance"].as<bool>() ? VarianceForm::literal : VarianceForm::universal_kriging;
    }
    if (root["rmse_grid"]) config.rmse_grid = root["rmse_grid"].as<int>();
    if (root["out"]) config.output_dir = root["out"].as<std::string>();
    if (root["format"]) config.format = parse_output_format(root["format"].as<std::string>());
    if (root["traces"]) config.write_traces = root["traces"].as<bool>();
    if (root["jobs"]) config.jobs = root["jobs"].as<int>();
  } catch (const YAML::Exception& e) {
    throw Error(ErrorKind::invalid_config, std::string("config: ") + e.what());
  }
}

inline ExperimentConfig parse_experiment_config(const std::string& text, ExperimentConfig base = {}) {
  try {
    apply_yaml(base, YAML::Load(text));
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::invalid_config, std::string("config: ") + e.what());
  }
  return base;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path, ExperimentConfig base = {}) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw Error(ErrorKind::io_failure, "cannot read config file " + path.string());
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::invalid_config, path.string() + ": " + e.what());
  }
  apply_yaml(base, root);
  return base;
}

}  // namespace pmbo
