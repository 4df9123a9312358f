#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wkam/grid.hpp"
#include "wkam/model.hpp"

namespace wkam::cli {

struct ModelConfig {
  Family family = Family::Mechanical;
  Potential potential;
  double momentum_shift = 0.0;
  int wind = 1;
  double growth_constant = 1.0;
};

struct NumericsConfig {
  double vmax = 4.0;
  double cell_tol = 1e-8;
  double barrier_tol = 1e-9;
  double shoot_tol = 1e-10;
  double slope_tol = 0.15;
  double grid_tol = 0.01;
  double aubry_tol = 0.01;
  double fd_tol = 0.05;
  double limit_tol = 0.1;
  int max_periods = 400;
  std::vector<std::uint64_t> seeds;
};

struct SweepConfig {
  std::vector<double> eps_list{0.02, 0.01, 0.005, 0.0025};
};

struct StochasticConfig {
  int n_paths = 20000;
  double dt = 1e-3;
  double delta = 0.1;
  double kappa = 50.0;
  std::uint64_t seed = 1;
  std::vector<double> eps_list{0.08, 0.04, 0.02};
  double lax_epsilon = 0.02;
  double lax_kappa = 2.0;
  int lax_paths = 20000;
  double lax_dt = 2e-3;
};

struct ExampleConfig {
  bool enabled = false;
  int k = 2;
  Potential potential;
  GridSpec grid{400, 50};
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
  bool csv() const;
  bool json() const;
};

struct ExperimentConfig {
  ModelConfig model;
  GridSpec grid;
  NumericsConfig numerics;
  SweepConfig sweep;
  StochasticConfig stochastic;
  ExampleConfig example;
  OutputConfig output;
  nlohmann::json raw;   // the document as given, after overrides

  HamiltonianModel build_model() const;
};

/// Validates the document and fills defaults. Errors are ConfigurationError
/// whose message starts with the offending field path, e.g. "sweep.eps_list: ...".
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a JSON file; `seed` overrides stochastic.seed.
ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace wkam::cli
