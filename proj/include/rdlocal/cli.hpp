#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rdlocal/ingest.hpp"
#include "rdlocal/synthetic.hpp"

namespace rdlocal {

struct IngestConfig {
  std::string survey;
  SurveySchema schema = default_schema();
  std::vector<std::string> outcomes;
  std::string treatment = "pami";
  std::vector<std::string> covariates = {"sexo", "inac"};
  std::string output_stem = "dataset";
};

struct GridCell {
  std::string outcome;
  DesignKind kind = DesignKind::Sharp;
  int p = 1;
  int q = 0;
  bool covariates = false;
};

struct EstimateConfig {
  std::string dataset_stem;
  std::vector<GridCell> grid;
  std::optional<FixedBandwidth> bandwidth;  // empty = data-driven
  double alpha = 0.05;
  KernelKind kernel = KernelKind::Triangular;
  InferenceConfig inference;
};

struct SimulateConfig {
  DgpSpec dgp;
  DesignSpec design;
  InferenceConfig inference;
  int replications = 1000;
  int threads = 0;
};

struct PlotConfig {
  std::string dataset_stem;
  std::vector<std::string> outcomes;
  int p = 1;
  std::optional<FixedBandwidth> bandwidth;
  KernelKind kernel = KernelKind::Triangular;
  int grid_points = 41;
  int bins = 20;
  bool use_survey_weights = false;
};

struct RunConfig {
  std::optional<IngestConfig> ingest;
  std::optional<EstimateConfig> estimate;
  std::optional<SimulateConfig> simulate;
  std::optional<PlotConfig> plotdata;
};

// Parses and validates the JSON run configuration; unknown enum strings,
// missing required keys and type mismatches raise config_error naming the key.
RunConfig load_run_config(const std::string& path);

// CLI-level overrides (flags win over the file).
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<bool> survey_weights;
};

// Each command returns its process exit code: 0 success, 1 at least one cell
// or replication batch failed, 2 configuration or schema error. They write
// machine- and human-readable outputs under out_dir.
int cmd_ingest(const RunConfig& config, const std::string& out_dir,
               std::ostream& out = std::cout, std::ostream& err = std::cerr);
int cmd_estimate(const RunConfig& config, const std::string& out_dir,
                 const CliOverrides& overrides = {}, std::ostream& out = std::cout,
                 std::ostream& err = std::cerr);
int cmd_simulate(const RunConfig& config, const std::string& out_dir,
                 const CliOverrides& overrides = {}, std::ostream& out = std::cout,
                 std::ostream& err = std::cerr);
int cmd_plotdata(const RunConfig& config, const std::string& out_dir,
                 const CliOverrides& overrides = {}, std::ostream& out = std::cout,
                 std::ostream& err = std::cerr);

}  // namespace rdlocal
