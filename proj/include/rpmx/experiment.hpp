#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpmx/archive.hpp"
#include "rpmx/config.hpp"
#include "rpmx/dataset_io.hpp"

namespace rpmx {

struct ExperimentArtifacts {
  std::vector<std::string> chain_files;
  std::string summary_file;
  std::string manifest_file;
  std::vector<std::string> predictive_files;
  std::string conditional_file;  // set when a fixed-partition rerun happened
  int dropped_rows = 0;
};

// Runs the configured sampler on the dataset: per-chain archives, pooled
// summaries, predictive grids, manifest.  Deterministic byte-for-byte given
// (config, seed, dataset).
ExperimentArtifacts run_experiment(const ExperimentConfig& cfg,
                                   const std::string& dataset_path,
                                   const std::string& out_dir);

// Reruns an experiment exactly as recorded.
ExperimentArtifacts run_from_manifest(const std::string& manifest_path,
                                      const std::string& out_dir);

// Recomputes the archive-only summaries for a directory produced by fit.
void summarize_directory(const std::string& dir, const std::string& out_file);

// Predictive density on a grid for one covariate profile, from saved chains.
void predict_from_directory(const std::string& dir,
                            const std::vector<double>& profile, double lo,
                            double hi, int points, const std::string& out_file);

// FNV-1a over the file bytes; manifest integrity check.
std::uint64_t file_hash(const std::string& path);

// Pools retained draws from several chains into one archive for summaries.
DrawArchive merge_archives(const std::vector<DrawArchive>& chains);

}  // namespace rpmx
