#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dyshift/config.hpp"
#include "dyshift/metrics.hpp"
#include "dyshift/pipeline.hpp"
#include "dyshift/synthgen.hpp"

namespace dyshift {

std::vector<SynthScene> gen_scenes(const SynthConfig& config, int first_index, int count);

// Per-point training views of synthetic scenes (regressed centers and the
// tight-box center of each point's instance).
std::vector<TrainingScene> to_training_scenes(const std::vector<SynthScene>& scenes);

// Clusters every scene with the given config and scores against ground truth.
PanopticReport evaluate_clustering(const std::vector<SynthScene>& scenes,
                                   const SemanticScheme& scheme, const ClusterAlgoConfig& config,
                                   int jobs = 1);

struct GridPoint {
    double bandwidth;
    PanopticReport report;
};

// Single-bandwidth mean shift over a bandwidth grid.
std::vector<GridPoint> meanshift_grid(const std::vector<SynthScene>& scenes,
                                      const SemanticScheme& scheme,
                                      const std::vector<double>& grid, int min_instance_size,
                                      int jobs = 1);

// Mean learned bandwidth per ground-truth class, over all things points.
std::map<uint16_t, double> effective_bandwidth_by_class(const std::vector<SynthScene>& scenes,
                                                        const WeightHead& head,
                                                        const BandwidthBank& bank);

// Mean learned bandwidth per iteration of the forward pass.
std::vector<double> effective_bandwidth_by_iteration(const std::vector<SynthScene>& scenes,
                                                     const ModelFile& model, int seed_count,
                                                     uint64_t seed);

struct CandidateSweepRow {
    std::vector<double> candidates;
    PanopticReport report;
};

// Trains one head per candidate set and evaluates each on the validation
// scenes (bandwidth-candidate robustness study).
std::vector<CandidateSweepRow> candidate_sweep(const std::vector<SynthScene>& train_scenes,
                                               const std::vector<SynthScene>& val_scenes,
                                               const SemanticScheme& scheme,
                                               const std::vector<std::vector<double>>& sets,
                                               const TrainConfig& base_config,
                                               const FinalClusterConfig& final_cluster,
                                               int min_instance_size, int jobs = 1);

struct IterationSweepRow {
    int iterations;
    PanopticReport report;
    LossReport mean_loss; // over validation scenes at this iteration count
};

// Evaluates a trained model at several iteration counts.
std::vector<IterationSweepRow> iteration_sweep(const std::vector<SynthScene>& val_scenes,
                                               const SemanticScheme& scheme,
                                               const ModelFile& model,
                                               const std::vector<int>& iteration_counts,
                                               int seed_count, uint64_t seed,
                                               const FinalClusterConfig& final_cluster,
                                               int min_instance_size, int jobs = 1);

// Mean validation loss report for a model (per-iteration losses averaged
// over scenes).
LossReport validation_loss(const std::vector<SynthScene>& scenes, const ModelFile& model,
                           int seed_count, uint64_t seed);

} // namespace dyshift
