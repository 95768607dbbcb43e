#pragma once

#include <cstdint>
#include <vector>

#include "dyshift/adam.hpp"
#include "dyshift/clustering.hpp"
#include "dyshift/grid_index.hpp"
#include "dyshift/mlp.hpp"
#include "dyshift/types.hpp"

namespace dyshift {

// Strictly increasing positive bandwidth candidates, meters.
struct BandwidthBank {
    std::vector<double> candidates;

    int size() const { return static_cast<int>(candidates.size()); }
    void validate() const;
};

struct IterationSchedule {
    int iterations = 4;
    double step_scale = 1.0;
    std::vector<double> loss_weights; // one per iteration

    void validate() const;
    static IterationSchedule uniform(int iterations, double step_scale = 1.0);
};

struct DsIterationRecord {
    Points x_before;
    std::vector<Points> candidate_targets; // one M'x3 matrix per bandwidth candidate
    Matrix weights;                        // M' x l
    Points x_after;
};

struct ForwardTrace {
    SampleMask mask;
    std::vector<DsIterationRecord> iterations;

    const Points& converged() const { return iterations.back().x_after; }
};

struct LossReport {
    std::vector<double> per_iteration;
    double total = 0.0;
};

// Heuristic used to cluster the converged seeding points.
struct FinalClusterConfig {
    enum class Algo { MeanShift, Bfs };
    Algo algo = Algo::MeanShift;
    double meanshift_bandwidth = 0.65;
    double bfs_radius = 1.2;
};

// Row i becomes the mean of all rows within distance delta of row i
// (self always included).
Points flat_kernel_shift(const Points& x, double delta);

// One dynamic shifting step: blend the per-candidate flat-kernel targets
// with the per-point weights, then move by step_scale toward the blend.
Points ds_iteration(const Points& x, const Matrix& weights, const BandwidthBank& bank,
                    double step_scale = 1.0);

struct DsForwardResult {
    ClusterAssignment assignment; // over all input things points
    ForwardTrace trace;
};

// Full forward pass: FPS-sample seeds on the raw points, iterate the
// regressed centers of the sampled seeds, cluster the converged seeds with
// the configured heuristic, and propagate seed ids to every input point
// through nearest raw-position seed.
DsForwardResult ds_forward(const Points& points, const Matrix& features,
                           const Points& regressed_centers, const IterationSchedule& schedule,
                           const BandwidthBank& bank, const WeightHead& head,
                           const FinalClusterConfig& final_config, int seed_count, uint64_t seed);

// Mean per-seed L1 distance to the ground-truth centers after each
// iteration, plus the weighted total.
LossReport ds_loss(const ForwardTrace& trace, const Points& gt_centers_per_seed,
                   const IterationSchedule& schedule);

struct HeadGradients {
    Mlp::Gradients mlp;
    Matrix features; // dL/dF'
};

// Analytic gradients of the total loss w.r.t. the head parameters. The
// candidate targets recorded in the trace are treated as constants: no
// gradient flows through the kernel geometry or across iterations via the
// seed positions.
HeadGradients ds_backward(const ForwardTrace& trace, const Matrix& seed_features,
                          const WeightHead& head, const BandwidthBank& bank,
                          const Points& gt_centers_per_seed, const IterationSchedule& schedule);

// Gaussian-kernel shift with one regressed bandwidth per seed:
// K[i,k] = exp(-||x_i - x_k||^2 / (2 delta_i^2)), rows normalized.
Points gaussian_direct_shift(const Points& x, const Matrix& features,
                             const DirectRegressionHead& head);

// Per-point bandwidth candidates averaged by the learned weights.
Vector effective_bandwidths(const Matrix& weights, const BandwidthBank& bank);

struct TrainingScene {
    Points points;              // things points, M x 3
    Matrix features;            // M x D'
    Points regressed_centers;   // M x 3
    Points gt_center_per_point; // M x 3, tight-box center of each point's instance
};

struct TrainConfig {
    int epochs = 20;
    AdamConfig adam;
    uint64_t seed = 0;
    int seed_count = 10000;
    IterationSchedule schedule = IterationSchedule::uniform(4);
    BandwidthBank bank = {{0.2, 1.7, 3.2}};
    std::vector<int> hidden_sizes = {64, 64};
};

struct TrainResult {
    WeightHead head;
    std::vector<LossReport> curve; // index 0 = before any update
};

// Adam-trained weight head minimizing the mean total loss over the dataset.
// Deterministic for a fixed config.
TrainResult train(const std::vector<TrainingScene>& dataset, const TrainConfig& config);

} // namespace dyshift
