#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dyshift/clustering.hpp"
#include "dyshift/dynamic_shifting.hpp"
#include "dyshift/fusion.hpp"
#include "dyshift/model_io.hpp"
#include "dyshift/scene.hpp"
#include "dyshift/synthgen.hpp"

namespace dyshift {

// One frame ready for clustering: geometry, semantic predictions (ground
// truth stands in for a semantic backbone here), and the regressed-center
// ingredients for the things points.
struct FrameData {
    PointCloud cloud;
    SceneLabels gt;
    std::vector<uint16_t> semantic_pred;
    std::vector<int> things_indices; // points predicted as things
    Points things_points;
    Points offsets;  // zero when unavailable; clustering then runs on raw coordinates
    Matrix features; // per things point
    std::string stem;
};

FrameData frame_from_synth(const SynthScene& scene);

// Reads <stem>.bin/<stem>.label plus <stem>.dsx when present; without a
// sidecar, offsets are zero and features are derived from the geometry.
FrameData load_frame(const std::string& stem, const SemanticScheme& scheme);

struct ClusterAlgoConfig {
    enum class Algo { Bfs, Dbscan, MeanShift, DynShift };
    Algo algo = Algo::MeanShift;
    double bfs_radius = 1.2;
    double dbscan_eps = 1.0;
    int dbscan_min_pts = 4;
    MeanShiftParams meanshift;
    const ModelFile* model = nullptr; // required for DynShift
    FinalClusterConfig final_cluster;
    int ds_seed_count = 10000;
    uint64_t ds_seed = 0;
    int min_instance_size = 5;
};

ClusterAlgoConfig::Algo algo_from_name(const std::string& name);

// Clusters the regressed centers of the predicted-things points, filters
// undersized clusters, and fuses instance ids with the semantic prediction.
PanopticPrediction cluster_frame(const FrameData& frame, const ClusterAlgoConfig& config,
                                 const SemanticScheme& scheme);

// Runs fn(i) for i in [0, count) on up to jobs threads. Each index owns its
// output slot, so results match the serial order.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

} // namespace dyshift
