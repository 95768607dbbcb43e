#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "dyshift/types.hpp"

namespace dyshift {

// Per-point cluster ids. 0 means noise/unassigned; assigned ids form the
// contiguous range 1..num_clusters in first-touch order.
struct ClusterAssignment {
    std::vector<int> ids;
    int num_clusters = 0;
};

// Converged mode positions and how many points each one absorbed.
struct ModeSet {
    Points modes;
    std::vector<int> counts;
};

// Connected components of the distance-<=radius graph. Every point is assigned.
ClusterAssignment bfs_cluster(const Points& points, double radius);

// Density-reachability clustering. A core point has at least min_pts
// neighbors (itself included) within eps; unreachable points get id 0.
ClusterAssignment dbscan(const Points& points, double eps, int min_pts);

struct MeanShiftParams {
    double bandwidth = 1.0;
    int max_iters = 100;
    double convergence_tol = 1e-4;
    double merge_radius = -1.0; // < 0 means bandwidth / 2
    int seed_count = std::numeric_limits<int>::max();
    uint64_t seed = 0;
};

struct MeanShiftResult {
    ClusterAssignment assignment;
    ModeSet modes;
};

// Flat-kernel mean shift: seeds (FPS-sampled, or all points when seed_count
// covers the input) shift to the mean of the points inside the bandwidth
// ball until converged, converged seeds merge into modes, and every point
// joins its nearest mode.
MeanShiftResult mean_shift(const Points& points, const MeanShiftParams& params);

// Clusters with fewer than min_points members become noise (id 0);
// surviving ids are recompacted preserving their order.
ClusterAssignment filter_small_clusters(const ClusterAssignment& in, int min_points);

} // namespace dyshift
