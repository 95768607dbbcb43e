#include "dyshift/clustering.hpp"

#include <deque>
#include <stdexcept>

#include "dyshift/grid_index.hpp"

namespace dyshift {

ClusterAssignment bfs_cluster(const Points& points, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("bfs_cluster: radius must be positive");
    const int m = static_cast<int>(points.rows());
    ClusterAssignment out;
    out.ids.assign(static_cast<size_t>(m), 0);
    if (m == 0) return out;

    GridIndex index(points, radius);
    int next_id = 0;
    std::deque<int> queue;
    for (int i = 0; i < m; ++i) {
        if (out.ids[static_cast<size_t>(i)] != 0) continue;
        ++next_id;
        out.ids[static_cast<size_t>(i)] = next_id;
        queue.push_back(i);
        while (!queue.empty()) {
            int j = queue.front();
            queue.pop_front();
            for (int k : index.radius_query(points.row(j), radius)) {
                if (out.ids[static_cast<size_t>(k)] == 0) {
                    out.ids[static_cast<size_t>(k)] = next_id;
                    queue.push_back(k);
                }
            }
        }
    }
    out.num_clusters = next_id;
    return out;
}

ClusterAssignment dbscan(const Points& points, double eps, int min_pts) {
    if (!(eps > 0.0)) throw std::invalid_argument("dbscan: eps must be positive");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
    const int m = static_cast<int>(points.rows());
    ClusterAssignment out;
    out.ids.assign(static_cast<size_t>(m), 0);
    if (m == 0) return out;

    GridIndex index(points, eps);
    std::vector<bool> core(static_cast<size_t>(m), false);
    for (int i = 0; i < m; ++i) {
        core[static_cast<size_t>(i)] =
            static_cast<int>(index.radius_query(points.row(i), eps).size()) >= min_pts;
    }

    int next_id = 0;
    std::deque<int> queue;
    for (int i = 0; i < m; ++i) {
        if (!core[static_cast<size_t>(i)] || out.ids[static_cast<size_t>(i)] != 0) continue;
        ++next_id;
        out.ids[static_cast<size_t>(i)] = next_id;
        queue.push_back(i);
        while (!queue.empty()) {
            int j = queue.front();
            queue.pop_front();
            for (int k : index.radius_query(points.row(j), eps)) {
                if (out.ids[static_cast<size_t>(k)] != 0) continue;
                out.ids[static_cast<size_t>(k)] = next_id;
                if (core[static_cast<size_t>(k)]) queue.push_back(k);
            }
        }
    }
    out.num_clusters = next_id;
    return out;
}

MeanShiftResult mean_shift(const Points& points, const MeanShiftParams& params) {
    if (!(params.bandwidth > 0.0)) {
        throw std::invalid_argument("mean_shift: bandwidth must be positive");
    }
    if (params.max_iters < 1) throw std::invalid_argument("mean_shift: max_iters must be >= 1");
    const int m = static_cast<int>(points.rows());
    MeanShiftResult result;
    result.assignment.ids.assign(static_cast<size_t>(m), 0);
    result.modes.modes.resize(0, 3);
    if (m == 0) return result;

    const double merge_radius =
        params.merge_radius < 0.0 ? params.bandwidth / 2.0 : params.merge_radius;

    std::vector<int> seed_indices;
    if (params.seed_count >= m) {
        seed_indices.resize(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) seed_indices[static_cast<size_t>(i)] = i;
    } else {
        seed_indices = fps(points, params.seed_count, params.seed).indices;
    }

    GridIndex index(points, params.bandwidth);
    Points converged(static_cast<Eigen::Index>(seed_indices.size()), 3);
    for (size_t s = 0; s < seed_indices.size(); ++s) {
        Vec3 x = points.row(seed_indices[s]);
        for (int it = 0; it < params.max_iters; ++it) {
            auto nb = index.radius_query(x, params.bandwidth);
            if (nb.empty()) break;
            Vec3 mean = Vec3::Zero();
            for (int idx : nb) mean += points.row(idx);
            mean /= static_cast<double>(nb.size());
            double shift = (mean - x).norm();
            x = mean;
            if (shift < params.convergence_tol) break;
        }
        converged.row(static_cast<Eigen::Index>(s)) = x;
    }

    // Greedy merge in seed order; each new mode is > merge_radius from all
    // earlier ones.
    std::vector<Vec3> modes;
    for (Eigen::Index s = 0; s < converged.rows(); ++s) {
        bool merged = false;
        for (const Vec3& mode : modes) {
            if ((converged.row(s) - mode).norm() <= merge_radius) {
                merged = true;
                break;
            }
        }
        if (!merged) modes.push_back(converged.row(s));
    }

    // Assign every input point to its nearest mode.
    std::vector<int> counts(modes.size(), 0);
    std::vector<int> raw_ids(static_cast<size_t>(m), 0);
    for (int i = 0; i < m; ++i) {
        int best = 0;
        double best_d2 = (points.row(i) - modes[0]).squaredNorm();
        for (size_t mo = 1; mo < modes.size(); ++mo) {
            double d2 = (points.row(i) - modes[mo]).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<int>(mo);
            }
        }
        raw_ids[static_cast<size_t>(i)] = best;
        counts[static_cast<size_t>(best)]++;
    }

    // Drop modes that attracted no points so ids stay contiguous.
    std::vector<int> remap(modes.size(), 0);
    int next_id = 0;
    for (size_t mo = 0; mo < modes.size(); ++mo) {
        remap[mo] = counts[mo] > 0 ? ++next_id : 0;
    }
    result.modes.modes.resize(next_id, 3);
    result.modes.counts.assign(static_cast<size_t>(next_id), 0);
    for (size_t mo = 0; mo < modes.size(); ++mo) {
        if (remap[mo] > 0) {
            result.modes.modes.row(remap[mo] - 1) = modes[mo];
            result.modes.counts[static_cast<size_t>(remap[mo] - 1)] = counts[mo];
        }
    }
    for (int i = 0; i < m; ++i) {
        result.assignment.ids[static_cast<size_t>(i)] = remap[static_cast<size_t>(raw_ids[static_cast<size_t>(i)])];
    }
    result.assignment.num_clusters = next_id;
    return result;
}

ClusterAssignment filter_small_clusters(const ClusterAssignment& in, int min_points) {
    ClusterAssignment out;
    out.ids.assign(in.ids.size(), 0);
    if (in.num_clusters == 0) return out;

    std::vector<int> counts(static_cast<size_t>(in.num_clusters) + 1, 0);
    for (int id : in.ids) {
        if (id > 0) counts[static_cast<size_t>(id)]++;
    }
    std::vector<int> remap(static_cast<size_t>(in.num_clusters) + 1, 0);
    int next_id = 0;
    for (int id = 1; id <= in.num_clusters; ++id) {
        if (counts[static_cast<size_t>(id)] >= min_points) remap[static_cast<size_t>(id)] = ++next_id;
    }
    for (size_t i = 0; i < in.ids.size(); ++i) {
        if (in.ids[i] > 0) out.ids[i] = remap[static_cast<size_t>(in.ids[i])];
    }
    out.num_clusters = next_id;
    return out;
}

} // namespace dyshift
