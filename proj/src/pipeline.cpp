#include "dyshift/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace dyshift {

FrameData frame_from_synth(const SynthScene& scene) {
    FrameData frame;
    frame.cloud = scene.cloud;
    frame.gt = scene.labels;
    frame.semantic_pred = scene.labels.semantic;
    frame.things_indices = scene.things_indices;
    frame.things_points = scene.things_points;
    frame.offsets = scene.offsets;
    frame.features = scene.features;
    return frame;
}

FrameData load_frame(const std::string& stem, const SemanticScheme& scheme) {
    FrameData frame;
    frame.stem = stem;
    Scene scene = read_scene(stem + ".bin", stem + ".label", scheme);
    frame.cloud = std::move(scene.cloud);
    frame.gt = std::move(scene.labels);
    frame.semantic_pred = frame.gt.semantic;

    const std::string sidecar = stem + ".dsx";
    if (std::filesystem::exists(sidecar)) {
        Sidecar side = read_sidecar(sidecar);
        frame.things_indices = side.things_indices;
        frame.things_points = gather_rows(frame.cloud.points, frame.things_indices);
        frame.offsets = side.offsets;
        frame.features = side.features;
        if (frame.offsets.rows() != frame.things_points.rows() ||
            frame.features.rows() != frame.things_points.rows()) {
            throw std::runtime_error("sidecar row count does not match " + sidecar);
        }
        return frame;
    }

    for (size_t i = 0; i < frame.semantic_pred.size(); ++i) {
        if (scheme.is_thing(frame.semantic_pred[i])) {
            frame.things_indices.push_back(static_cast<int>(i));
        }
    }
    frame.things_points = gather_rows(frame.cloud.points, frame.things_indices);
    frame.offsets = Points::Zero(frame.things_points.rows(), 3);
    if (frame.things_points.rows() > 0) {
        SynthScene shim;
        shim.cloud = frame.cloud;
        shim.labels = frame.gt;
        shim.things_indices = frame.things_indices;
        shim.things_points = frame.things_points;
        shim.offsets = frame.offsets;
        frame.features = gen_features(shim);
    }
    return frame;
}

ClusterAlgoConfig::Algo algo_from_name(const std::string& name) {
    if (name == "bfs") return ClusterAlgoConfig::Algo::Bfs;
    if (name == "dbscan") return ClusterAlgoConfig::Algo::Dbscan;
    if (name == "meanshift") return ClusterAlgoConfig::Algo::MeanShift;
    if (name == "dynshift") return ClusterAlgoConfig::Algo::DynShift;
    // hdbscan is deliberately absent; say so rather than "unknown".
    if (name == "hdbscan") {
        throw std::invalid_argument("algorithm 'hdbscan' is not implemented; "
                                    "choose bfs, dbscan, meanshift or dynshift");
    }
    throw std::invalid_argument("unknown algorithm '" + name +
                                "'; choose bfs, dbscan, meanshift or dynshift");
}

PanopticPrediction cluster_frame(const FrameData& frame, const ClusterAlgoConfig& config,
                                 const SemanticScheme& scheme) {
    const Eigen::Index n_things = frame.things_points.rows();
    ClusterAssignment assignment;
    if (n_things > 0) {
        Points centers = frame.things_points + frame.offsets;
        switch (config.algo) {
            case ClusterAlgoConfig::Algo::Bfs:
                assignment = bfs_cluster(centers, config.bfs_radius);
                break;
            case ClusterAlgoConfig::Algo::Dbscan:
                assignment = dbscan(centers, config.dbscan_eps, config.dbscan_min_pts);
                break;
            case ClusterAlgoConfig::Algo::MeanShift:
                assignment = mean_shift(centers, config.meanshift).assignment;
                break;
            case ClusterAlgoConfig::Algo::DynShift: {
                if (!config.model) {
                    throw std::invalid_argument("dynshift requires a trained model");
                }
                assignment = ds_forward(frame.things_points, frame.features, centers,
                                        config.model->schedule, config.model->bank,
                                        config.model->head, config.final_cluster,
                                        config.ds_seed_count, config.ds_seed)
                                 .assignment;
                break;
            }
        }
        assignment = filter_small_clusters(assignment, config.min_instance_size);
    }

    std::vector<uint32_t> instance(frame.cloud.intensity.size(), 0);
    for (Eigen::Index t = 0; t < n_things; ++t) {
        instance[static_cast<size_t>(frame.things_indices[static_cast<size_t>(t)])] =
            static_cast<uint32_t>(assignment.ids[static_cast<size_t>(t)]);
    }
    return consensus_fusion(frame.semantic_pred, instance, scheme);
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next(0);
    std::vector<std::thread> workers;
    std::atomic<bool> failed(false);
    std::exception_ptr error;
    std::mutex error_mutex;
    workers.reserve(static_cast<size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failed && error) std::rethrow_exception(error);
}

} // namespace dyshift
