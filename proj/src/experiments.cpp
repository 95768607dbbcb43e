#include "dyshift/experiments.hpp"

#include <map>
#include <stdexcept>

namespace dyshift {

std::vector<SynthScene> gen_scenes(const SynthConfig& config, int first_index, int count) {
    std::vector<SynthScene> scenes;
    scenes.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) scenes.push_back(gen_scene(config, first_index + i));
    return scenes;
}

std::vector<TrainingScene> to_training_scenes(const std::vector<SynthScene>& scenes) {
    std::vector<TrainingScene> out;
    out.reserve(scenes.size());
    for (const auto& scene : scenes) {
        TrainingScene ts;
        ts.points = scene.things_points;
        ts.features = scene.features;
        ts.regressed_centers = scene.things_points + scene.offsets;
        ts.gt_center_per_point.resize(scene.things_points.rows(), 3);
        std::map<uint32_t, Vec3> center_of;
        for (const auto& s : scene.instances) center_of[s.id] = s.center;
        for (Eigen::Index t = 0; t < scene.things_points.rows(); ++t) {
            const size_t row = static_cast<size_t>(scene.things_indices[static_cast<size_t>(t)]);
            ts.gt_center_per_point.row(t) = center_of.at(scene.labels.instance[row]);
        }
        out.push_back(std::move(ts));
    }
    return out;
}

PanopticReport evaluate_clustering(const std::vector<SynthScene>& scenes,
                                   const SemanticScheme& scheme, const ClusterAlgoConfig& config,
                                   int jobs) {
    std::vector<SceneLabels> gt(scenes.size());
    std::vector<PanopticPrediction> pred(scenes.size());
    parallel_for(static_cast<int>(scenes.size()), jobs, [&](int i) {
        const auto& scene = scenes[static_cast<size_t>(i)];
        gt[static_cast<size_t>(i)] = scene.labels;
        pred[static_cast<size_t>(i)] =
            cluster_frame(frame_from_synth(scene), config, scheme);
    });
    return panoptic_quality(gt, pred, scheme);
}

std::vector<GridPoint> meanshift_grid(const std::vector<SynthScene>& scenes,
                                      const SemanticScheme& scheme,
                                      const std::vector<double>& grid, int min_instance_size,
                                      int jobs) {
    std::vector<GridPoint> out;
    for (double bw : grid) {
        ClusterAlgoConfig config;
        config.algo = ClusterAlgoConfig::Algo::MeanShift;
        config.meanshift.bandwidth = bw;
        config.min_instance_size = min_instance_size;
        out.push_back({bw, evaluate_clustering(scenes, scheme, config, jobs)});
    }
    return out;
}

std::map<uint16_t, double> effective_bandwidth_by_class(const std::vector<SynthScene>& scenes,
                                                        const WeightHead& head,
                                                        const BandwidthBank& bank) {
    std::map<uint16_t, double> sums;
    std::map<uint16_t, int> counts;
    for (const auto& scene : scenes) {
        if (scene.things_points.rows() == 0) continue;
        Matrix w = weight_head_forward(scene.features, head);
        Vector eff = effective_bandwidths(w, bank);
        for (Eigen::Index t = 0; t < eff.size(); ++t) {
            const size_t row = static_cast<size_t>(scene.things_indices[static_cast<size_t>(t)]);
            const uint16_t cls = scene.labels.semantic[row];
            sums[cls] += eff(t);
            counts[cls] += 1;
        }
    }
    std::map<uint16_t, double> out;
    for (const auto& [cls, sum] : sums) out[cls] = sum / counts[cls];
    return out;
}

std::vector<double> effective_bandwidth_by_iteration(const std::vector<SynthScene>& scenes,
                                                     const ModelFile& model, int seed_count,
                                                     uint64_t seed) {
    std::vector<double> sums(static_cast<size_t>(model.schedule.iterations), 0.0);
    long total = 0;
    for (const auto& scene : scenes) {
        if (scene.things_points.rows() == 0) continue;
        auto result = ds_forward(scene.things_points, scene.features,
                                 scene.things_points + scene.offsets, model.schedule, model.bank,
                                 model.head, FinalClusterConfig{}, seed_count, seed);
        for (size_t i = 0; i < result.trace.iterations.size(); ++i) {
            Vector eff = effective_bandwidths(result.trace.iterations[i].weights, model.bank);
            sums[i] += eff.sum();
        }
        total += static_cast<long>(result.trace.iterations.front().weights.rows());
    }
    for (double& s : sums) s /= static_cast<double>(total);
    return sums;
}

std::vector<CandidateSweepRow> candidate_sweep(const std::vector<SynthScene>& train_scenes,
                                               const std::vector<SynthScene>& val_scenes,
                                               const SemanticScheme& scheme,
                                               const std::vector<std::vector<double>>& sets,
                                               const TrainConfig& base_config,
                                               const FinalClusterConfig& final_cluster,
                                               int min_instance_size, int jobs) {
    auto training = to_training_scenes(train_scenes);
    std::vector<CandidateSweepRow> out;
    for (const auto& set : sets) {
        TrainConfig config = base_config;
        config.bank.candidates = set;
        config.bank.validate();
        TrainResult trained = train(training, config);

        ModelFile model{trained.head, config.bank, config.schedule};
        ClusterAlgoConfig cc;
        cc.algo = ClusterAlgoConfig::Algo::DynShift;
        cc.model = &model;
        cc.final_cluster = final_cluster;
        cc.ds_seed_count = config.seed_count;
        cc.ds_seed = config.seed;
        cc.min_instance_size = min_instance_size;
        out.push_back({set, evaluate_clustering(val_scenes, scheme, cc, jobs)});
    }
    return out;
}

std::vector<IterationSweepRow> iteration_sweep(const std::vector<SynthScene>& val_scenes,
                                               const SemanticScheme& scheme,
                                               const ModelFile& model,
                                               const std::vector<int>& iteration_counts,
                                               int seed_count, uint64_t seed,
                                               const FinalClusterConfig& final_cluster,
                                               int min_instance_size, int jobs) {
    std::vector<IterationSweepRow> out;
    for (int iters : iteration_counts) {
        ModelFile variant = model;
        variant.schedule = IterationSchedule::uniform(iters, model.schedule.step_scale);

        ClusterAlgoConfig cc;
        cc.algo = ClusterAlgoConfig::Algo::DynShift;
        cc.model = &variant;
        cc.final_cluster = final_cluster;
        cc.ds_seed_count = seed_count;
        cc.ds_seed = seed;
        cc.min_instance_size = min_instance_size;

        IterationSweepRow row;
        row.iterations = iters;
        row.report = evaluate_clustering(val_scenes, scheme, cc, jobs);
        row.mean_loss = validation_loss(val_scenes, variant, seed_count, seed);
        out.push_back(std::move(row));
    }
    return out;
}

LossReport validation_loss(const std::vector<SynthScene>& scenes, const ModelFile& model,
                           int seed_count, uint64_t seed) {
    if (scenes.empty()) throw std::invalid_argument("validation_loss: no scenes");
    LossReport mean;
    mean.per_iteration.assign(static_cast<size_t>(model.schedule.iterations), 0.0);
    int counted = 0;
    for (const auto& scene : scenes) {
        if (scene.things_points.rows() == 0) continue;
        auto result = ds_forward(scene.things_points, scene.features,
                                 scene.things_points + scene.offsets, model.schedule, model.bank,
                                 model.head, FinalClusterConfig{}, seed_count, seed);
        std::map<uint32_t, Vec3> center_of;
        for (const auto& s : scene.instances) center_of[s.id] = s.center;
        Points gt_centers(static_cast<Eigen::Index>(result.trace.mask.indices.size()), 3);
        for (size_t s = 0; s < result.trace.mask.indices.size(); ++s) {
            const size_t row = static_cast<size_t>(
                scene.things_indices[static_cast<size_t>(result.trace.mask.indices[s])]);
            gt_centers.row(static_cast<Eigen::Index>(s)) =
                center_of.at(scene.labels.instance[row]);
        }
        LossReport r = ds_loss(result.trace, gt_centers, model.schedule);
        mean.total += r.total;
        for (size_t i = 0; i < r.per_iteration.size(); ++i) {
            mean.per_iteration[i] += r.per_iteration[i];
        }
        ++counted;
    }
    if (counted == 0) throw std::invalid_argument("validation_loss: all scenes empty");
    mean.total /= counted;
    for (double& v : mean.per_iteration) v /= counted;
    return mean;
}

} // namespace dyshift
