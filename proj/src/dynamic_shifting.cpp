#include "dyshift/dynamic_shifting.hpp"

#include <cmath>
#include <stdexcept>

namespace dyshift {

void BandwidthBank::validate() const {
    if (candidates.empty()) throw std::invalid_argument("bandwidth bank must not be empty");
    double prev = 0.0;
    for (double c : candidates) {
        if (!(c > prev)) {
            throw std::invalid_argument("bandwidth candidates must be positive and strictly increasing");
        }
        prev = c;
    }
}

void IterationSchedule::validate() const {
    if (iterations < 1) throw std::invalid_argument("iteration count must be >= 1");
    if (step_scale < 0.0) throw std::invalid_argument("step scale must be >= 0");
    if (loss_weights.size() != static_cast<size_t>(iterations)) {
        throw std::invalid_argument("loss weight count must equal iteration count");
    }
    for (double w : loss_weights) {
        if (w < 0.0) throw std::invalid_argument("loss weights must be >= 0");
    }
}

IterationSchedule IterationSchedule::uniform(int iterations, double step_scale) {
    IterationSchedule s;
    s.iterations = iterations;
    s.step_scale = step_scale;
    s.loss_weights.assign(static_cast<size_t>(iterations), 1.0);
    s.validate();
    return s;
}

Points flat_kernel_shift(const Points& x, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("flat_kernel_shift: bandwidth must be positive");
    Points out(x.rows(), 3);
    if (x.rows() == 0) return out;
    GridIndex index(x, delta);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        auto nb = index.radius_query(x.row(i), delta);
        Vec3 mean = Vec3::Zero();
        for (int idx : nb) mean += x.row(idx);
        out.row(i) = mean / static_cast<double>(nb.size());
    }
    return out;
}

namespace {

Points ds_iteration_impl(const Points& x, const Matrix& weights, const BandwidthBank& bank,
                         double step_scale, std::vector<Points>* targets_out) {
    bank.validate();
    if (weights.rows() != x.rows() || weights.cols() != bank.size()) {
        throw std::invalid_argument("ds_iteration: weight matrix shape mismatch");
    }
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
        if (std::abs(weights.row(r).sum() - 1.0) > 1e-6) {
            throw std::invalid_argument("ds_iteration: weight rows must sum to 1");
        }
    }

    Points blend = Points::Zero(x.rows(), 3);
    for (int j = 0; j < bank.size(); ++j) {
        Points target = flat_kernel_shift(x, bank.candidates[j]);
        blend.array() += target.array().colwise() * weights.col(j).array();
        if (targets_out) targets_out->push_back(std::move(target));
    }
    return (1.0 - step_scale) * x + step_scale * blend;
}

} // namespace

Points ds_iteration(const Points& x, const Matrix& weights, const BandwidthBank& bank,
                    double step_scale) {
    return ds_iteration_impl(x, weights, bank, step_scale, nullptr);
}

DsForwardResult ds_forward(const Points& points, const Matrix& features,
                           const Points& regressed_centers, const IterationSchedule& schedule,
                           const BandwidthBank& bank, const WeightHead& head,
                           const FinalClusterConfig& final_config, int seed_count, uint64_t seed) {
    schedule.validate();
    bank.validate();
    if (seed_count < 1) throw std::invalid_argument("ds_forward: seed_count must be >= 1");
    const Eigen::Index m = points.rows();
    if (features.rows() != m || regressed_centers.rows() != m) {
        throw std::invalid_argument("ds_forward: points, features and centers must be row-aligned");
    }

    DsForwardResult result;
    if (m == 0) return result;

    result.trace.mask = fps(points, seed_count, seed);
    const auto& mask = result.trace.mask.indices;
    Points x = gather_rows(regressed_centers, mask);
    Matrix seed_features = gather_rows(features, mask);

    for (int i = 0; i < schedule.iterations; ++i) {
        DsIterationRecord record;
        record.x_before = x;
        record.weights = weight_head_forward(seed_features, head);
        x = ds_iteration_impl(x, record.weights, bank, schedule.step_scale,
                              &record.candidate_targets);
        record.x_after = x;
        result.trace.iterations.push_back(std::move(record));
    }

    ClusterAssignment seed_ids;
    if (final_config.algo == FinalClusterConfig::Algo::MeanShift) {
        MeanShiftParams params;
        params.bandwidth = final_config.meanshift_bandwidth;
        seed_ids = mean_shift(x, params).assignment;
    } else {
        seed_ids = bfs_cluster(x, final_config.bfs_radius);
    }

    // Every things point inherits the id of its nearest sampled seed, in
    // raw point coordinates.
    Points seed_positions = gather_rows(points, mask);
    GridIndex seed_index(seed_positions, bank.candidates.back());
    result.assignment.ids.assign(static_cast<size_t>(m), 0);
    for (Eigen::Index i = 0; i < m; ++i) {
        int s = seed_index.nearest(points.row(i));
        result.assignment.ids[static_cast<size_t>(i)] = seed_ids.ids[static_cast<size_t>(s)];
    }
    result.assignment.num_clusters = seed_ids.num_clusters;
    return result;
}

LossReport ds_loss(const ForwardTrace& trace, const Points& gt_centers_per_seed,
                   const IterationSchedule& schedule) {
    schedule.validate();
    if (trace.iterations.size() != static_cast<size_t>(schedule.iterations)) {
        throw std::invalid_argument("ds_loss: trace iteration count does not match schedule");
    }
    const Eigen::Index m = gt_centers_per_seed.rows();
    if (m == 0) throw std::invalid_argument("ds_loss: no seeds");

    LossReport report;
    for (int i = 0; i < schedule.iterations; ++i) {
        const Points& xi = trace.iterations[static_cast<size_t>(i)].x_after;
        if (xi.rows() != m) throw std::invalid_argument("ds_loss: seed count mismatch");
        double li = (xi - gt_centers_per_seed).cwiseAbs().sum() / static_cast<double>(m);
        report.per_iteration.push_back(li);
        report.total += schedule.loss_weights[static_cast<size_t>(i)] * li;
    }
    return report;
}

HeadGradients ds_backward(const ForwardTrace& trace, const Matrix& seed_features,
                          const WeightHead& head, const BandwidthBank& bank,
                          const Points& gt_centers_per_seed, const IterationSchedule& schedule) {
    schedule.validate();
    bank.validate();
    if (trace.iterations.size() != static_cast<size_t>(schedule.iterations)) {
        throw std::invalid_argument("ds_backward: trace iteration count does not match schedule");
    }
    const Eigen::Index m = seed_features.rows();
    if (m == 0) throw std::invalid_argument("ds_backward: no seeds");
    if (gt_centers_per_seed.rows() != m) {
        throw std::invalid_argument("ds_backward: center/feature row mismatch");
    }
    const int l = bank.size();

    // The weights are recomputed from the same features each iteration, so
    // one cached forward pass serves every iteration's backward step.
    Mlp::Cache cache;
    Matrix logits = head.mlp.forward(seed_features, cache);
    Matrix w = softmax_rows(logits);

    Matrix d_weights = Matrix::Zero(m, l);
    for (int i = 0; i < schedule.iterations; ++i) {
        const DsIterationRecord& rec = trace.iterations[static_cast<size_t>(i)];
        if (static_cast<int>(rec.candidate_targets.size()) != l) {
            throw std::invalid_argument("ds_backward: candidate target count mismatch");
        }
        // dL/dX_i for the L1 iteration loss; candidate targets are constants.
        const double scale = schedule.loss_weights[static_cast<size_t>(i)] / static_cast<double>(m);
        Matrix upstream = scale * (rec.x_after - gt_centers_per_seed).array().sign().matrix();
        for (int j = 0; j < l; ++j) {
            d_weights.col(j) += schedule.step_scale *
                                (rec.candidate_targets[static_cast<size_t>(j)].cwiseProduct(upstream))
                                    .rowwise()
                                    .sum();
        }
    }

    // Softmax backward, row-wise.
    Matrix d_logits(m, l);
    for (Eigen::Index r = 0; r < m; ++r) {
        double dot = d_weights.row(r).dot(w.row(r));
        d_logits.row(r) = w.row(r).cwiseProduct((d_weights.row(r).array() - dot).matrix());
    }

    HeadGradients grads;
    grads.mlp = head.mlp.backward(cache, d_logits, &grads.features);
    return grads;
}

Points gaussian_direct_shift(const Points& x, const Matrix& features,
                             const DirectRegressionHead& head) {
    const Eigen::Index m = x.rows();
    if (features.rows() != m) {
        throw std::invalid_argument("gaussian_direct_shift: feature row mismatch");
    }
    Points out(m, 3);
    if (m == 0) return out;
    Vector delta = head.bandwidths(features);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double inv = 1.0 / (2.0 * delta(i) * delta(i));
        double total = 0.0;
        Vec3 acc = Vec3::Zero();
        for (Eigen::Index k = 0; k < m; ++k) {
            double kij = std::exp(-(x.row(i) - x.row(k)).squaredNorm() * inv);
            total += kij;
            acc += kij * x.row(k);
        }
        out.row(i) = acc / total;
    }
    return out;
}

Vector effective_bandwidths(const Matrix& weights, const BandwidthBank& bank) {
    bank.validate();
    if (weights.cols() != bank.size()) {
        throw std::invalid_argument("effective_bandwidths: weight column count mismatch");
    }
    Vector l(bank.size());
    for (int j = 0; j < bank.size(); ++j) l(j) = bank.candidates[static_cast<size_t>(j)];
    return weights * l;
}

TrainResult train(const std::vector<TrainingScene>& dataset, const TrainConfig& config) {
    if (dataset.empty()) throw std::invalid_argument("train: dataset must not be empty");
    config.schedule.validate();
    config.bank.validate();
    if (config.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
    if (config.seed_count < 1) throw std::invalid_argument("train: seed_count must be >= 1");

    const Eigen::Index feature_width = dataset.front().features.cols();
    for (const auto& scene : dataset) {
        if (scene.points.rows() == 0) throw std::invalid_argument("train: empty scene");
        if (scene.features.cols() != feature_width ||
            scene.features.rows() != scene.points.rows() ||
            scene.regressed_centers.rows() != scene.points.rows() ||
            scene.gt_center_per_point.rows() != scene.points.rows()) {
            throw std::invalid_argument("train: inconsistent scene shapes");
        }
    }

    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(feature_width));
    for (int h : config.hidden_sizes) sizes.push_back(h);
    sizes.push_back(config.bank.size());

    TrainResult result;
    result.head.mlp = Mlp(sizes, config.seed);

    // Fixed per-scene FPS masks keep runs reproducible across epochs.
    struct Prepared {
        std::vector<int> mask;
        Points x0;
        Matrix features;
        Points gt_centers;
    };
    std::vector<Prepared> prepared;
    prepared.reserve(dataset.size());
    for (size_t s = 0; s < dataset.size(); ++s) {
        const auto& scene = dataset[s];
        Prepared p;
        p.mask = fps(scene.points, config.seed_count, config.seed + 0x9E3779B97F4A7C15ull * (s + 1)).indices;
        p.x0 = gather_rows(scene.regressed_centers, p.mask);
        p.features = gather_rows(scene.features, p.mask);
        p.gt_centers = gather_rows(scene.gt_center_per_point, p.mask);
        prepared.push_back(std::move(p));
    }

    auto run_scene = [&](const Prepared& p, ForwardTrace* trace_out) {
        ForwardTrace trace;
        trace.mask.indices = p.mask;
        Points x = p.x0;
        for (int i = 0; i < config.schedule.iterations; ++i) {
            DsIterationRecord record;
            record.x_before = x;
            record.weights = weight_head_forward(p.features, result.head);
            x = ds_iteration_impl(x, record.weights, config.bank, config.schedule.step_scale,
                                  &record.candidate_targets);
            record.x_after = x;
            trace.iterations.push_back(std::move(record));
        }
        LossReport report = ds_loss(trace, p.gt_centers, config.schedule);
        if (trace_out) *trace_out = std::move(trace);
        return report;
    };

    auto mean_report = [&](const std::vector<LossReport>& reports) {
        LossReport mean;
        mean.per_iteration.assign(static_cast<size_t>(config.schedule.iterations), 0.0);
        for (const auto& r : reports) {
            mean.total += r.total;
            for (size_t i = 0; i < r.per_iteration.size(); ++i) {
                mean.per_iteration[i] += r.per_iteration[i];
            }
        }
        mean.total /= static_cast<double>(reports.size());
        for (double& v : mean.per_iteration) v /= static_cast<double>(reports.size());
        return mean;
    };

    // Initial evaluation before any update.
    {
        std::vector<LossReport> reports;
        for (const auto& p : prepared) reports.push_back(run_scene(p, nullptr));
        result.curve.push_back(mean_report(reports));
    }

    Vector params = result.head.mlp.parameters();
    AdamState state(params.size());
    int t = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<LossReport> reports;
        for (const auto& p : prepared) {
            ForwardTrace trace;
            reports.push_back(run_scene(p, &trace));
            HeadGradients grads = ds_backward(trace, p.features, result.head, config.bank,
                                              p.gt_centers, config.schedule);
            adam_step(params, grads.mlp.flat(), state, config.adam, ++t);
            result.head.mlp.set_parameters(params);
        }
        result.curve.push_back(mean_report(reports));
    }
    return result;
}

} // namespace dyshift
