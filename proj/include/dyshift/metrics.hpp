#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dyshift/fusion.hpp"
#include "dyshift/scene.hpp"

namespace dyshift {

struct ClassMetrics {
    uint64_t tp = 0, fp = 0, fn = 0;
    double iou_sum = 0.0; // over true positives
    uint64_t sem_inter = 0, sem_gt = 0, sem_pred = 0;

    bool has_segments() const { return tp + fp + fn > 0; }
    double sq() const { return tp > 0 ? iou_sum / static_cast<double>(tp) : 0.0; }
    double rq() const {
        double denom = static_cast<double>(tp) + 0.5 * static_cast<double>(fp) +
                       0.5 * static_cast<double>(fn);
        return denom > 0.0 ? static_cast<double>(tp) / denom : 0.0;
    }
    double pq() const { return sq() * rq(); }
    bool has_semantic() const { return sem_gt + sem_pred > 0; }
    double sem_iou() const {
        uint64_t uni = sem_gt + sem_pred - sem_inter;
        return uni > 0 ? static_cast<double>(sem_inter) / static_cast<double>(uni) : 0.0;
    }
};

struct PanopticReport {
    std::map<uint16_t, ClassMetrics> per_class;
    double pq = 0.0, pq_dagger = 0.0, rq = 0.0, sq = 0.0;
    double pq_things = 0.0, rq_things = 0.0, sq_things = 0.0;
    double pq_stuff = 0.0, rq_stuff = 0.0, sq_stuff = 0.0;
    double miou = 0.0;
};

// Dataset-level panoptic quality: counts accumulate over frames before any
// ratio is taken. Segments of the same class match at IoU > 0.5. Points
// whose ground-truth class is ignored are excluded everywhere.
PanopticReport panoptic_quality(const std::vector<SceneLabels>& gt,
                                const std::vector<PanopticPrediction>& pred,
                                const SemanticScheme& scheme);

struct IoUReport {
    std::map<uint16_t, double> per_class;
    double mean = 0.0;
};

// Semantic-only IoU over classes present in ground truth or prediction.
IoUReport miou(const std::vector<std::vector<uint16_t>>& gt,
               const std::vector<std::vector<uint16_t>>& pred, const SemanticScheme& scheme);

std::string report_to_json(const PanopticReport& report, const SemanticScheme& scheme);
std::string report_to_csv(const PanopticReport& report, const SemanticScheme& scheme);

} // namespace dyshift
