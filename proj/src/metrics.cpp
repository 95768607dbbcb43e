#include "dyshift/metrics.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dyshift {

namespace {

// Segment key: (class id, instance id); stuff segments use instance 0.
using SegKey = std::pair<uint16_t, uint32_t>;

void check_known(uint16_t id, const SemanticScheme& scheme, const char* side) {
    if (!scheme.is_known(id) && !scheme.is_ignored(id)) {
        throw std::invalid_argument(std::string(side) + " contains unknown class id " +
                                    std::to_string(id));
    }
}

} // namespace

PanopticReport panoptic_quality(const std::vector<SceneLabels>& gt,
                                const std::vector<PanopticPrediction>& pred,
                                const SemanticScheme& scheme) {
    if (gt.size() != pred.size()) {
        throw std::invalid_argument("panoptic_quality: frame count mismatch (" +
                                    std::to_string(gt.size()) + " gt vs " +
                                    std::to_string(pred.size()) + " pred)");
    }

    PanopticReport report;
    auto& per_class = report.per_class;

    for (size_t f = 0; f < gt.size(); ++f) {
        const auto& g = gt[f];
        const auto& p = pred[f];
        const size_t m = g.semantic.size();
        if (g.instance.size() != m || p.semantic.size() != m || p.instance.size() != m) {
            throw std::invalid_argument("panoptic_quality: frame " + std::to_string(f) +
                                        " has misaligned point counts");
        }

        std::map<SegKey, uint64_t> gt_size, pred_size;
        std::map<std::pair<SegKey, SegKey>, uint64_t> overlap;

        for (size_t i = 0; i < m; ++i) {
            const uint16_t gs = g.semantic[i];
            if (scheme.is_ignored(gs)) continue;
            check_known(gs, scheme, "ground truth");
            const uint16_t ps = p.semantic[i];
            check_known(ps, scheme, "prediction");

            per_class[gs].sem_gt++;
            if (!scheme.is_ignored(ps)) per_class[ps].sem_pred++;
            if (gs == ps) per_class[gs].sem_inter++;

            bool has_gt_seg = false, has_pred_seg = false;
            SegKey gt_key{0, 0}, pred_key{0, 0};
            if (g.instance[i] > 0) {
                gt_key = {gs, g.instance[i]};
                has_gt_seg = true;
            } else if (scheme.is_stuff(gs)) {
                gt_key = {gs, 0};
                has_gt_seg = true;
            }
            if (scheme.is_thing(ps)) {
                if (p.instance[i] > 0) {
                    pred_key = {ps, p.instance[i]};
                    has_pred_seg = true;
                }
            } else if (scheme.is_stuff(ps)) {
                pred_key = {ps, 0};
                has_pred_seg = true;
            }

            if (has_gt_seg) gt_size[gt_key]++;
            if (has_pred_seg) pred_size[pred_key]++;
            if (has_gt_seg && has_pred_seg) overlap[{gt_key, pred_key}]++;
        }

        std::set<SegKey> gt_matched, pred_matched;
        for (const auto& [keys, ov] : overlap) {
            const auto& [gk, pk] = keys;
            if (gk.first != pk.first) continue;
            const double iou = static_cast<double>(ov) /
                               static_cast<double>(gt_size[gk] + pred_size[pk] - ov);
            if (iou > 0.5) {
                per_class[gk.first].tp++;
                per_class[gk.first].iou_sum += iou;
                gt_matched.insert(gk);
                pred_matched.insert(pk);
            }
        }
        for (const auto& [key, size] : gt_size) {
            (void)size;
            if (!gt_matched.count(key)) per_class[key.first].fn++;
        }
        for (const auto& [key, size] : pred_size) {
            (void)size;
            if (!pred_matched.count(key)) per_class[key.first].fp++;
        }
    }

    // Unweighted means over classes with at least one segment on either side.
    int n = 0, n_things = 0, n_stuff = 0, n_sem = 0;
    for (const auto& [cid, cm] : per_class) {
        if (cm.has_segments()) {
            ++n;
            report.pq += cm.pq();
            report.rq += cm.rq();
            report.sq += cm.sq();
            report.pq_dagger += scheme.is_stuff(cid) ? cm.sem_iou() : cm.pq();
            if (scheme.is_thing(cid)) {
                ++n_things;
                report.pq_things += cm.pq();
                report.rq_things += cm.rq();
                report.sq_things += cm.sq();
            } else if (scheme.is_stuff(cid)) {
                ++n_stuff;
                report.pq_stuff += cm.pq();
                report.rq_stuff += cm.rq();
                report.sq_stuff += cm.sq();
            }
        }
        if (cm.has_semantic()) {
            ++n_sem;
            report.miou += cm.sem_iou();
        }
    }
    if (n > 0) {
        report.pq /= n;
        report.rq /= n;
        report.sq /= n;
        report.pq_dagger /= n;
    }
    if (n_things > 0) {
        report.pq_things /= n_things;
        report.rq_things /= n_things;
        report.sq_things /= n_things;
    }
    if (n_stuff > 0) {
        report.pq_stuff /= n_stuff;
        report.rq_stuff /= n_stuff;
        report.sq_stuff /= n_stuff;
    }
    if (n_sem > 0) report.miou /= n_sem;
    return report;
}

IoUReport miou(const std::vector<std::vector<uint16_t>>& gt,
               const std::vector<std::vector<uint16_t>>& pred, const SemanticScheme& scheme) {
    if (gt.size() != pred.size()) throw std::invalid_argument("miou: frame count mismatch");
    std::map<uint16_t, ClassMetrics> per_class;
    for (size_t f = 0; f < gt.size(); ++f) {
        if (gt[f].size() != pred[f].size()) {
            throw std::invalid_argument("miou: frame " + std::to_string(f) +
                                        " has misaligned point counts");
        }
        for (size_t i = 0; i < gt[f].size(); ++i) {
            const uint16_t gs = gt[f][i];
            if (scheme.is_ignored(gs)) continue;
            check_known(gs, scheme, "ground truth");
            const uint16_t ps = pred[f][i];
            check_known(ps, scheme, "prediction");
            per_class[gs].sem_gt++;
            if (!scheme.is_ignored(ps)) per_class[ps].sem_pred++;
            if (gs == ps) per_class[gs].sem_inter++;
        }
    }
    IoUReport report;
    int n = 0;
    for (const auto& [cid, cm] : per_class) {
        if (!cm.has_semantic()) continue;
        report.per_class[cid] = cm.sem_iou();
        report.mean += cm.sem_iou();
        ++n;
    }
    if (n > 0) report.mean /= n;
    return report;
}

std::string report_to_json(const PanopticReport& report, const SemanticScheme& scheme) {
    nlohmann::json j;
    j["aggregates"] = {
        {"pq", report.pq},
        {"pq_dagger", report.pq_dagger},
        {"rq", report.rq},
        {"sq", report.sq},
        {"pq_things", report.pq_things},
        {"rq_things", report.rq_things},
        {"sq_things", report.sq_things},
        {"pq_stuff", report.pq_stuff},
        {"rq_stuff", report.rq_stuff},
        {"sq_stuff", report.sq_stuff},
        {"miou", report.miou},
    };
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [cid, cm] : report.per_class) {
        nlohmann::json c;
        c["name"] = scheme.is_known(cid) ? scheme.name_of(cid) : "unknown";
        c["role"] = scheme.is_thing(cid) ? "thing" : (scheme.is_stuff(cid) ? "stuff" : "other");
        c["tp"] = cm.tp;
        c["fp"] = cm.fp;
        c["fn"] = cm.fn;
        c["pq"] = cm.pq();
        c["sq"] = cm.sq();
        c["rq"] = cm.rq();
        c["iou"] = cm.sem_iou();
        classes[std::to_string(cid)] = c;
    }
    j["classes"] = classes;
    return j.dump(2);
}

std::string report_to_csv(const PanopticReport& report, const SemanticScheme& scheme) {
    std::ostringstream out;
    out << "class_id,name,role,tp,fp,fn,pq,sq,rq,iou\n";
    for (const auto& [cid, cm] : report.per_class) {
        out << cid << ',' << (scheme.is_known(cid) ? scheme.name_of(cid) : "unknown") << ','
            << (scheme.is_thing(cid) ? "thing" : (scheme.is_stuff(cid) ? "stuff" : "other")) << ','
            << cm.tp << ',' << cm.fp << ',' << cm.fn << ',' << cm.pq() << ',' << cm.sq() << ','
            << cm.rq() << ',' << cm.sem_iou() << '\n';
    }
    out << ",all,," << ",,," << report.pq << ',' << report.sq << ',' << report.rq << ','
        << report.miou << '\n';
    out << ",things,," << ",,," << report.pq_things << ',' << report.sq_things << ','
        << report.rq_things << ",\n";
    out << ",stuff,," << ",,," << report.pq_stuff << ',' << report.sq_stuff << ','
        << report.rq_stuff << ",\n";
    out << ",pq_dagger,," << ",,," << report.pq_dagger << ",,,\n";
    return out.str();
}

} // namespace dyshift
