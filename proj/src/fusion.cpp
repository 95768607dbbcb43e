#include "dyshift/fusion.hpp"

#include <map>
#include <stdexcept>

namespace dyshift {

PanopticPrediction consensus_fusion(const std::vector<uint16_t>& semantic_pred,
                                    const std::vector<uint32_t>& instance_ids,
                                    const SemanticScheme& scheme) {
    if (semantic_pred.size() != instance_ids.size()) {
        throw std::invalid_argument("consensus_fusion: semantic/instance length mismatch");
    }

    // Per-instance label histogram; ordered map keeps the smallest class id
    // first among ties.
    std::map<uint32_t, std::map<uint16_t, size_t>> votes;
    for (size_t i = 0; i < instance_ids.size(); ++i) {
        if (instance_ids[i] > 0) votes[instance_ids[i]][semantic_pred[i]]++;
    }

    std::map<uint32_t, uint16_t> winner;
    std::map<uint32_t, bool> dissolve;
    for (const auto& [inst, hist] : votes) {
        uint16_t best_label = 0;
        size_t best_count = 0;
        for (const auto& [label, count] : hist) {
            if (count > best_count) {
                best_count = count;
                best_label = label;
            }
        }
        winner[inst] = best_label;
        dissolve[inst] = !scheme.is_thing(best_label);
    }

    PanopticPrediction out;
    out.semantic = semantic_pred;
    out.instance = instance_ids;
    for (size_t i = 0; i < instance_ids.size(); ++i) {
        uint32_t inst = instance_ids[i];
        if (inst == 0) continue;
        if (dissolve[inst]) {
            out.instance[i] = 0;
        } else {
            out.semantic[i] = winner[inst];
        }
    }
    return out;
}

} // namespace dyshift
