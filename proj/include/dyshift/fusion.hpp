#pragma once

#include <cstdint>
#include <vector>

#include "dyshift/scene.hpp"

namespace dyshift {

// Consistent panoptic output: every instance id > 0 covers points of a
// single things class.
struct PanopticPrediction {
    std::vector<uint16_t> semantic;
    std::vector<uint32_t> instance;
};

// Majority voting: all points of an instance take its most frequent
// semantic label (ties -> smallest class id). Instances whose majority
// label is not a things class are dissolved (ids -> 0, semantics kept).
PanopticPrediction consensus_fusion(const std::vector<uint16_t>& semantic_pred,
                                    const std::vector<uint32_t>& instance_ids,
                                    const SemanticScheme& scheme);

} // namespace dyshift
