#pragma once

#include <string>

#include "dyshift/dynamic_shifting.hpp"
#include "dyshift/mlp.hpp"

namespace dyshift {

struct ModelFile {
    WeightHead head;
    BandwidthBank bank;
    IterationSchedule schedule;
};

// Self-describing binary: magic, version, layer shapes, little-endian
// float64 parameters, bandwidth bank, schedule. Round trips bit-exactly.
void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

} // namespace dyshift
