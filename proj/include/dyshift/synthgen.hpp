#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyshift/scene.hpp"
#include "dyshift/types.hpp"

namespace dyshift {

// One instance category in the generator. Instances are axis-aligned boxes
// of varying footprint; group_size > 1 drops several instances close
// together, spaced within the given band.
struct ClassSpec {
    uint16_t class_id = 0;
    std::string name;
    double min_size = 1.0, max_size = 1.0; // long footprint side, m
    double width_ratio = 0.5;              // short side = size * width_ratio
    double height = 1.6;
    int count = 1; // groups per scene
    int group_size = 1;
    double group_spacing_min = 0.0, group_spacing_max = 0.0;
    double points_at_reference = 100.0;
};

struct SynthConfig {
    uint64_t seed = 0;
    std::vector<ClassSpec> classes;
    double min_distance = 8.0, max_distance = 45.0;
    double density_decay = 2.0;       // sampling density ~ (1/distance)^decay
    double reference_distance = 10.0;
    double strip_anisotropy = 5.0;    // offset noise elongation along the sensor ray
    double offset_noise_scale = 0.25; // sigma as a fraction of the horizontal diagonal
    int ground_points = 600;
    uint16_t ground_class_id = 10;
    double sensor_height = 1.8;
    int min_points_per_instance = 8;
    int placement_retries = 200;

    void validate() const;
    static SynthConfig defaults();
};

struct SynthScene {
    PointCloud cloud;
    SceneLabels labels;
    std::vector<int> things_indices; // rows of cloud holding things points
    Points things_points;
    Points offsets;  // simulated regressed offsets, one row per things point
    Matrix features; // 7 columns, one row per things point
    std::vector<InstanceSummary> instances;
    double sensor_height = 1.8;
};

// Deterministic under (config.seed, scene_index).
SynthScene gen_scene(const SynthConfig& config, int scene_index);

// Hand-crafted per-point features standing in for backbone features:
// sensor distance, local counts at 0.5 m and 2 m (over regressed centers),
// two covariance eigenvalue ratios, height, offset magnitude.
Matrix gen_features(const SynthScene& scene);

struct DensityProfile {
    double bin_width = 5.0;
    std::vector<double> mean_count; // mean regressed centers per occupied 0.2 m voxel
    std::vector<int> instance_count;
};

DensityProfile density_profile(const std::vector<SynthScene>& scenes, double bin_width_m);

// Writes <stem>.bin, <stem>.label and the <stem>.dsx sidecar with offsets
// and features for the things points.
void export_scene(const std::string& stem, const SynthScene& scene);

struct Sidecar {
    std::vector<int> things_indices;
    Points offsets;
    Matrix features;
};
void write_sidecar(const std::string& path, const SynthScene& scene);
Sidecar read_sidecar(const std::string& path);

} // namespace dyshift
