#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dyshift/types.hpp"

namespace dyshift {

struct PointCloud {
    Points points;                // M x 3
    std::vector<float> intensity; // length M

    Eigen::Index size() const { return points.rows(); }
};

// Class id partition into countable things and amorphous stuff. Ignore ids
// are excluded from metrics entirely.
struct SemanticScheme {
    struct ClassInfo {
        uint16_t id;
        std::string name;
    };

    std::vector<ClassInfo> classes;
    std::set<uint16_t> things;
    std::set<uint16_t> stuff;
    std::set<uint16_t> ignore;

    bool is_thing(uint16_t id) const { return things.count(id) > 0; }
    bool is_stuff(uint16_t id) const { return stuff.count(id) > 0; }
    bool is_ignored(uint16_t id) const { return ignore.count(id) > 0; }
    bool is_known(uint16_t id) const;
    const std::string& name_of(uint16_t id) const;

    // Throws if things/stuff/ignore overlap or a listed set member has no class entry.
    void validate() const;

    static SemanticScheme synthetic();
    static SemanticScheme semantic_kitti();
    static SemanticScheme from_file(const std::string& path);
};

struct SceneLabels {
    std::vector<uint16_t> semantic;
    std::vector<uint32_t> instance; // 0 = no instance
};

struct InstanceSummary {
    uint32_t id = 0;
    std::size_t count = 0;
    Vec3 center = Vec3::Zero(); // midpoint of the axis-aligned tight box
};

struct LabelPair {
    uint16_t semantic;
    uint16_t instance;
};

// On-disk label convention: low 16 bits semantic class, high 16 bits instance id.
LabelPair decode_label(uint32_t raw);
uint32_t encode_label(uint16_t semantic, uint16_t instance);

struct Scene {
    PointCloud cloud;
    SceneLabels labels;
};

// Binary frame pair: points file is float32 LE x4 (x, y, z, intensity) per
// point, labels file is uint32 LE per point. Throws on size mismatch or IO
// failure, with the offending path in the message.
Scene read_scene(const std::string& points_path, const std::string& labels_path,
                 const SemanticScheme& scheme);

void write_point_file(const std::string& path, const PointCloud& cloud);
void write_label_file(const std::string& path, const std::vector<uint16_t>& semantic,
                      const std::vector<uint32_t>& instance);
std::vector<uint32_t> read_raw_labels(const std::string& path);

// One summary per instance id > 0, sorted by id. Centers are tight-box
// midpoints, not centroids.
std::vector<InstanceSummary> compute_instance_centers(const PointCloud& cloud,
                                                      const SceneLabels& labels);

// Mean L1 distance between predicted offsets and the true point-to-center
// offsets. Throws when the inputs are empty.
double offset_loss(const Points& offsets, const Points& things_points,
                   const Points& centers_per_point);

} // namespace dyshift
