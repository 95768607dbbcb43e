#include "dyshift/scene.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dyshift {

bool SemanticScheme::is_known(uint16_t id) const {
    return std::any_of(classes.begin(), classes.end(),
                       [id](const ClassInfo& c) { return c.id == id; });
}

const std::string& SemanticScheme::name_of(uint16_t id) const {
    for (const auto& c : classes) {
        if (c.id == id) return c.name;
    }
    throw std::out_of_range("unknown class id " + std::to_string(id));
}

void SemanticScheme::validate() const {
    for (uint16_t id : things) {
        if (stuff.count(id)) {
            throw std::invalid_argument("class id " + std::to_string(id) +
                                        " listed as both thing and stuff");
        }
    }
    for (uint16_t id : ignore) {
        if (things.count(id) || stuff.count(id)) {
            throw std::invalid_argument("ignore id " + std::to_string(id) +
                                        " overlaps things/stuff");
        }
    }
    for (uint16_t id : things) {
        if (!is_known(id)) throw std::invalid_argument("thing id " + std::to_string(id) + " has no class entry");
    }
    for (uint16_t id : stuff) {
        if (!is_known(id)) throw std::invalid_argument("stuff id " + std::to_string(id) + " has no class entry");
    }
}

SemanticScheme SemanticScheme::synthetic() {
    SemanticScheme s;
    s.classes = {{1, "vehicle"}, {2, "cyclist"}, {3, "pedestrian"}, {10, "ground"}};
    s.things = {1, 2, 3};
    s.stuff = {10};
    s.ignore = {0};
    return s;
}

SemanticScheme SemanticScheme::semantic_kitti() {
    SemanticScheme s;
    s.classes = {
        {1, "car"},         {2, "bicycle"},   {3, "motorcycle"},  {4, "truck"},
        {5, "other-vehicle"}, {6, "person"},  {7, "bicyclist"},   {8, "motorcyclist"},
        {9, "road"},        {10, "parking"},  {11, "sidewalk"},   {12, "other-ground"},
        {13, "building"},   {14, "fence"},    {15, "vegetation"}, {16, "trunk"},
        {17, "terrain"},    {18, "pole"},     {19, "traffic-sign"}};
    s.things = {1, 2, 3, 4, 5, 6, 7, 8};
    s.stuff = {9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
    s.ignore = {0};
    return s;
}

SemanticScheme SemanticScheme::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scheme file: " + path);
    SemanticScheme s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        if (kind == "class") {
            unsigned id;
            std::string name, role;
            if (!(ls >> id >> name >> role) || id > std::numeric_limits<uint16_t>::max()) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad class line");
            }
            s.classes.push_back({static_cast<uint16_t>(id), name});
            if (role == "thing") {
                s.things.insert(static_cast<uint16_t>(id));
            } else if (role == "stuff") {
                s.stuff.insert(static_cast<uint16_t>(id));
            } else {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": role must be thing or stuff, got " + role);
            }
        } else if (kind == "ignore") {
            unsigned id;
            if (!(ls >> id) || id > std::numeric_limits<uint16_t>::max()) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad ignore line");
            }
            s.ignore.insert(static_cast<uint16_t>(id));
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown directive " + kind);
        }
    }
    s.validate();
    return s;
}

LabelPair decode_label(uint32_t raw) {
    return {static_cast<uint16_t>(raw & 0xFFFFu), static_cast<uint16_t>(raw >> 16)};
}

uint32_t encode_label(uint16_t semantic, uint16_t instance) {
    return static_cast<uint32_t>(semantic) | (static_cast<uint32_t>(instance) << 16);
}

namespace {

std::vector<char> read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return buf;
}

} // namespace

std::vector<uint32_t> read_raw_labels(const std::string& path) {
    auto buf = read_binary(path);
    if (buf.size() % 4 != 0) {
        throw std::runtime_error("label file size not a multiple of 4: " + path);
    }
    std::vector<uint32_t> raw(buf.size() / 4);
    std::memcpy(raw.data(), buf.data(), buf.size());
    return raw;
}

Scene read_scene(const std::string& points_path, const std::string& labels_path,
                 const SemanticScheme& scheme) {
    auto buf = read_binary(points_path);
    if (buf.size() % 16 != 0) {
        throw std::runtime_error("point file size not a multiple of 16: " + points_path);
    }
    const size_t m = buf.size() / 16;
    std::vector<float> vals(m * 4);
    std::memcpy(vals.data(), buf.data(), buf.size());

    auto raw = read_raw_labels(labels_path);
    if (raw.size() != m) {
        throw std::runtime_error("point/label count mismatch: " + points_path + " has " +
                                 std::to_string(m) + " points, " + labels_path + " has " +
                                 std::to_string(raw.size()) + " labels");
    }

    Scene scene;
    scene.cloud.points.resize(static_cast<Eigen::Index>(m), 3);
    scene.cloud.intensity.resize(m);
    scene.labels.semantic.resize(m);
    scene.labels.instance.resize(m);
    for (size_t i = 0; i < m; ++i) {
        scene.cloud.points(static_cast<Eigen::Index>(i), 0) = vals[i * 4 + 0];
        scene.cloud.points(static_cast<Eigen::Index>(i), 1) = vals[i * 4 + 1];
        scene.cloud.points(static_cast<Eigen::Index>(i), 2) = vals[i * 4 + 2];
        scene.cloud.intensity[i] = vals[i * 4 + 3];
        LabelPair lp = decode_label(raw[i]);
        if (!scheme.is_known(lp.semantic) && !scheme.is_ignored(lp.semantic)) {
            throw std::runtime_error("unknown class id " + std::to_string(lp.semantic) +
                                     " in " + labels_path);
        }
        scene.labels.semantic[i] = lp.semantic;
        scene.labels.instance[i] = lp.instance;
    }
    if (!scene.cloud.points.allFinite()) {
        throw std::runtime_error("non-finite coordinates in " + points_path);
    }
    return scene;
}

void write_point_file(const std::string& path, const PointCloud& cloud) {
    if (static_cast<size_t>(cloud.points.rows()) != cloud.intensity.size()) {
        throw std::invalid_argument("intensity length does not match point count");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    std::vector<float> vals(static_cast<size_t>(cloud.points.rows()) * 4);
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
        vals[static_cast<size_t>(i) * 4 + 0] = static_cast<float>(cloud.points(i, 0));
        vals[static_cast<size_t>(i) * 4 + 1] = static_cast<float>(cloud.points(i, 1));
        vals[static_cast<size_t>(i) * 4 + 2] = static_cast<float>(cloud.points(i, 2));
        vals[static_cast<size_t>(i) * 4 + 3] = cloud.intensity[static_cast<size_t>(i)];
    }
    out.write(reinterpret_cast<const char*>(vals.data()),
              static_cast<std::streamsize>(vals.size() * sizeof(float)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_label_file(const std::string& path, const std::vector<uint16_t>& semantic,
                      const std::vector<uint32_t>& instance) {
    if (semantic.size() != instance.size()) {
        throw std::invalid_argument("semantic/instance length mismatch");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    std::vector<uint32_t> raw(semantic.size());
    for (size_t i = 0; i < semantic.size(); ++i) {
        if (instance[i] > std::numeric_limits<uint16_t>::max()) {
            throw std::invalid_argument("instance id " + std::to_string(instance[i]) +
                                        " exceeds 16-bit label range");
        }
        raw[i] = encode_label(semantic[i], static_cast<uint16_t>(instance[i]));
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(uint32_t)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<InstanceSummary> compute_instance_centers(const PointCloud& cloud,
                                                      const SceneLabels& labels) {
    struct Box {
        Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
        Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
        std::size_t count = 0;
    };
    std::map<uint32_t, Box> boxes;
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
        uint32_t inst = labels.instance[static_cast<size_t>(i)];
        if (inst == 0) continue;
        Box& b = boxes[inst];
        b.lo = b.lo.cwiseMin(cloud.points.row(i));
        b.hi = b.hi.cwiseMax(cloud.points.row(i));
        b.count++;
    }
    std::vector<InstanceSummary> out;
    out.reserve(boxes.size());
    for (const auto& [id, b] : boxes) {
        out.push_back({id, b.count, 0.5 * (b.lo + b.hi)});
    }
    return out;
}

double offset_loss(const Points& offsets, const Points& things_points,
                   const Points& centers_per_point) {
    const Eigen::Index m = offsets.rows();
    if (m == 0) throw std::invalid_argument("offset_loss: empty input");
    if (things_points.rows() != m || centers_per_point.rows() != m) {
        throw std::invalid_argument("offset_loss: row count mismatch");
    }
    return (offsets - (centers_per_point - things_points)).cwiseAbs().sum() /
           static_cast<double>(m);
}

} // namespace dyshift
