#include "dyshift/synthgen.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "dyshift/grid_index.hpp"
#include "dyshift/rng.hpp"

namespace dyshift {

void SynthConfig::validate() const {
    if (classes.empty()) throw std::invalid_argument("synth config: no classes");
    for (const auto& c : classes) {
        if (!(c.min_size > 0.0) || c.max_size < c.min_size) {
            throw std::invalid_argument("synth config: bad size range for " + c.name);
        }
        if (c.count < 0 || c.group_size < 1) {
            throw std::invalid_argument("synth config: bad count for " + c.name);
        }
        if (c.group_size > 1 && !(c.group_spacing_min > 0.0)) {
            throw std::invalid_argument("synth config: groups need a positive spacing for " + c.name);
        }
        if (!(c.points_at_reference > 0.0) || !(c.width_ratio > 0.0) || !(c.height > 0.0)) {
            throw std::invalid_argument("synth config: bad class parameters for " + c.name);
        }
    }
    if (!(min_distance > 0.0) || max_distance < min_distance) {
        throw std::invalid_argument("synth config: bad distance range");
    }
    if (density_decay < 0.0) throw std::invalid_argument("synth config: decay must be >= 0");
    if (!(reference_distance > 0.0)) throw std::invalid_argument("synth config: bad reference distance");
    if (!(strip_anisotropy >= 1.0)) throw std::invalid_argument("synth config: anisotropy must be >= 1");
    if (offset_noise_scale < 0.0) throw std::invalid_argument("synth config: noise scale must be >= 0");
    if (ground_points < 0) throw std::invalid_argument("synth config: ground points must be >= 0");
}

SynthConfig SynthConfig::defaults() {
    SynthConfig c;
    ClassSpec vehicle;
    vehicle.class_id = 1;
    vehicle.name = "vehicle";
    vehicle.min_size = 3.5;
    vehicle.max_size = 5.0;
    vehicle.width_ratio = 0.42;
    vehicle.height = 1.6;
    vehicle.count = 3;
    vehicle.points_at_reference = 260.0;

    ClassSpec cyclist;
    cyclist.class_id = 2;
    cyclist.name = "cyclist";
    cyclist.min_size = 1.5;
    cyclist.max_size = 2.0;
    cyclist.width_ratio = 0.4;
    cyclist.height = 1.7;
    cyclist.count = 2;
    cyclist.points_at_reference = 120.0;

    ClassSpec pedestrian;
    pedestrian.class_id = 3;
    pedestrian.name = "pedestrian";
    pedestrian.min_size = 0.4;
    pedestrian.max_size = 0.8;
    pedestrian.width_ratio = 0.9;
    pedestrian.height = 1.7;
    pedestrian.count = 3;
    pedestrian.group_size = 2;
    pedestrian.group_spacing_min = 1.2;
    pedestrian.group_spacing_max = 2.4;
    pedestrian.points_at_reference = 80.0;

    c.classes = {vehicle, cyclist, pedestrian};
    return c;
}

namespace {

struct Box {
    Vec3 center;
    Vec3 half; // half extents
};

bool boxes_overlap(const Box& a, const Box& b, double margin) {
    for (int k = 0; k < 3; ++k) {
        if (std::abs(a.center(k) - b.center(k)) > a.half(k) + b.half(k) + margin) return false;
    }
    return true;
}

} // namespace

SynthScene gen_scene(const SynthConfig& config, int scene_index) {
    config.validate();
    std::mt19937_64 rng(mix_seed(config.seed, static_cast<uint64_t>(scene_index)));

    const Vec3 sensor(0.0, 0.0, config.sensor_height);

    struct PendingInstance {
        Box box;
        uint16_t class_id;
        double size;
        int n_points;
    };
    std::vector<PendingInstance> pending;
    std::vector<Box> placed;

    for (const auto& spec : config.classes) {
        for (int g = 0; g < spec.count; ++g) {
            Box prev{};
            for (int member = 0; member < spec.group_size; ++member) {
                const double size = uniform(rng, spec.min_size, spec.max_size);
                Vec3 half(size / 2.0, size * spec.width_ratio / 2.0, spec.height / 2.0);
                bool ok = false;
                Box box;
                for (int attempt = 0; attempt < config.placement_retries; ++attempt) {
                    Vec3 center;
                    if (member == 0) {
                        const double d = uniform(rng, config.min_distance, config.max_distance);
                        const double az = uniform(rng, 0.0, 2.0 * M_PI);
                        center = Vec3(d * std::cos(az), d * std::sin(az), spec.height / 2.0);
                    } else {
                        const double spacing =
                            uniform(rng, spec.group_spacing_min, spec.group_spacing_max);
                        const double dir = uniform(rng, 0.0, 2.0 * M_PI);
                        center = prev.center +
                                 Vec3(spacing * std::cos(dir), spacing * std::sin(dir), 0.0);
                        center(2) = spec.height / 2.0;
                    }
                    box = {center, half};
                    const double margin = member == 0 ? 0.8 : 0.1;
                    bool clash = false;
                    for (const auto& other : placed) {
                        if (boxes_overlap(box, other, margin)) {
                            clash = true;
                            break;
                        }
                    }
                    if (!clash) {
                        ok = true;
                        break;
                    }
                }
                if (!ok) {
                    throw std::runtime_error("gen_scene: instance placement failed for class " +
                                             spec.name);
                }
                placed.push_back(box);
                prev = box;

                const double d = (box.center - sensor).norm();
                double n = spec.points_at_reference *
                           std::pow(config.reference_distance / d, config.density_decay);
                int n_points =
                    std::max(config.min_points_per_instance, static_cast<int>(std::lround(n)));
                pending.push_back({box, spec.class_id, size, n_points});
            }
        }
    }

    // Sample instance points.
    SynthScene scene;
    scene.sensor_height = config.sensor_height;
    std::vector<Vec3> pts;
    std::vector<float> intensity;
    std::vector<uint16_t> semantic;
    std::vector<uint32_t> instance;
    std::vector<double> inst_size; // per things point, its instance's footprint diagonal
    std::vector<Vec3> inst_box_diag;

    uint32_t next_instance = 0;
    struct SampledInstance {
        uint32_t id;
        size_t first, count;
        double size;
        Vec3 box_center;
        Vec3 box_half;
    };
    std::vector<SampledInstance> sampled;

    for (const auto& inst : pending) {
        ++next_instance;
        SampledInstance rec{next_instance, pts.size(), static_cast<size_t>(inst.n_points),
                            inst.size, inst.box.center, inst.box.half};
        for (int i = 0; i < inst.n_points; ++i) {
            Vec3 p(uniform(rng, -inst.box.half(0), inst.box.half(0)),
                   uniform(rng, -inst.box.half(1), inst.box.half(1)),
                   uniform(rng, -inst.box.half(2), inst.box.half(2)));
            pts.push_back(inst.box.center + p);
            intensity.push_back(static_cast<float>(uniform01(rng)));
            semantic.push_back(inst.class_id);
            instance.push_back(next_instance);
        }
        sampled.push_back(rec);
    }

    // Ground plane points, uniform over the disk.
    for (int i = 0; i < config.ground_points; ++i) {
        const double r = config.max_distance * std::sqrt(uniform01(rng));
        const double az = uniform(rng, 0.0, 2.0 * M_PI);
        pts.push_back(Vec3(r * std::cos(az), r * std::sin(az),
                           0.02 * standard_normal(rng)));
        intensity.push_back(static_cast<float>(uniform01(rng)));
        semantic.push_back(config.ground_class_id);
        instance.push_back(0);
    }

    const size_t m = pts.size();
    scene.cloud.points.resize(static_cast<Eigen::Index>(m), 3);
    for (size_t i = 0; i < m; ++i) scene.cloud.points.row(static_cast<Eigen::Index>(i)) = pts[i];
    scene.cloud.intensity = std::move(intensity);
    scene.labels.semantic = std::move(semantic);
    scene.labels.instance = std::move(instance);

    // Tight-box centers of the sampled points define the regression targets.
    scene.instances = compute_instance_centers(scene.cloud, scene.labels);
    std::map<uint32_t, Vec3> center_of;
    for (const auto& s : scene.instances) center_of[s.id] = s.center;
    std::map<uint32_t, double> size_of;
    std::map<uint32_t, double> diag_of;
    for (const auto& s : sampled) {
        size_of[s.id] = std::hypot(2.0 * s.box_half(0), 2.0 * s.box_half(1));
        diag_of[s.id] = (2.0 * s.box_half).norm();
    }

    for (size_t i = 0; i < m; ++i) {
        if (scene.labels.instance[i] > 0) scene.things_indices.push_back(static_cast<int>(i));
    }
    scene.things_points = gather_rows(scene.cloud.points, scene.things_indices);
    scene.offsets.resize(scene.things_points.rows(), 3);

    for (Eigen::Index t = 0; t < scene.things_points.rows(); ++t) {
        const size_t row = static_cast<size_t>(scene.things_indices[static_cast<size_t>(t)]);
        const uint32_t inst = scene.labels.instance[row];
        const Vec3 p = scene.things_points.row(t);
        const Vec3 center = center_of.at(inst);
        Vec3 noise = Vec3::Zero();
        if (config.offset_noise_scale > 0.0) {
            Vec3 along(center(0), center(1), 0.0);
            double norm = along.norm();
            along = norm > 1e-9 ? Vec3(along / norm) : Vec3(1.0, 0.0, 0.0);
            const Vec3 perp(-along(1), along(0), 0.0);
            const double sigma = config.offset_noise_scale * size_of.at(inst);
            noise = along * (sigma * standard_normal(rng)) +
                    perp * ((sigma / config.strip_anisotropy) * standard_normal(rng)) +
                    Vec3(0.0, 0.0, (sigma / config.strip_anisotropy) * standard_normal(rng));
            const double cap = 3.0 * diag_of.at(inst);
            if (noise.norm() > cap) noise *= cap / noise.norm();
        }
        scene.offsets.row(t) = (center - p) + noise;
    }

    scene.features = gen_features(scene);
    return scene;
}

Matrix gen_features(const SynthScene& scene) {
    const Eigen::Index n = scene.things_points.rows();
    if (n == 0) throw std::invalid_argument("gen_features: scene has no things points");
    if (scene.offsets.rows() != n) throw std::invalid_argument("gen_features: offset row mismatch");

    const Vec3 sensor(0.0, 0.0, scene.sensor_height);
    Points regressed = scene.things_points + scene.offsets;
    GridIndex index(regressed, 2.0);

    Matrix f(n, 7);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3 p = scene.things_points.row(i);
        const Vec3 c = regressed.row(i);
        auto near_small = index.radius_query(c, 0.5);
        auto near_large = index.radius_query(c, 2.0);

        double r12 = 0.0, r13 = 0.0;
        if (near_large.size() >= 3) {
            Vec3 mean = Vec3::Zero();
            for (int idx : near_large) mean += regressed.row(idx);
            mean /= static_cast<double>(near_large.size());
            Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
            for (int idx : near_large) {
                Vec3 d = Vec3(regressed.row(idx)) - mean;
                cov += d.transpose() * d;
            }
            cov /= static_cast<double>(near_large.size());
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
            const auto& ev = eig.eigenvalues(); // ascending
            if (ev(2) > 1e-12) {
                r12 = ev(1) / ev(2);
                r13 = ev(0) / ev(2);
            }
        }

        f(i, 0) = (p - sensor).norm();
        f(i, 1) = static_cast<double>(near_small.size());
        f(i, 2) = static_cast<double>(near_large.size());
        f(i, 3) = r12;
        f(i, 4) = r13;
        f(i, 5) = p(2);
        f(i, 6) = scene.offsets.row(i).norm();
    }
    return f;
}

DensityProfile density_profile(const std::vector<SynthScene>& scenes, double bin_width_m) {
    if (scenes.empty()) throw std::invalid_argument("density_profile: no scenes");
    if (!(bin_width_m > 0.0)) throw std::invalid_argument("density_profile: bad bin width");

    constexpr double kVoxel = 0.2;
    DensityProfile profile;
    profile.bin_width = bin_width_m;
    std::vector<double> sums;

    for (const auto& scene : scenes) {
        const Vec3 sensor(0.0, 0.0, scene.sensor_height);
        Points regressed = scene.things_points + scene.offsets;
        std::map<uint32_t, std::vector<Eigen::Index>> members;
        for (Eigen::Index t = 0; t < regressed.rows(); ++t) {
            members[scene.labels.instance[static_cast<size_t>(
                        scene.things_indices[static_cast<size_t>(t)])]]
                .push_back(t);
        }
        std::map<uint32_t, Vec3> center_of;
        for (const auto& s : scene.instances) center_of[s.id] = s.center;

        for (const auto& [inst, rows] : members) {
            std::set<std::tuple<int64_t, int64_t, int64_t>> voxels;
            for (Eigen::Index t : rows) {
                voxels.insert({static_cast<int64_t>(std::floor(regressed(t, 0) / kVoxel)),
                               static_cast<int64_t>(std::floor(regressed(t, 1) / kVoxel)),
                               static_cast<int64_t>(std::floor(regressed(t, 2) / kVoxel))});
            }
            const double per_voxel =
                static_cast<double>(rows.size()) / static_cast<double>(voxels.size());
            const double dist = (center_of.at(inst) - sensor).norm();
            const size_t bin = static_cast<size_t>(std::floor(dist / bin_width_m));
            if (bin >= sums.size()) {
                sums.resize(bin + 1, 0.0);
                profile.instance_count.resize(bin + 1, 0);
            }
            sums[bin] += per_voxel;
            profile.instance_count[bin]++;
        }
    }

    profile.mean_count.resize(sums.size(), 0.0);
    for (size_t b = 0; b < sums.size(); ++b) {
        if (profile.instance_count[b] > 0) {
            profile.mean_count[b] = sums[b] / profile.instance_count[b];
        }
    }
    return profile;
}

namespace {

constexpr char kSidecarMagic[8] = {'D', 'S', 'H', 'S', 'I', 'D', 'E', '1'};

} // namespace

void write_sidecar(const std::string& path, const SynthScene& scene) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open sidecar for writing: " + path);
    out.write(kSidecarMagic, sizeof(kSidecarMagic));
    const uint64_t n = static_cast<uint64_t>(scene.things_points.rows());
    const uint32_t d = static_cast<uint32_t>(scene.features.cols());
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(&d), sizeof(d));
    for (int idx : scene.things_indices) {
        uint32_t v = static_cast<uint32_t>(idx);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    auto write_f32 = [&](double v) {
        float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    };
    for (uint64_t i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) write_f32(scene.offsets(static_cast<Eigen::Index>(i), k));
    }
    for (uint64_t i = 0; i < n; ++i) {
        for (uint32_t k = 0; k < d; ++k) {
            write_f32(scene.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Sidecar read_sidecar(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open sidecar: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kSidecarMagic, sizeof(kSidecarMagic)) != 0) {
        throw std::runtime_error("not a sidecar file (bad magic): " + path);
    }
    uint64_t n = 0;
    uint32_t d = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    in.read(reinterpret_cast<char*>(&d), sizeof(d));
    if (!in) throw std::runtime_error("truncated sidecar: " + path);

    Sidecar side;
    side.things_indices.resize(n);
    for (uint64_t i = 0; i < n; ++i) {
        uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        side.things_indices[i] = static_cast<int>(v);
    }
    auto read_f32 = [&]() {
        float f = 0;
        in.read(reinterpret_cast<char*>(&f), sizeof(f));
        return static_cast<double>(f);
    };
    side.offsets.resize(static_cast<Eigen::Index>(n), 3);
    for (uint64_t i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) side.offsets(static_cast<Eigen::Index>(i), k) = read_f32();
    }
    side.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (uint64_t i = 0; i < n; ++i) {
        for (uint32_t k = 0; k < d; ++k) {
            side.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = read_f32();
        }
    }
    if (!in) throw std::runtime_error("truncated sidecar: " + path);
    return side;
}

void export_scene(const std::string& stem, const SynthScene& scene) {
    write_point_file(stem + ".bin", scene.cloud);
    write_label_file(stem + ".label", scene.labels.semantic, scene.labels.instance);
    write_sidecar(stem + ".dsx", scene);
}

} // namespace dyshift
