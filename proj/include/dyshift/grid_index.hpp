#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dyshift/types.hpp"

namespace dyshift {

// Ordered list of selected point indices, as produced by fps().
struct SampleMask {
    std::vector<int> indices;

    std::size_t size() const { return indices.size(); }
};

// Uniform grid over a fixed point set. Queries use closed balls
// (distance <= r) and results never depend on the cell size.
class GridIndex {
public:
    GridIndex(const Points& points, double cell_size);

    // Indices i with ||points[i] - q|| <= r, ascending.
    std::vector<int> radius_query(const Vec3& q, double r) const;

    // Index of the closest point; ties go to the smallest index.
    // Throws when the index is empty.
    int nearest(const Vec3& q) const;

    Eigen::Index size() const { return points_.rows(); }
    double cell_size() const { return cell_; }
    std::size_t occupied_cells() const { return cells_.size(); }
    const Points& points() const { return points_; }

private:
    struct Key {
        int64_t x, y, z;
        bool operator==(const Key& o) const { return x == o.x && y == o.y && z == o.z; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            uint64_t h = static_cast<uint64_t>(k.x) * 0x9E3779B185EBCA87ull;
            h ^= static_cast<uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full;
            h ^= static_cast<uint64_t>(k.z) * 0x165667B19E3779F9ull;
            h ^= h >> 29;
            return static_cast<std::size_t>(h);
        }
    };

    Key key_of(const Vec3& p) const;

    Points points_;
    double cell_;
    std::unordered_map<Key, std::vector<int>, KeyHash> cells_;
    Key lo_{0, 0, 0}, hi_{0, 0, 0}; // occupied cell bounds
};

// Greedy farthest point sampling. The first index is drawn from a seeded
// RNG; each following index maximizes the min distance to the selected
// set, ties broken by smallest index. k >= M returns all indices.
SampleMask fps(const Points& points, int k, uint64_t seed);

} // namespace dyshift
