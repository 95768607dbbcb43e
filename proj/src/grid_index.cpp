#include "dyshift/grid_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace dyshift {

GridIndex::Key GridIndex::key_of(const Vec3& p) const {
    return {static_cast<int64_t>(std::floor(p.x() / cell_)),
            static_cast<int64_t>(std::floor(p.y() / cell_)),
            static_cast<int64_t>(std::floor(p.z() / cell_))};
}

GridIndex::GridIndex(const Points& points, double cell_size)
    : points_(points), cell_(cell_size) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("cell size must be positive");
    if (!points_.allFinite()) throw std::invalid_argument("points must be finite");
    bool first = true;
    for (Eigen::Index i = 0; i < points_.rows(); ++i) {
        Key k = key_of(points_.row(i));
        cells_[k].push_back(static_cast<int>(i));
        if (first) {
            lo_ = hi_ = k;
            first = false;
        } else {
            lo_ = {std::min(lo_.x, k.x), std::min(lo_.y, k.y), std::min(lo_.z, k.z)};
            hi_ = {std::max(hi_.x, k.x), std::max(hi_.y, k.y), std::max(hi_.z, k.z)};
        }
    }
}

std::vector<int> GridIndex::radius_query(const Vec3& q, double r) const {
    std::vector<int> out;
    if (r < 0.0 || points_.rows() == 0) return out;
    const double r2 = r * r;
    const int64_t x0 = static_cast<int64_t>(std::floor((q.x() - r) / cell_));
    const int64_t x1 = static_cast<int64_t>(std::floor((q.x() + r) / cell_));
    const int64_t y0 = static_cast<int64_t>(std::floor((q.y() - r) / cell_));
    const int64_t y1 = static_cast<int64_t>(std::floor((q.y() + r) / cell_));
    const int64_t z0 = static_cast<int64_t>(std::floor((q.z() - r) / cell_));
    const int64_t z1 = static_cast<int64_t>(std::floor((q.z() + r) / cell_));
    for (int64_t x = std::max(x0, lo_.x); x <= std::min(x1, hi_.x); ++x) {
        for (int64_t y = std::max(y0, lo_.y); y <= std::min(y1, hi_.y); ++y) {
            for (int64_t z = std::max(z0, lo_.z); z <= std::min(z1, hi_.z); ++z) {
                auto it = cells_.find({x, y, z});
                if (it == cells_.end()) continue;
                for (int idx : it->second) {
                    if ((points_.row(idx) - q).squaredNorm() <= r2) out.push_back(idx);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

int GridIndex::nearest(const Vec3& q) const {
    if (points_.rows() == 0) throw std::runtime_error("nearest: empty index");
    const Key qk = key_of(q);
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();

    auto scan_cell = [&](int64_t x, int64_t y, int64_t z) {
        auto it = cells_.find({x, y, z});
        if (it == cells_.end()) return;
        for (int idx : it->second) {
            double d2 = (points_.row(idx) - q).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
                best_d2 = d2;
                best = idx;
            }
        }
    };

    // Largest ring that can still contain an occupied cell.
    int64_t max_ring = 0;
    max_ring = std::max(max_ring, std::max(qk.x - lo_.x, hi_.x - qk.x));
    max_ring = std::max(max_ring, std::max(qk.y - lo_.y, hi_.y - qk.y));
    max_ring = std::max(max_ring, std::max(qk.z - lo_.z, hi_.z - qk.z));

    for (int64_t ring = 0; ring <= max_ring; ++ring) {
        if (ring > 0) {
            // Any point in a cell at Chebyshev distance > ring lies farther
            // than (ring - 1) * cell from q.
            double bound = static_cast<double>(ring - 1) * cell_;
            if (best >= 0 && best_d2 <= bound * bound) break;
        }
        const int64_t x0 = qk.x - ring, x1 = qk.x + ring;
        const int64_t y0 = qk.y - ring, y1 = qk.y + ring;
        const int64_t z0 = qk.z - ring, z1 = qk.z + ring;
        for (int64_t x = x0; x <= x1; ++x) {
            for (int64_t y = y0; y <= y1; ++y) {
                if (x == x0 || x == x1 || y == y0 || y == y1) {
                    for (int64_t z = z0; z <= z1; ++z) scan_cell(x, y, z);
                } else {
                    scan_cell(x, y, z0);
                    if (ring > 0) scan_cell(x, y, z1);
                }
            }
        }
    }
    return best;
}

SampleMask fps(const Points& points, int k, uint64_t seed) {
    const int m = static_cast<int>(points.rows());
    SampleMask mask;
    if (k <= 0 || m == 0) return mask;
    if (k >= m) {
        mask.indices.resize(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) mask.indices[static_cast<size_t>(i)] = i;
        return mask;
    }

    std::mt19937_64 rng(seed);
    int start = static_cast<int>(rng() % static_cast<uint64_t>(m));
    mask.indices.push_back(start);

    std::vector<bool> selected(static_cast<size_t>(m), false);
    selected[static_cast<size_t>(start)] = true;
    std::vector<double> min_d2(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        min_d2[static_cast<size_t>(i)] = (points.row(i) - points.row(start)).squaredNorm();
    }

    while (static_cast<int>(mask.indices.size()) < k) {
        int next = -1;
        double best = -1.0;
        for (int i = 0; i < m; ++i) {
            if (!selected[static_cast<size_t>(i)] && min_d2[static_cast<size_t>(i)] > best) {
                best = min_d2[static_cast<size_t>(i)];
                next = i;
            }
        }
        mask.indices.push_back(next);
        selected[static_cast<size_t>(next)] = true;
        for (int i = 0; i < m; ++i) {
            double d2 = (points.row(i) - points.row(next)).squaredNorm();
            if (d2 < min_d2[static_cast<size_t>(i)]) min_d2[static_cast<size_t>(i)] = d2;
        }
    }
    return mask;
}

} // namespace dyshift
