// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/filters.hpp"

#include "spdf/kdtree.hpp"
#include "spdf/parallel.hpp"
#include "spdf/rng.hpp"
#include "spdf/sym3.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace spdf {

FilterMethod filter_method_from_name(const std::string& name) {
    if (name == "random") return FilterMethod::Random;
    if (name == "voxel") return FilterMethod::Voxel;
    if (name == "octree") return FilterMethod::OctreeCentroid;
    if (name == "max_density") return FilterMethod::MaxDensity;
    if (name == "ssnormal") return FilterMethod::SSNormal;
    if (name == "nss") return FilterMethod::NSS;
    if (name == "covs") return FilterMethod::CovS;
    throw InvalidInput("unknown filter method: " + name);
}

const char* to_string(FilterMethod m) {
    switch (m) {
        case FilterMethod::Random: return "random";
        case FilterMethod::Voxel: return "voxel";
        case FilterMethod::OctreeCentroid: return "octree";
        case FilterMethod::MaxDensity: return "max_density";
        case FilterMethod::SSNormal: return "ssnormal";
        case FilterMethod::NSS: return "nss";
        case FilterMethod::CovS: return "covs";
    }
    return "unknown";
}

PointCloud random_sample(const PointCloud& cloud, double p, std::uint64_t seed) {
    if (!(p > 0.0) || p > 1.0) throw InvalidInput("random_sample: p must be in (0, 1]");
    Rng rng(seed);
    std::vector<int> keep;
    keep.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (rng.uniform() < p) keep.push_back(static_cast<int>(i));
    }
    return cloud.select(keep);
}

PointCloud voxel_sample(const PointCloud& cloud, double cell_size) {
    if (!(cell_size > 0.0)) throw InvalidInput("voxel_sample: cell size must be > 0");
    if (cloud.empty()) return {};

    Vec3 lo = cloud.points.front();
    for (const Vec3& p : cloud.points) lo = lo.cwiseMin(p);

    struct Cell {
        Vec3 sum = Vec3::Zero();
        std::size_t count = 0;
        std::size_t first = 0;  // first point index, for deterministic output order
    };
    std::map<std::array<std::int64_t, 3>, Cell> cells;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 rel = (cloud.points[i] - lo) / cell_size;
        const std::array<std::int64_t, 3> key = {
            static_cast<std::int64_t>(std::floor(rel.x())),
            static_cast<std::int64_t>(std::floor(rel.y())),
            static_cast<std::int64_t>(std::floor(rel.z()))};
        auto [it, inserted] = cells.try_emplace(key);
        if (inserted) it->second.first = i;
        it->second.sum += cloud.points[i];
        it->second.count += 1;
    }

    std::vector<std::pair<std::size_t, Vec3>> centroids;
    centroids.reserve(cells.size());
    for (const auto& [key, cell] : cells) {
        centroids.emplace_back(cell.first, cell.sum / static_cast<double>(cell.count));
    }
    std::sort(centroids.begin(), centroids.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    PointCloud out;
    out.points.reserve(centroids.size());
    for (const auto& [first, c] : centroids) out.points.push_back(c);
    return out;
}

namespace {

constexpr int kOctreeDepthCap = 21;

struct OctreeLeaf {
    Vec3 centroid;
    std::size_t count;
    std::size_t first;  // smallest point index in the leaf
};

void octree_subdivide(const std::vector<Vec3>& pts, std::vector<int>& idx, int begin,
                      int end, const Vec3& corner, double side, int depth, int capacity,
                      std::vector<OctreeLeaf>& leaves) {
    if (end - begin <= capacity || depth >= kOctreeDepthCap) {
        Vec3 sum = Vec3::Zero();
        std::size_t first = static_cast<std::size_t>(idx[begin]);
        for (int i = begin; i < end; ++i) {
            sum += pts[idx[i]];
            first = std::min(first, static_cast<std::size_t>(idx[i]));
        }
        leaves.push_back({sum / static_cast<double>(end - begin),
                          static_cast<std::size_t>(end - begin), first});
        return;
    }
    const double half = 0.5 * side;
    const Vec3 center = corner + Vec3::Constant(half);
    // Bucket points into the eight children, child order fixed by octant code.
    std::array<std::vector<int>, 8> buckets;
    for (int i = begin; i < end; ++i) {
        const Vec3& p = pts[idx[i]];
        const int code = (p.x() >= center.x() ? 1 : 0) | (p.y() >= center.y() ? 2 : 0) |
                         (p.z() >= center.z() ? 4 : 0);
        buckets[code].push_back(idx[i]);
    }
    int write = begin;
    std::array<std::pair<int, int>, 8> ranges;
    for (int c = 0; c < 8; ++c) {
        ranges[c] = {write, write + static_cast<int>(buckets[c].size())};
        for (int v : buckets[c]) idx[write++] = v;
    }
    for (int c = 0; c < 8; ++c) {
        if (ranges[c].first == ranges[c].second) continue;
        const Vec3 child_corner = corner + Vec3((c & 1) ? half : 0.0, (c & 2) ? half : 0.0,
                                                (c & 4) ? half : 0.0);
        octree_subdivide(pts, idx, ranges[c].first, ranges[c].second, child_corner, half,
                         depth + 1, capacity, leaves);
    }
}

std::vector<OctreeLeaf> octree_leaves(const PointCloud& cloud, int capacity) {
    Vec3 lo = cloud.points.front();
    Vec3 hi = lo;
    for (const Vec3& p : cloud.points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double side = std::max((hi - lo).maxCoeff(), 1e-12) * (1.0 + 1e-12);
    std::vector<int> idx(cloud.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<OctreeLeaf> leaves;
    octree_subdivide(cloud.points, idx, 0, static_cast<int>(cloud.size()), lo, side, 0,
                     capacity, leaves);
    std::sort(leaves.begin(), leaves.end(),
              [](const OctreeLeaf& a, const OctreeLeaf& b) { return a.first < b.first; });
    return leaves;
}

}  // namespace

PointCloud octree_sample(const PointCloud& cloud, int max_points_per_cell,
                         std::vector<std::size_t>* leaf_sizes) {
    if (max_points_per_cell < 1) {
        throw InvalidInput("octree_sample: capacity must be >= 1");
    }
    if (leaf_sizes) leaf_sizes->clear();
    if (cloud.empty()) return {};
    PointCloud out;
    for (const OctreeLeaf& leaf : octree_leaves(cloud, max_points_per_cell)) {
        out.points.push_back(leaf.centroid);
        if (leaf_sizes) leaf_sizes->push_back(leaf.count);
    }
    return out;
}

PointCloud max_density_sample(const PointCloud& cloud, double max_density,
                              std::uint64_t seed) {
    if (!(max_density > 0.0)) {
        throw InvalidInput("max_density_sample: density must be > 0");
    }
    if (cloud.empty()) return {};
    const int k = std::min<int>(10, static_cast<int>(cloud.size()) - 1);
    if (k < 1) return cloud;  // single point: no density estimate

    const SpatialIndex index(cloud);
    std::vector<double> density(cloud.size());
    parallel_for(cloud.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<SpatialIndex::Neighbor> nn;
        for (std::size_t i = begin; i < end; ++i) {
            index.knn(cloud.points[i], k + 1, nn);
            const double r = nn.back().distance;
            density[i] = r > 0.0 ? k / (4.0 / 3.0 * M_PI * r * r * r)
                                 : std::numeric_limits<double>::infinity();
        }
    });

    Rng rng(seed);
    std::vector<int> keep;
    keep.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double u = rng.uniform();
        if (density[i] <= max_density || u < max_density / density[i]) {
            keep.push_back(static_cast<int>(i));
        }
    }
    return cloud.select(keep);
}

namespace {

struct BinNormal {
    Vec3 centroid;
    Vec3 normal;
    std::size_t first;
};

void ssnormal_split(const std::vector<Vec3>& pts, std::vector<int>& idx, int begin,
                    int end, int capacity, std::vector<BinNormal>& bins) {
    if (end - begin <= capacity) {
        Vec3 mean = Vec3::Zero();
        std::size_t first = static_cast<std::size_t>(idx[begin]);
        for (int i = begin; i < end; ++i) {
            mean += pts[idx[i]];
            first = std::min(first, static_cast<std::size_t>(idx[i]));
        }
        mean /= static_cast<double>(end - begin);
        SymTensor3 cov;
        for (int i = begin; i < end; ++i) {
            cov += SymTensor3::outer(pts[idx[i]] - mean);
        }
        const SpectralDecomp d = eigendecompose_sym3(cov);
        Vec3 n = d.e3();
        if (n.dot(-mean) < 0.0) n = -n;  // toward the frame origin
        bins.push_back({mean, n, first});
        return;
    }
    Vec3 lo = pts[idx[begin]];
    Vec3 hi = lo;
    for (int i = begin; i < end; ++i) {
        lo = lo.cwiseMin(pts[idx[i]]);
        hi = hi.cwiseMax(pts[idx[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(idx.begin() + begin, idx.begin() + mid, idx.begin() + end,
                     [&](int a, int b) { return pts[a](axis) < pts[b](axis); });
    ssnormal_split(pts, idx, begin, mid, capacity, bins);
    ssnormal_split(pts, idx, mid, end, capacity, bins);
}

}  // namespace

PointCloud sampling_surface_normal(const PointCloud& cloud, int neighbors_to_merge) {
    if (neighbors_to_merge < 3) {
        throw InvalidInput("sampling_surface_normal: bin capacity must be >= 3");
    }
    if (cloud.empty()) return {};
    std::vector<int> idx(cloud.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<BinNormal> bins;
    ssnormal_split(cloud.points, idx, 0, static_cast<int>(cloud.size()),
                   neighbors_to_merge, bins);
    std::sort(bins.begin(), bins.end(),
              [](const BinNormal& a, const BinNormal& b) { return a.first < b.first; });
    PointCloud out;
    out.points.reserve(bins.size());
    out.normals.reserve(bins.size());
    for (const BinNormal& b : bins) {
        out.points.push_back(b.centroid);
        out.normals.push_back(b.normal);
    }
    return out;
}

namespace {

PointCloud with_normals(const PointCloud& cloud, int k) {
    if (cloud.has_normals()) return cloud;
    return compute_normals(cloud, std::min<int>(k, static_cast<int>(cloud.size()) - 1));
}

// Bucket key on the 32x16 longitude-latitude hemisphere grid; antipodal
// directions share a bucket (a point-to-plane constraint has no sign).
int hemisphere_bucket(Vec3 n) {
    if (n.z() < 0.0 || (n.z() == 0.0 && (n.y() < 0.0 || (n.y() == 0.0 && n.x() < 0.0)))) {
        n = -n;
    }
    const double lon = std::atan2(n.y(), n.x());          // [-pi, pi]
    const double lat = std::acos(std::clamp(n.z(), -1.0, 1.0));  // [0, pi/2]
    int li = static_cast<int>((lon + M_PI) / (2.0 * M_PI) * 32.0);
    int la = static_cast<int>(lat / (0.5 * M_PI) * 16.0);
    li = std::clamp(li, 0, 31);
    la = std::clamp(la, 0, 15);
    return la * 32 + li;
}

}  // namespace

PointCloud normal_space_sample(const PointCloud& cloud, std::size_t target,
                               std::uint64_t seed) {
    if (target > cloud.size()) {
        throw InvalidInput("normal_space_sample: target exceeds cloud size");
    }
    if (target == cloud.size()) return with_normals(cloud, 10);
    const PointCloud src = with_normals(cloud, 10);

    std::array<std::vector<int>, 32 * 16> buckets;
    for (std::size_t i = 0; i < src.size(); ++i) {
        buckets[hemisphere_bucket(src.normals[i])].push_back(static_cast<int>(i));
    }
    Rng rng(seed);
    for (auto& b : buckets) rng.shuffle(b);

    std::vector<int> keep;
    keep.reserve(target);
    std::array<std::size_t, 32 * 16> cursor{};
    while (keep.size() < target) {
        bool any = false;
        for (std::size_t b = 0; b < buckets.size() && keep.size() < target; ++b) {
            if (cursor[b] < buckets[b].size()) {
                keep.push_back(buckets[b][cursor[b]++]);
                any = true;
            }
        }
        if (!any) break;
    }
    std::sort(keep.begin(), keep.end());
    return src.select(keep);
}

PointCloud covariance_sample(const PointCloud& cloud, std::size_t target,
                             bool* rank_deficient) {
    if (target < 6) throw InvalidInput("covariance_sample: target must be >= 6");
    if (target > cloud.size()) {
        throw InvalidInput("covariance_sample: target exceeds cloud size");
    }
    const PointCloud src = with_normals(cloud, 10);
    if (rank_deficient) *rank_deficient = false;
    if (target == src.size()) return src;

    const std::size_t n = src.size();
    std::vector<Vec6> constraints(n);
    Mat6 c_total = Mat6::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        Vec6 c;
        c.head<3>() = src.points[i].cross(src.normals[i]);
        c.tail<3>() = src.normals[i];
        constraints[i] = c;
        c_total += c * c.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat6> solver(c_total);
    const double lambda_max = solver.eigenvalues().maxCoeff();

    std::array<std::vector<int>, 6> lists;
    for (int mode = 0; mode < 6; ++mode) {
        // Eigen orders ascending; take descending so list 0 is the stiffest mode.
        const int col = 5 - mode;
        std::vector<int>& list = lists[mode];
        list.resize(n);
        std::iota(list.begin(), list.end(), 0);
        if (solver.eigenvalues()(col) <= 1e-9 * std::max(lambda_max, 1e-300)) {
            if (rank_deficient) *rank_deficient = true;
            Rng rng(0x5eedc0de + static_cast<std::uint64_t>(mode));
            rng.shuffle(list);
            continue;
        }
        const Vec6 v = solver.eigenvectors().col(col);
        std::vector<double> score(n);
        for (std::size_t i = 0; i < n; ++i) score[i] = std::abs(constraints[i].dot(v));
        std::sort(list.begin(), list.end(), [&](int a, int b) {
            if (score[a] != score[b]) return score[a] > score[b];
            return a < b;
        });
    }

    std::vector<char> used(n, 0);
    std::array<std::size_t, 6> cursor{};
    std::vector<int> keep;
    keep.reserve(target);
    while (keep.size() < target) {
        for (int mode = 0; mode < 6 && keep.size() < target; ++mode) {
            std::size_t& cur = cursor[mode];
            while (cur < n && used[lists[mode][cur]]) ++cur;
            if (cur < n) {
                used[lists[mode][cur]] = 1;
                keep.push_back(lists[mode][cur]);
            }
        }
    }
    std::sort(keep.begin(), keep.end());
    return src.select(keep);
}

PointCloud compute_normals(const PointCloud& cloud, int k) {
    if (k < 3) throw InvalidInput("compute_normals: k must be >= 3");
    if (cloud.size() <= static_cast<std::size_t>(k)) {
        throw InsufficientPoints("compute_normals: cloud must have more than k points");
    }
    const SpatialIndex index(cloud);
    PointCloud out = cloud;
    out.normals.resize(cloud.size());
    parallel_for(cloud.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<SpatialIndex::Neighbor> nn;
        for (std::size_t i = begin; i < end; ++i) {
            index.knn(cloud.points[i], k + 1, nn);
            Vec3 mean = Vec3::Zero();
            for (const auto& nb : nn) mean += cloud.points[nb.index];
            mean /= static_cast<double>(nn.size());
            SymTensor3 cov;
            for (const auto& nb : nn) {
                cov += SymTensor3::outer(cloud.points[nb.index] - mean);
            }
            const SpectralDecomp d = eigendecompose_sym3(cov);
            Vec3 n = d.e3();
            if (n.dot(-cloud.points[i]) < 0.0) n = -n;
            out.normals[i] = n;
        }
    });
    return out;
}

PointCloud apply_filter(const PointCloud& cloud, const FilterSpec& spec) {
    switch (spec.method) {
        case FilterMethod::Random:
            return random_sample(cloud, spec.parameter, spec.seed);
        case FilterMethod::Voxel:
            return voxel_sample(cloud, spec.parameter);
        case FilterMethod::OctreeCentroid:
            return octree_sample(cloud, static_cast<int>(std::lround(spec.parameter)));
        case FilterMethod::MaxDensity:
            return max_density_sample(cloud, spec.parameter, spec.seed);
        case FilterMethod::SSNormal:
            return sampling_surface_normal(cloud,
                                           static_cast<int>(std::lround(spec.parameter)));
        case FilterMethod::NSS:
            return normal_space_sample(
                cloud, static_cast<std::size_t>(std::lround(spec.parameter)), spec.seed);
        case FilterMethod::CovS:
            return covariance_sample(
                cloud, static_cast<std::size_t>(std::lround(spec.parameter)));
    }
    throw InvalidInput("apply_filter: unknown method");
}

}  // namespace spdf
