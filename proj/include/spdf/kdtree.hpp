// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_KDTREE_HPP
#define SPDF_KDTREE_HPP

#include "spdf/types.hpp"

namespace spdf {

/// Exact k-nearest-neighbor / radius index over a snapshot of a point cloud.
///
/// The index copies the points at construction and is immutable afterwards;
/// concurrent read-only queries from multiple threads are safe. Results are
/// sorted by ascending distance with ties broken by ascending point index, so
/// queries are deterministic and independent of tree layout.
class SpatialIndex {
public:
    struct Neighbor {
        int index;
        double distance;
    };

    /// Throws EmptyInput on an empty cloud.
    explicit SpatialIndex(const PointCloud& cloud);
    explicit SpatialIndex(std::vector<Vec3> points);

    std::size_t size() const { return pts_.size(); }
    const std::vector<Vec3>& points() const { return pts_; }

    /// Exactly min(k, size) results. Throws InvalidInput for k == 0.
    std::vector<Neighbor> knn(const Vec3& query, int k) const;
    void knn(const Vec3& query, int k, std::vector<Neighbor>& out) const;

    /// All points with distance <= radius (closed ball), sorted as knn.
    std::vector<Neighbor> radius_search(const Vec3& query, double radius) const;

private:
    struct Node {
        double bbox_min[3];
        double bbox_max[3];
        int left = -1;    // internal nodes only
        int right = -1;
        int begin = 0;    // leaf range into order_
        int end = 0;
    };

    int build(int begin, int end);
    double box_distance_sq(const Node& node, const Vec3& q) const;

    std::vector<Vec3> pts_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;

    static constexpr int kLeafSize = 16;
};

SpatialIndex build_index(const PointCloud& cloud);

}  // namespace spdf

#endif  // SPDF_KDTREE_HPP
