// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace spdf {

namespace {

// Max-heap key: worst neighbor first. A candidate improves the heap if it is
// strictly closer, or equally close with a smaller index.
struct HeapEntry {
    double dist_sq;
    int index;
};

struct WorseFirst {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        if (a.dist_sq != b.dist_sq) return a.dist_sq < b.dist_sq;
        return a.index < b.index;
    }
};

}  // namespace

SpatialIndex::SpatialIndex(const PointCloud& cloud) : SpatialIndex(cloud.points) {}

SpatialIndex::SpatialIndex(std::vector<Vec3> points) : pts_(std::move(points)) {
    if (pts_.empty()) throw EmptyInput("SpatialIndex: empty cloud");
    order_.resize(pts_.size());
    for (std::size_t i = 0; i < pts_.size(); ++i) order_[i] = static_cast<int>(i);
    nodes_.reserve(2 * pts_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(pts_.size()));
}

int SpatialIndex::build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    Vec3 lo = pts_[order_[begin]];
    Vec3 hi = lo;
    for (int i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(pts_[order_[i]]);
        hi = hi.cwiseMax(pts_[order_[i]]);
    }
    for (int a = 0; a < 3; ++a) {
        nodes_[id].bbox_min[a] = lo(a);
        nodes_[id].bbox_max[a] = hi(a);
    }

    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return pts_[a](axis) < pts_[b](axis); });

    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double SpatialIndex::box_distance_sq(const Node& node, const Vec3& q) const {
    double d = 0.0;
    for (int a = 0; a < 3; ++a) {
        double diff = 0.0;
        if (q(a) < node.bbox_min[a]) {
            diff = node.bbox_min[a] - q(a);
        } else if (q(a) > node.bbox_max[a]) {
            diff = q(a) - node.bbox_max[a];
        }
        d += diff * diff;
    }
    return d;
}

void SpatialIndex::knn(const Vec3& query, int k, std::vector<Neighbor>& out) const {
    if (k < 1) throw InvalidInput("knn: k must be >= 1");
    const int want = std::min<int>(k, static_cast<int>(pts_.size()));

    std::vector<HeapEntry> heap;
    heap.reserve(static_cast<std::size_t>(want) + 1);
    const WorseFirst cmp;

    auto consider = [&](int idx) {
        const double d2 = (pts_[idx] - query).squaredNorm();
        if (static_cast<int>(heap.size()) < want) {
            heap.push_back({d2, idx});
            std::push_heap(heap.begin(), heap.end(), cmp);
            return;
        }
        const HeapEntry& worst = heap.front();
        if (d2 < worst.dist_sq || (d2 == worst.dist_sq && idx < worst.index)) {
            std::pop_heap(heap.begin(), heap.end(), cmp);
            heap.back() = {d2, idx};
            std::push_heap(heap.begin(), heap.end(), cmp);
        }
    };

    // Depth-first, nearer child first; prune against the current worst.
    std::vector<int> stack;
    stack.push_back(root_);
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        const Node& node = nodes_[id];
        if (static_cast<int>(heap.size()) == want &&
            box_distance_sq(node, query) > heap.front().dist_sq) {
            continue;
        }
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) consider(order_[i]);
            continue;
        }
        const double dl = box_distance_sq(nodes_[node.left], query);
        const double dr = box_distance_sq(nodes_[node.right], query);
        if (dl <= dr) {
            stack.push_back(node.right);
            stack.push_back(node.left);
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }

    std::sort(heap.begin(), heap.end(), [](const HeapEntry& a, const HeapEntry& b) {
        if (a.dist_sq != b.dist_sq) return a.dist_sq < b.dist_sq;
        return a.index < b.index;
    });
    out.resize(heap.size());
    for (std::size_t i = 0; i < heap.size(); ++i) {
        out[i] = {heap[i].index, std::sqrt(heap[i].dist_sq)};
    }
}

std::vector<SpatialIndex::Neighbor> SpatialIndex::knn(const Vec3& query, int k) const {
    std::vector<Neighbor> out;
    knn(query, k, out);
    return out;
}

std::vector<SpatialIndex::Neighbor> SpatialIndex::radius_search(const Vec3& query,
                                                                double radius) const {
    if (radius < 0.0) throw InvalidInput("radius_search: negative radius");
    const double r2 = radius * radius;
    std::vector<HeapEntry> found;

    std::vector<int> stack;
    stack.push_back(root_);
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        const Node& node = nodes_[id];
        if (box_distance_sq(node, query) > r2) continue;
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int idx = order_[i];
                const double d2 = (pts_[idx] - query).squaredNorm();
                if (d2 <= r2) found.push_back({d2, idx});
            }
            continue;
        }
        stack.push_back(node.left);
        stack.push_back(node.right);
    }

    std::sort(found.begin(), found.end(), [](const HeapEntry& a, const HeapEntry& b) {
        if (a.dist_sq != b.dist_sq) return a.dist_sq < b.dist_sq;
        return a.index < b.index;
    });
    std::vector<Neighbor> out(found.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
        out[i] = {found[i].index, std::sqrt(found[i].dist_sq)};
    }
    return out;
}

SpatialIndex build_index(const PointCloud& cloud) { return SpatialIndex(cloud); }

}  // namespace spdf
