// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_FILTERS_HPP
#define SPDF_FILTERS_HPP

#include "spdf/types.hpp"

#include <cstdint>
#include <string>

namespace spdf {

enum class FilterMethod {
    Random,
    Voxel,
    OctreeCentroid,
    MaxDensity,
    SSNormal,
    NSS,
    CovS,
};

/// One baseline filter plus its scalar parameter (semantics per method) and a
/// seed for the stochastic ones.
struct FilterSpec {
    FilterMethod method = FilterMethod::Random;
    double parameter = 1.0;
    std::uint64_t seed = 0;
};

FilterMethod filter_method_from_name(const std::string& name);
const char* to_string(FilterMethod m);

/// Keeps each point independently with probability p. Deterministic per seed.
PointCloud random_sample(const PointCloud& cloud, double p, std::uint64_t seed);

/// Axis-aligned grid anchored at the cloud's min corner; each occupied cell is
/// replaced by the centroid of its points.
PointCloud voxel_sample(const PointCloud& cloud, double cell_size);

/// Octree subdivision (depth cap 21) until every leaf holds at most
/// max_points_per_cell points; each leaf is replaced by its centroid.
/// Capacity 1 keeps every point. leaf_sizes, when given, receives the point
/// count of each emitted leaf (same order as the output).
PointCloud octree_sample(const PointCloud& cloud, int max_points_per_cell,
                         std::vector<std::size_t>* leaf_sizes = nullptr);

/// Local density from the k=10 NN radius (spherical approximation); points in
/// regions denser than max_density (points/m^3) are kept with probability
/// max_density / density.
PointCloud max_density_sample(const PointCloud& cloud, double max_density,
                              std::uint64_t seed);

/// Recursive median split along the longest bounding-box axis until bins hold
/// at most neighbors_to_merge points; each bin emits its centroid with the
/// bin's smallest-covariance-eigenvalue direction as normal.
PointCloud sampling_surface_normal(const PointCloud& cloud, int neighbors_to_merge);

/// Normal-space sampling: unit normals are bucketed on a 32x16
/// longitude-latitude hemisphere grid (antipodes identified) and points are
/// drawn round-robin, one per non-empty bucket, until target is reached.
/// Normals are computed (k=10) when the cloud has none.
PointCloud normal_space_sample(const PointCloud& cloud, std::size_t target,
                               std::uint64_t seed);

/// Covariance stability sampling: per-point constraint c_i = [p_i x n_i; n_i],
/// points ranked by |c_i . v_j| against the eigenvectors v_j of C = sum c c^T,
/// drawn round-robin across the six motion modes. Null modes (rank-deficient
/// geometry) fall back to a deterministic shuffled order and set the flag.
PointCloud covariance_sample(const PointCloud& cloud, std::size_t target,
                             bool* rank_deficient = nullptr);

/// Per-point normal from the smallest eigenvector of the k-NN covariance,
/// oriented toward the frame origin. Returns a copy with the normal channel.
PointCloud compute_normals(const PointCloud& cloud, int k);

/// Dispatch by spec (NSS/CovS parameters are point counts, rounded).
PointCloud apply_filter(const PointCloud& cloud, const FilterSpec& spec);

}  // namespace spdf

#endif  // SPDF_FILTERS_HPP
