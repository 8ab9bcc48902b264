// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_REGISTRATION_HPP
#define SPDF_REGISTRATION_HPP

#include "spdf/kdtree.hpp"
#include "spdf/types.hpp"

#include <cstdint>
#include <vector>

namespace spdf {

Mat3 skew(const Vec3& v);

/// Rodrigues rotation exponential.
Mat3 so3_exp(const Vec3& omega);

/// Geodesic rotation angle, acos((trace - 1) / 2) clamped.
double rotation_angle(const Mat3& r);

/// SE(3) exponential of (omega, v).
RigidTransform se3_exp(const Vec3& omega, const Vec3& v);

struct IcpConfig {
    int max_iterations = 40;
    double trim_keep_ratio = 0.75;
    double translation_epsilon = 1e-4;  // m
    double rotation_epsilon = 1e-4;     // rad
    int matches_per_point = 2;
    int normal_k = 20;  // reference normal estimation when normals are absent

    void validate() const;
};

struct Correspondence {
    int reading_index;
    int reference_index;
    double squared_distance;
    Vec3 reference_normal;
};

using Correspondences = std::vector<Correspondence>;

struct PerturbationSpec {
    double translation_magnitude = 0.5;                 // m
    double rotation_magnitude = 20.0 * M_PI / 180.0;    // rad
    std::uint64_t seed = 0;
    // Magnitude-uniform by default: uniform direction times uniform length.
    // Per-axis mode draws each se(3) coordinate from U(-magnitude, magnitude).
    bool per_axis = false;
};

/// Applies a random se(3) perturbation to the ground truth:
/// T = exp(varsigma) * T_gt. Zero magnitudes reproduce T_gt exactly.
RigidTransform perturb(const RigidTransform& t_gt, const PerturbationSpec& spec);

/// For every reading point, its m nearest reference points each yield one
/// correspondence. Throws InvalidInput when the reference lacks normals.
Correspondences match(const PointCloud& reading, const PointCloud& reference,
                      const SpatialIndex& reference_index, int matches_per_point);

/// Keeps the ceil(keep_ratio * n) correspondences with smallest squared
/// distance (ties by position), preserving their original relative order.
Correspondences trim_outliers(const Correspondences& c, double keep_ratio);

/// One linearized point-to-plane solve: minimizes sum(((R q + t - p) . n)^2)
/// with R ~ I + [omega]x over rows [q x n; n]. Throws DegenerateGeometry when
/// the 6x6 normal matrix has condition number above 1e12.
RigidTransform point_to_plane_step(const Correspondences& c, const PointCloud& reading,
                                   const PointCloud& reference);

struct IcpDiagnostics {
    int iterations = 0;
    double final_residual_rms = 0.0;
    bool converged = false;
    bool degenerate = false;
    std::size_t correspondences_used = 0;
};

struct IcpResult {
    RigidTransform transform;
    IcpDiagnostics diagnostics;
};

/// Point-to-plane ICP: transform, match, trim, step, until the incremental
/// motion falls below the epsilons. Degenerate geometry stops the iteration
/// and is reported on the diagnostics with the last valid estimate.
IcpResult icp(const PointCloud& reading, const PointCloud& reference,
              const RigidTransform& t_init, const IcpConfig& cfg);

struct RegistrationErrors {
    double translation;  // m
    double rotation;     // rad
};

/// Error split of delta = T_gt^-1 * T_est: translation norm and geodesic
/// rotation angle.
RegistrationErrors registration_errors(const RigidTransform& t_est,
                                       const RigidTransform& t_gt);

}  // namespace spdf

#endif  // SPDF_REGISTRATION_HPP
