// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/registration.hpp"

#include "spdf/filters.hpp"
#include "spdf/parallel.hpp"
#include "spdf/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spdf {

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

Mat3 so3_exp(const Vec3& omega) {
    const double theta = omega.norm();
    const Mat3 w = skew(omega);
    if (theta < 1e-9) {
        return Mat3::Identity() + w + 0.5 * w * w;
    }
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / (theta * theta);
    return Mat3::Identity() + a * w + b * w * w;
}

double rotation_angle(const Mat3& r) {
    return std::acos(std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0));
}

RigidTransform se3_exp(const Vec3& omega, const Vec3& v) {
    const double theta = omega.norm();
    const Mat3 w = skew(omega);
    Mat3 jac;
    if (theta < 1e-9) {
        jac = Mat3::Identity() + 0.5 * w + w * w / 6.0;
    } else {
        const double t2 = theta * theta;
        jac = Mat3::Identity() + (1.0 - std::cos(theta)) / t2 * w +
              (theta - std::sin(theta)) / (t2 * theta) * w * w;
    }
    return {so3_exp(omega), jac * v};
}

void IcpConfig::validate() const {
    if (max_iterations < 1) throw InvalidInput("IcpConfig: max_iterations must be >= 1");
    if (!(trim_keep_ratio > 0.0) || trim_keep_ratio > 1.0) {
        throw InvalidInput("IcpConfig: trim keep ratio must be in (0, 1]");
    }
    if (matches_per_point < 1) {
        throw InvalidInput("IcpConfig: matches_per_point must be >= 1");
    }
    if (normal_k < 3) throw InvalidInput("IcpConfig: normal_k must be >= 3");
}

RigidTransform perturb(const RigidTransform& t_gt, const PerturbationSpec& spec) {
    if (spec.rotation_magnitude < 0.0 || spec.translation_magnitude < 0.0) {
        throw InvalidInput("perturb: magnitudes must be >= 0");
    }
    Rng rng(spec.seed);
    Vec3 omega, v;
    if (spec.per_axis) {
        for (int a = 0; a < 3; ++a) {
            omega(a) = rng.uniform(-spec.rotation_magnitude, spec.rotation_magnitude);
        }
        for (int a = 0; a < 3; ++a) {
            v(a) = rng.uniform(-spec.translation_magnitude, spec.translation_magnitude);
        }
    } else {
        const Vec3 axis = rng.unit_vector();
        const double angle = rng.uniform(0.0, spec.rotation_magnitude);
        const Vec3 dir = rng.unit_vector();
        const double len = rng.uniform(0.0, spec.translation_magnitude);
        omega = angle * axis;
        v = len * dir;
    }
    return (se3_exp(omega, v) * t_gt).orthonormalized();
}

Correspondences match(const PointCloud& reading, const PointCloud& reference,
                      const SpatialIndex& reference_index, int matches_per_point) {
    if (matches_per_point < 1) throw InvalidInput("match: matches_per_point must be >= 1");
    if (!reference.has_normals()) throw InvalidInput("match: reference has no normals");

    const int m = std::min<int>(matches_per_point, static_cast<int>(reference.size()));
    Correspondences out(reading.size() * static_cast<std::size_t>(m));
    parallel_for(reading.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<SpatialIndex::Neighbor> nn;
        for (std::size_t i = begin; i < end; ++i) {
            reference_index.knn(reading.points[i], m, nn);
            for (int j = 0; j < m; ++j) {
                out[i * m + j] = {static_cast<int>(i), nn[j].index,
                                  nn[j].distance * nn[j].distance,
                                  reference.normals[nn[j].index]};
            }
        }
    }, 4096);
    return out;
}

Correspondences trim_outliers(const Correspondences& c, double keep_ratio) {
    if (!(keep_ratio > 0.0) || keep_ratio > 1.0) {
        throw InvalidInput("trim_outliers: keep ratio must be in (0, 1]");
    }
    if (c.empty()) return {};
    const std::size_t keep =
        static_cast<std::size_t>(std::ceil(keep_ratio * static_cast<double>(c.size())));
    std::vector<std::size_t> order(c.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (c[a].squared_distance != c[b].squared_distance) {
            return c[a].squared_distance < c[b].squared_distance;
        }
        return a < b;
    });
    order.resize(std::min(keep, order.size()));
    std::sort(order.begin(), order.end());
    Correspondences out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(c[i]);
    return out;
}

RigidTransform point_to_plane_step(const Correspondences& c, const PointCloud& reading,
                                   const PointCloud& reference) {
    if (c.size() < 6) {
        throw DegenerateGeometry("point_to_plane_step: fewer than 6 correspondences");
    }
    Mat6 a = Mat6::Zero();
    Vec6 b = Vec6::Zero();
    for (const Correspondence& pair : c) {
        const Vec3& q = reading.points[pair.reading_index];
        const Vec3& p = reference.points[pair.reference_index];
        const Vec3& n = pair.reference_normal;
        Vec6 row;
        row.head<3>() = q.cross(n);
        row.tail<3>() = n;
        const double residual = (p - q).dot(n);
        a += row * row.transpose();
        b += row * residual;
    }

    Eigen::SelfAdjointEigenSolver<Mat6> solver(a);
    const double lmax = solver.eigenvalues().maxCoeff();
    const double lmin = solver.eigenvalues().minCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12) {
        throw DegenerateGeometry("point_to_plane_step: normal matrix is ill-conditioned");
    }
    const Vec6 x = solver.eigenvectors() *
                   (solver.eigenvectors().transpose() * b).cwiseQuotient(solver.eigenvalues());
    return {so3_exp(x.head<3>()), x.tail<3>()};
}

IcpResult icp(const PointCloud& reading, const PointCloud& reference,
              const RigidTransform& t_init, const IcpConfig& cfg) {
    cfg.validate();
    t_init.validate();
    if (reading.empty()) throw EmptyInput("icp: empty reading");
    if (reference.size() <= static_cast<std::size_t>(cfg.normal_k)) {
        throw InsufficientPoints("icp: reference too small for normal estimation");
    }

    const PointCloud ref = reference.has_normals()
                               ? reference
                               : compute_normals(reference, cfg.normal_k);
    const SpatialIndex ref_index(ref);

    IcpResult result;
    result.transform = t_init;
    RigidTransform& t = result.transform;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        const PointCloud moved = transformed(t, reading);
        const Correspondences all = match(moved, ref, ref_index, cfg.matches_per_point);
        const Correspondences kept = trim_outliers(all, cfg.trim_keep_ratio);
        result.diagnostics.correspondences_used = kept.size();

        RigidTransform delta;
        try {
            delta = point_to_plane_step(kept, moved, ref);
        } catch (const DegenerateGeometry&) {
            result.diagnostics.degenerate = true;
            result.diagnostics.iterations = iter;
            return result;
        }

        result.diagnostics.iterations = iter + 1;

        double rss = 0.0;
        for (const Correspondence& pair : kept) {
            const Vec3 q = delta * moved.points[pair.reading_index];
            rss += std::pow((ref.points[pair.reference_index] - q).dot(pair.reference_normal), 2);
        }
        result.diagnostics.final_residual_rms =
            std::sqrt(rss / static_cast<double>(kept.size()));

        // A sub-threshold increment is noise; stop without applying it.
        if (delta.translation.norm() < cfg.translation_epsilon &&
            rotation_angle(delta.rotation) < cfg.rotation_epsilon) {
            result.diagnostics.converged = true;
            break;
        }
        t = (delta * t).orthonormalized();
    }
    return result;
}

RegistrationErrors registration_errors(const RigidTransform& t_est,
                                       const RigidTransform& t_gt) {
    const RigidTransform delta = t_gt.inverse() * t_est;
    return {delta.translation.norm(), rotation_angle(delta.rotation)};
}

}  // namespace spdf
