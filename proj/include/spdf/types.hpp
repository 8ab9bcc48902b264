// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_TYPES_HPP
#define SPDF_TYPES_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Geometric primitive classes inferred from tensor saliencies.
enum class PrimitiveLabel : std::uint8_t { Surface = 0, Curve = 1, Junction = 2 };

inline const char* to_string(PrimitiveLabel label) {
    switch (label) {
        case PrimitiveLabel::Surface: return "surface";
        case PrimitiveLabel::Curve: return "curve";
        case PrimitiveLabel::Junction: return "junction";
    }
    return "unknown";
}

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InsufficientPoints : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Zero-distance voter/receiver pair; the vote direction is undefined.
struct DegeneratePair : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a minimization problem is rank deficient (e.g. a single plane
/// leaves in-plane motion unobservable).
struct DegenerateGeometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
          line_number(line) {}
    std::size_t line_number;
};

/// Point cloud as parallel arrays: positions plus optional per-point channels.
/// A channel is either empty or has exactly one entry per point.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    std::vector<Vec3> saliencies;  // (surfaceness, curveness, pointness)
    std::vector<PrimitiveLabel> labels;
    std::vector<double> confidences;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    bool has_normals() const { return !normals.empty(); }
    bool has_saliencies() const { return !saliencies.empty(); }
    bool has_labels() const { return !labels.empty(); }
    bool has_confidences() const { return !confidences.empty(); }

    /// Throws InvalidInput if channel lengths are inconsistent, a coordinate is
    /// non-finite, or a normal is not unit length (1e-9).
    void validate() const;

    /// Gathers the given point indices into a new cloud, carrying all present
    /// channels along. Indices must be in range.
    PointCloud select(std::span<const int> indices) const;

    /// Appends another cloud. Channels survive only if present on both sides
    /// (or if one side is empty).
    void append(const PointCloud& other);
};

/// Element of SE(3).
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }

    Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }

    RigidTransform operator*(const RigidTransform& rhs) const {
        return {rotation * rhs.rotation, rotation * rhs.translation + translation};
    }

    RigidTransform inverse() const {
        return {rotation.transpose(), -(rotation.transpose() * translation)};
    }

    /// Max deviation from RtR = I and det(R) = 1.
    double orthonormality_error() const;

    /// Throws InvalidInput if the rotation is not orthonormal within 1e-9.
    void validate() const;

    /// Projects the rotation back onto SO(3) via quaternion normalization.
    RigidTransform orthonormalized() const;
};

/// Applies a transform to all points (and rotates normals when present).
PointCloud transformed(const RigidTransform& t, const PointCloud& cloud);

}  // namespace spdf

#endif  // SPDF_TYPES_HPP
