// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/types.hpp"

#include <cmath>

namespace spdf {

void PointCloud::validate() const {
    const std::size_t n = points.size();
    auto check_len = [&](std::size_t len, const char* name) {
        if (len != 0 && len != n) {
            throw InvalidInput(std::string("channel '") + name + "' has length " +
                               std::to_string(len) + ", expected " + std::to_string(n));
        }
    };
    check_len(normals.size(), "normal");
    check_len(saliencies.size(), "saliency");
    check_len(labels.size(), "label");
    check_len(confidences.size(), "confidence");

    for (const Vec3& p : points) {
        if (!p.allFinite()) throw InvalidInput("non-finite point coordinate");
    }
    for (const Vec3& m : normals) {
        if (std::abs(m.norm() - 1.0) > 1e-9) {
            throw InvalidInput("normal channel entry is not unit length");
        }
    }
}

PointCloud PointCloud::select(std::span<const int> indices) const {
    PointCloud out;
    out.points.reserve(indices.size());
    for (int i : indices) out.points.push_back(points[static_cast<std::size_t>(i)]);
    auto gather = [&](const auto& src, auto& dst) {
        if (src.empty()) return;
        dst.reserve(indices.size());
        for (int i : indices) dst.push_back(src[static_cast<std::size_t>(i)]);
    };
    gather(normals, out.normals);
    gather(saliencies, out.saliencies);
    gather(labels, out.labels);
    gather(confidences, out.confidences);
    return out;
}

void PointCloud::append(const PointCloud& other) {
    const bool keep_normals = (empty() || has_normals()) && (other.empty() || other.has_normals());
    const bool keep_sal = (empty() || has_saliencies()) && (other.empty() || other.has_saliencies());
    const bool keep_labels = (empty() || has_labels()) && (other.empty() || other.has_labels());
    const bool keep_conf = (empty() || has_confidences()) && (other.empty() || other.has_confidences());

    points.insert(points.end(), other.points.begin(), other.points.end());
    auto merge = [](bool keep, auto& dst, const auto& src) {
        if (keep) {
            dst.insert(dst.end(), src.begin(), src.end());
        } else {
            dst.clear();
        }
    };
    merge(keep_normals, normals, other.normals);
    merge(keep_sal, saliencies, other.saliencies);
    merge(keep_labels, labels, other.labels);
    merge(keep_conf, confidences, other.confidences);
}

double RigidTransform::orthonormality_error() const {
    const Mat3 gram = rotation.transpose() * rotation;
    double err = (gram - Mat3::Identity()).cwiseAbs().maxCoeff();
    err = std::max(err, std::abs(rotation.determinant() - 1.0));
    return err;
}

void RigidTransform::validate() const {
    if (!rotation.allFinite() || !translation.allFinite()) {
        throw InvalidInput("non-finite transform");
    }
    if (orthonormality_error() > 1e-9) {
        throw InvalidInput("rotation is not a proper orthonormal matrix");
    }
}

RigidTransform RigidTransform::orthonormalized() const {
    Eigen::Quaterniond q(rotation);
    q.normalize();
    return {q.toRotationMatrix(), translation};
}

PointCloud transformed(const RigidTransform& t, const PointCloud& cloud) {
    PointCloud out = cloud;
    for (Vec3& p : out.points) p = t * p;
    for (Vec3& m : out.normals) m = t.rotation * m;
    return out;
}

}  // namespace spdf
