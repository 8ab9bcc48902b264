// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/sym3.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace spdf {

SymTensor3 SymTensor3::outer(const Vec3& v) {
    return {v.x() * v.x(), v.x() * v.y(), v.x() * v.z(),
            v.y() * v.y(), v.y() * v.z(), v.z() * v.z()};
}

SymTensor3 SymTensor3::from_matrix(const Mat3& m) {
    return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)),
            m(1, 1), 0.5 * (m(1, 2) + m(2, 1)), m(2, 2)};
}

Mat3 SymTensor3::to_matrix() const {
    Mat3 m;
    m << xx, xy, xz,
         xy, yy, yz,
         xz, yz, zz;
    return m;
}

SymTensor3& SymTensor3::operator+=(const SymTensor3& rhs) {
    xx += rhs.xx;
    xy += rhs.xy;
    xz += rhs.xz;
    yy += rhs.yy;
    yz += rhs.yz;
    zz += rhs.zz;
    return *this;
}

SymTensor3 SymTensor3::operator+(const SymTensor3& rhs) const {
    SymTensor3 out = *this;
    out += rhs;
    return out;
}

SymTensor3 SymTensor3::operator*(double s) const {
    return {xx * s, xy * s, xz * s, yy * s, yz * s, zz * s};
}

double SymTensor3::max_abs() const {
    double m = std::abs(xx);
    for (double v : {xy, xz, yy, yz, zz}) m = std::max(m, std::abs(v));
    return m;
}

bool SymTensor3::all_finite() const {
    for (double v : {xx, xy, xz, yy, yz, zz}) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Mat3 SpectralDecomp::reconstruct() const {
    Mat3 m = Mat3::Zero();
    for (int d = 0; d < 3; ++d) {
        m += eigenvalues(d) * eigenvectors.col(d) * eigenvectors.col(d).transpose();
    }
    return m;
}

SpectralDecomp eigendecompose_sym3(const SymTensor3& t) {
    if (!t.all_finite()) throw InvalidInput("eigendecompose_sym3: non-finite tensor");

    Eigen::SelfAdjointEigenSolver<Mat3> solver(t.to_matrix());

    SpectralDecomp out;
    // Eigen orders ascending; flip to descending.
    for (int d = 0; d < 3; ++d) {
        out.eigenvalues(d) = solver.eigenvalues()(2 - d);
        out.eigenvectors.col(d) = solver.eigenvectors().col(2 - d);
    }
    for (int d = 0; d < 3; ++d) {
        Vec3 v = out.eigenvectors.col(d);
        for (int c = 0; c < 3; ++c) {
            if (std::abs(v(c)) > 1e-12) {
                if (v(c) < 0.0) out.eigenvectors.col(d) = -v;
                break;
            }
        }
    }
    return out;
}

}  // namespace spdf
