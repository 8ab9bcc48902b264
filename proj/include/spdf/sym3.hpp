// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_SYM3_HPP
#define SPDF_SYM3_HPP

#include "spdf/types.hpp"

namespace spdf {

/// Symmetric 3x3 second-order tensor stored as its six independent entries.
struct SymTensor3 {
    double xx = 0.0, xy = 0.0, xz = 0.0, yy = 0.0, yz = 0.0, zz = 0.0;

    static SymTensor3 identity() { return {1.0, 0.0, 0.0, 1.0, 0.0, 1.0}; }

    /// vv^T (rank-1 stick along v).
    static SymTensor3 outer(const Vec3& v);

    /// Stores the symmetric part (m + m^T)/2.
    static SymTensor3 from_matrix(const Mat3& m);

    Mat3 to_matrix() const;

    SymTensor3& operator+=(const SymTensor3& rhs);
    SymTensor3 operator+(const SymTensor3& rhs) const;
    SymTensor3 operator*(double s) const;

    double max_abs() const;
    bool all_finite() const;
};

/// Ordered eigensystem of a symmetric 3x3 tensor: lambda1 >= lambda2 >= lambda3,
/// eigenvectors as the corresponding columns of an orthonormal matrix.
struct SpectralDecomp {
    Vec3 eigenvalues;    // descending
    Mat3 eigenvectors;   // column d matches eigenvalues(d)

    Vec3 e1() const { return eigenvectors.col(0); }
    Vec3 e2() const { return eigenvectors.col(1); }
    Vec3 e3() const { return eigenvectors.col(2); }

    Mat3 reconstruct() const;
};

/// Eigendecomposition with a deterministic sign convention: each eigenvector is
/// flipped so its first component of magnitude > 1e-12 is positive. Repeated
/// eigenvalues yield an arbitrary orthonormal basis of the eigenspace.
/// Throws InvalidInput on non-finite entries.
SpectralDecomp eigendecompose_sym3(const SymTensor3& t);

}  // namespace spdf

#endif  // SPDF_SYM3_HPP
