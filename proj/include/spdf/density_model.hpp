// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_DENSITY_MODEL_HPP
#define SPDF_DENSITY_MODEL_HPP

#include "spdf/types.hpp"

#include <array>

namespace spdf {

/// Convention for the D=1 expected kernel strength. The general expectation
/// formula gives sqrt(pi*sigma)/(2*rho) * erf(rho/sqrt(sigma)), which tends to
/// 1 as rho -> 0 and is consistent with the D=2,3 cases; a commonly printed
/// variant carries an extra factor 1/2. Both are selectable.
enum class Xi1Convention { GeneralFormula, Printed };

struct DensityParams {
    double rho = 0.2;    // uniformity radius, m
    double sigma = 0.2;  // vote scale, m^2
    Xi1Convention xi1_convention = Xi1Convention::GeneralFormula;

    void validate() const;
};

/// Expected kernel strength xi_D: the expectation of exp(-delta^2/sigma) for
/// delta the distance of a uniform sample in a D-ball of radius rho,
///   xi_D = (D/2) * gamma_lower(D/2, z) / z^(D/2),  z = rho^2 / sigma.
/// Specializations:
///   D=1: sqrt(pi*sigma)/(2 rho) * erf(rho/sqrt(sigma))
///   D=2: sigma/rho^2 * (1 - exp(-rho^2/sigma))
///   D=3: 3 sigma/(4 rho^3) * (sqrt(pi*sigma) erf(rho/sqrt(sigma))
///                             - 2 rho exp(-rho^2/sigma))
/// Throws InvalidInput for dimension outside {1,2,3} or non-positive rho/sigma.
double expected_kernel_strength(int dimension, double rho, double sigma);

/// Expected eigenvalues and saliency thresholds for a uniform density in a
/// D-hyperball:
///   curve    (D=1): eigenvalues (xi1, xi1, xi1/2),        saliency xi1/2
///   surface  (D=2): eigenvalues (xi2, 3 xi2/4, 3 xi2/4),  saliency xi2/4
///   junction (D=3): eigenvalues 5 xi3/6 (all three),      saliency 5 xi3/6
struct ExpectedSaliencies {
    double xi1, xi2, xi3;
    double curve_threshold;     // xi1 / 2
    double surface_threshold;   // xi2 / 4
    double point_threshold;     // 5 xi3 / 6
    std::array<double, 3> curve_eigenvalues;
    std::array<double, 3> surface_eigenvalues;
    std::array<double, 3> junction_eigenvalues;

    double threshold_for(PrimitiveLabel label) const {
        switch (label) {
            case PrimitiveLabel::Surface: return surface_threshold;
            case PrimitiveLabel::Curve: return curve_threshold;
            case PrimitiveLabel::Junction: return point_threshold;
        }
        return point_threshold;
    }
};

ExpectedSaliencies expected_saliencies(const DensityParams& params);

}  // namespace spdf

#endif  // SPDF_DENSITY_MODEL_HPP
