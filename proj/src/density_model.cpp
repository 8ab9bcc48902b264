// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/density_model.hpp"

#include <cmath>

namespace spdf {

void DensityParams::validate() const {
    if (!(rho > 0.0)) throw InvalidInput("DensityParams: rho must be > 0");
    if (!(sigma > 0.0)) throw InvalidInput("DensityParams: sigma must be > 0");
}

namespace {

// xi_D as a function of z = rho^2 / sigma only, which makes the scale
// identity xi_D(a rho, a^2 sigma) == xi_D(rho, sigma) exact.
double xi_of_z(int dimension, double z) {
    if (z < 1e-4) {
        // Series of (D/2) gamma_lower(D/2, z) / z^(D/2); the closed forms
        // cancel catastrophically here. Terms through z^4 leave < 1e-17.
        const double d = static_cast<double>(dimension);
        return 1.0 - d * z / (d + 2.0) + d * z * z / (2.0 * (d + 4.0)) -
               d * z * z * z / (6.0 * (d + 6.0)) +
               d * z * z * z * z / (24.0 * (d + 8.0));
    }
    const double sqrt_z = std::sqrt(z);
    switch (dimension) {
        case 1:
            return 0.5 * std::sqrt(M_PI / z) * std::erf(sqrt_z);
        case 2:
            return -std::expm1(-z) / z;
        case 3:
            return 1.5 *
                   (0.5 * std::sqrt(M_PI) * std::erf(sqrt_z) - sqrt_z * std::exp(-z)) /
                   (z * sqrt_z);
        default:
            return 0.0;
    }
}

}  // namespace

double expected_kernel_strength(int dimension, double rho, double sigma) {
    if (dimension < 1 || dimension > 3) {
        throw InvalidInput("expected_kernel_strength: dimension must be 1, 2 or 3");
    }
    if (!(rho > 0.0) || !(sigma > 0.0)) {
        throw InvalidInput("expected_kernel_strength: rho and sigma must be > 0");
    }
    return xi_of_z(dimension, rho * rho / sigma);
}

ExpectedSaliencies expected_saliencies(const DensityParams& params) {
    params.validate();
    ExpectedSaliencies out;
    out.xi1 = expected_kernel_strength(1, params.rho, params.sigma);
    if (params.xi1_convention == Xi1Convention::Printed) out.xi1 *= 0.5;
    out.xi2 = expected_kernel_strength(2, params.rho, params.sigma);
    out.xi3 = expected_kernel_strength(3, params.rho, params.sigma);

    out.curve_threshold = 0.5 * out.xi1;
    out.surface_threshold = 0.25 * out.xi2;
    out.point_threshold = 5.0 / 6.0 * out.xi3;

    out.curve_eigenvalues = {out.xi1, out.xi1, 0.5 * out.xi1};
    out.surface_eigenvalues = {out.xi2, 0.75 * out.xi2, 0.75 * out.xi2};
    const double j = 5.0 / 6.0 * out.xi3;
    out.junction_eigenvalues = {j, j, j};
    return out;
}

}  // namespace spdf
