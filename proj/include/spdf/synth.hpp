// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_SYNTH_HPP
#define SPDF_SYNTH_HPP

#include "spdf/types.hpp"

#include <cstdint>
#include <string>

namespace spdf {

enum class SceneKind { Plane, Room, PoleForest, DensityGradient };

SceneKind scene_from_name(const std::string& name);
const char* to_string(SceneKind kind);

/// Ground-truth metadata of a synthetic scene. The sensor sits at the frame
/// origin; scene densities fall off radially from it like a spinning LIDAR.
struct SceneTruth {
    Vec3 sensor_origin = Vec3::Zero();
    std::vector<Vec3> true_normals;
    std::vector<PrimitiveLabel> true_labels;
    std::vector<int> primitive_id;  // which face / pole generated the point
};

struct SynthScene {
    PointCloud cloud;  // normals channel set to the true normals
    SceneTruth truth;
};

/// Deterministic synthetic scenes:
///   plane            flat square at constant density (below the usual
///                    uniformity target), z = 0 exactly when noise is 0
///   room             floor + two walls meeting in a corner + a cylindrical
///                    pole, radial 1/r^2 density from the sensor
///   pole_forest      ground plane + thin vertical poles, radial density
///   density_gradient plane strip with a 50x exponential density falloff
///                    along x (densest at x = 0)
/// noise_sigma adds isotropic Gaussian noise. Throws InvalidInput for
/// n < 100 or an unknown scene name.
SynthScene synth_scene(SceneKind kind, std::size_t n, double noise_sigma,
                       std::uint64_t seed);

}  // namespace spdf

#endif  // SPDF_SYNTH_HPP
