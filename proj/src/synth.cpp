// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/synth.hpp"

#include "spdf/rng.hpp"

#include <algorithm>
#include <cmath>

namespace spdf {

SceneKind scene_from_name(const std::string& name) {
    if (name == "plane") return SceneKind::Plane;
    if (name == "room") return SceneKind::Room;
    if (name == "pole_forest") return SceneKind::PoleForest;
    if (name == "density_gradient") return SceneKind::DensityGradient;
    throw InvalidInput("unknown scene: " + name);
}

const char* to_string(SceneKind kind) {
    switch (kind) {
        case SceneKind::Plane: return "plane";
        case SceneKind::Room: return "room";
        case SceneKind::PoleForest: return "pole_forest";
        case SceneKind::DensityGradient: return "density_gradient";
    }
    return "unknown";
}

namespace {

// A sampleable patch: rectangle in a plane or a cylinder shell.
struct Patch {
    enum class Kind { Rect, Cylinder } kind = Kind::Rect;
    // Rect: origin corner + two edge vectors; normal is their cross product.
    Vec3 corner = Vec3::Zero(), u = Vec3::Zero(), v = Vec3::Zero();
    // Cylinder: vertical axis through (cx, cy), radius, z range.
    double cx = 0, cy = 0, radius = 0, z_lo = 0, z_hi = 0;
    int id = 0;
    double area() const {
        if (kind == Kind::Rect) return u.cross(v).norm();
        return 2.0 * M_PI * radius * (z_hi - z_lo);
    }
};

struct Sample {
    Vec3 p;
    Vec3 n;
    int id;
};

Sample sample_patch(const Patch& patch, Rng& rng) {
    if (patch.kind == Patch::Kind::Rect) {
        const Vec3 p = patch.corner + rng.uniform() * patch.u + rng.uniform() * patch.v;
        return {p, patch.u.cross(patch.v).normalized(), patch.id};
    }
    const double ang = rng.uniform(0.0, 2.0 * M_PI);
    const double z = rng.uniform(patch.z_lo, patch.z_hi);
    const Vec3 radial(std::cos(ang), std::sin(ang), 0.0);
    const Vec3 p = Vec3(patch.cx, patch.cy, z) + patch.radius * radial;
    return {p, radial, patch.id};
}

// Fills the scene with n points drawn from the patches, density proportional
// to 1 / max(r, r_min)^2 from the sensor at the frame origin when radial is
// set, uniform otherwise.
SynthScene sample_scene(const std::vector<Patch>& patches, std::size_t n, bool radial,
                        double r_min, double noise_sigma, Rng& rng) {
    std::vector<double> cumulative;
    double total = 0.0;
    for (const Patch& p : patches) {
        total += p.area();
        cumulative.push_back(total);
    }

    SynthScene scene;
    scene.cloud.points.reserve(n);
    while (scene.cloud.points.size() < n) {
        const double pick = rng.uniform(0.0, total);
        const std::size_t f =
            std::lower_bound(cumulative.begin(), cumulative.end(), pick) -
            cumulative.begin();
        Sample s = sample_patch(patches[std::min(f, patches.size() - 1)], rng);
        if (radial) {
            const double r = std::max(s.p.norm(), r_min);
            if (rng.uniform() >= (r_min * r_min) / (r * r)) continue;
        }
        if (s.n.dot(-s.p) < 0.0) s.n = -s.n;
        scene.cloud.points.push_back(s.p);
        scene.truth.true_normals.push_back(s.n);
        scene.truth.primitive_id.push_back(s.id);
    }
    if (noise_sigma > 0.0) {
        for (Vec3& p : scene.cloud.points) p += noise_sigma * rng.gaussian_vec3();
    }
    scene.cloud.normals = scene.truth.true_normals;
    return scene;
}

void label_by_distance_to_edges(SynthScene& scene, const std::vector<Vec3>& edge_points,
                                const std::vector<Vec3>& edge_dirs,
                                const std::vector<Vec3>& corners, double margin) {
    scene.truth.true_labels.assign(scene.cloud.size(), PrimitiveLabel::Surface);
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        const Vec3& p = scene.cloud.points[i];
        for (const Vec3& c : corners) {
            if ((p - c).norm() < margin) {
                scene.truth.true_labels[i] = PrimitiveLabel::Junction;
                break;
            }
        }
        if (scene.truth.true_labels[i] != PrimitiveLabel::Surface) continue;
        for (std::size_t e = 0; e < edge_points.size(); ++e) {
            const Vec3 d = p - edge_points[e];
            if ((d - d.dot(edge_dirs[e]) * edge_dirs[e]).norm() < margin) {
                scene.truth.true_labels[i] = PrimitiveLabel::Curve;
                break;
            }
        }
    }
}

SynthScene make_plane(std::size_t n, double noise_sigma, Rng& rng) {
    const double side = std::sqrt(static_cast<double>(n) / 150.0);  // 150 pts/m^2
    std::vector<Patch> patches(1);
    patches[0].corner = Vec3(-0.5 * side, -0.5 * side, 0.0);
    patches[0].u = Vec3(side, 0.0, 0.0);
    patches[0].v = Vec3(0.0, side, 0.0);
    SynthScene scene = sample_scene(patches, n, false, 0.0, noise_sigma, rng);
    scene.truth.sensor_origin = Vec3(0.0, 0.0, 1.5);
    scene.truth.true_labels.assign(n, PrimitiveLabel::Surface);
    // The plane passes through the origin; keep the truth normals on +z.
    for (Vec3& m : scene.truth.true_normals) m = Vec3(0, 0, 1);
    scene.cloud.normals = scene.truth.true_normals;
    return scene;
}

SynthScene make_room(std::size_t n, double noise_sigma, Rng& rng) {
    const double half = 6.0, z_lo = -1.2, z_hi = 2.3;
    std::vector<Patch> patches;

    Patch floor;
    floor.corner = Vec3(-half, -half, z_lo);
    floor.u = Vec3(2 * half, 0, 0);
    floor.v = Vec3(0, 2 * half, 0);
    floor.id = 0;
    patches.push_back(floor);

    Patch wall_x;  // plane x = half
    wall_x.corner = Vec3(half, -half, z_lo);
    wall_x.u = Vec3(0, 2 * half, 0);
    wall_x.v = Vec3(0, 0, z_hi - z_lo);
    wall_x.id = 1;
    patches.push_back(wall_x);

    Patch wall_y;  // plane y = half
    wall_y.corner = Vec3(-half, half, z_lo);
    wall_y.u = Vec3(2 * half, 0, 0);
    wall_y.v = Vec3(0, 0, z_hi - z_lo);
    wall_y.id = 2;
    patches.push_back(wall_y);

    Patch pole;
    pole.kind = Patch::Kind::Cylinder;
    pole.cx = -2.5;
    pole.cy = -2.5;
    pole.radius = 0.35;
    pole.z_lo = z_lo;
    pole.z_hi = z_hi;
    pole.id = 3;
    patches.push_back(pole);

    SynthScene scene = sample_scene(patches, n, true, 0.8, noise_sigma, rng);
    scene.truth.sensor_origin = Vec3::Zero();
    label_by_distance_to_edges(
        scene,
        {Vec3(half, half, 0), Vec3(half, -half, z_lo), Vec3(-half, half, z_lo)},
        {Vec3(0, 0, 1), Vec3(0, 1, 0), Vec3(1, 0, 0)},
        {Vec3(half, half, z_lo)}, 0.04);
    return scene;
}

SynthScene make_pole_forest(std::size_t n, double noise_sigma, Rng& rng) {
    const double extent = 8.0, ground_z = -1.5;
    std::vector<Patch> patches;

    Patch ground;
    ground.corner = Vec3(-extent, -extent, ground_z);
    ground.u = Vec3(2 * extent, 0, 0);
    ground.v = Vec3(0, 2 * extent, 0);
    ground.id = 0;
    patches.push_back(ground);

    // Trunk-sized poles, kept well apart with distinct girths so trunks are
    // not interchangeable under moderate misalignments. The layout is a fixed
    // property of the scene: the caller's seed drives only the sampling, so
    // two draws of the scene share the same geometry.
    Rng layout(0x9c13f07e57ULL);
    std::vector<Vec3> centers;
    for (int i = 0; i < 9; ++i) {
        double cx = 0.0, cy = 0.0;
        for (int attempt = 0; attempt < 400; ++attempt) {
            const double ang = layout.uniform(0.0, 2.0 * M_PI);
            const double dist = layout.uniform(2.5, 7.0);
            cx = dist * std::cos(ang);
            cy = dist * std::sin(ang);
            bool clear = true;
            for (const Vec3& c : centers) {
                if ((Vec3(cx, cy, 0) - c).head<2>().norm() < 3.2) {
                    clear = false;
                    break;
                }
            }
            if (clear) break;
        }
        centers.emplace_back(cx, cy, 0.0);
        Patch pole;
        pole.kind = Patch::Kind::Cylinder;
        pole.cx = cx;
        pole.cy = cy;
        pole.radius = layout.uniform(0.12, 0.40);
        pole.z_lo = ground_z;
        pole.z_hi = ground_z + layout.uniform(2.5, 5.0);
        pole.id = 1 + i;
        patches.push_back(pole);
    }

    SynthScene scene = sample_scene(patches, n, true, 1.0, noise_sigma, rng);
    scene.truth.sensor_origin = Vec3::Zero();
    scene.truth.true_labels.resize(scene.cloud.size());
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        scene.truth.true_labels[i] = scene.truth.primitive_id[i] == 0
                                         ? PrimitiveLabel::Surface
                                         : PrimitiveLabel::Curve;
    }
    return scene;
}

SynthScene make_density_gradient(std::size_t n, double noise_sigma, Rng& rng) {
    // Plane strip with a 60x exponential density falloff along x, the sparse
    // end at 500 pts/m^2; the strip width scales with n to keep the absolute
    // densities fixed (wide strips keep edge effects negligible).
    const double length = 2.4;
    const double ratio = 60.0;
    const double tau = length / std::log(ratio);
    const double d_min = 500.0;
    const double per_width = d_min * tau * (ratio - 1.0);
    const double width = static_cast<double>(n) / per_width;
    const double cdf_scale = 1.0 - std::exp(-length / tau);

    SynthScene scene;
    scene.cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -tau * std::log(1.0 - rng.uniform() * cdf_scale);
        const double y = rng.uniform(0.0, width);
        scene.cloud.points.emplace_back(x, y, 0.0);
        scene.truth.true_normals.emplace_back(0.0, 0.0, 1.0);
        scene.truth.primitive_id.push_back(0);
    }
    if (noise_sigma > 0.0) {
        for (Vec3& p : scene.cloud.points) p += noise_sigma * rng.gaussian_vec3();
    }
    scene.truth.sensor_origin = Vec3(0.0, 0.5 * width, 1.0);
    scene.truth.true_labels.assign(n, PrimitiveLabel::Surface);
    scene.cloud.normals = scene.truth.true_normals;
    return scene;
}

}  // namespace

SynthScene synth_scene(SceneKind kind, std::size_t n, double noise_sigma,
                       std::uint64_t seed) {
    if (n < 100) throw InvalidInput("synth_scene: n must be >= 100");
    if (noise_sigma < 0.0) throw InvalidInput("synth_scene: negative noise");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
    switch (kind) {
        case SceneKind::Plane: return make_plane(n, noise_sigma, rng);
        case SceneKind::Room: return make_room(n, noise_sigma, rng);
        case SceneKind::PoleForest: return make_pole_forest(n, noise_sigma, rng);
        case SceneKind::DensityGradient: return make_density_gradient(n, noise_sigma, rng);
    }
    throw InvalidInput("synth_scene: unknown scene kind");
}

}  // namespace spdf
