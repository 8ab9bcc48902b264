// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/registration.hpp"

#include "oracles.hpp"
#include "spdf/rng.hpp"
#include "spdf/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace spdf;
using spdf::testing::quaternion_angle;
using spdf::testing::random_rotation;

namespace {

PointCloud three_planes(std::size_t per_plane, std::uint64_t seed) {
    Rng rng(seed);
    PointCloud cloud;
    for (std::size_t i = 0; i < per_plane; ++i) {  // floor z = -1
        cloud.points.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2), -1.0);
        cloud.normals.emplace_back(0, 0, 1);
    }
    for (std::size_t i = 0; i < per_plane; ++i) {  // wall x = 2
        cloud.points.emplace_back(2.0, rng.uniform(-2, 2), rng.uniform(-1, 1));
        cloud.normals.emplace_back(-1, 0, 0);
    }
    for (std::size_t i = 0; i < per_plane; ++i) {  // wall y = 2
        cloud.points.emplace_back(rng.uniform(-2, 2), 2.0, rng.uniform(-1, 1));
        cloud.normals.emplace_back(0, -1, 0);
    }
    return cloud;
}

Correspondences identity_matches(const PointCloud& cloud) {
    Correspondences c(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        c[i] = {static_cast<int>(i), static_cast<int>(i), 0.0, cloud.normals[i]};
    }
    return c;
}

}  // namespace

TEST_SUITE_BEGIN("registration");

TEST_CASE("perturb with zero magnitudes returns the ground truth") {
    RigidTransform t_gt;
    t_gt.rotation = so3_exp(Vec3(0.1, -0.2, 0.3));
    t_gt.translation = Vec3(1, 2, 3);
    PerturbationSpec spec;
    spec.translation_magnitude = 0.0;
    spec.rotation_magnitude = 0.0;
    spec.seed = 5;
    const RigidTransform out = perturb(t_gt, spec);
    CHECK((out.rotation - t_gt.rotation).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((out.translation - t_gt.translation).norm() < 1e-12);
}

TEST_CASE("perturbation errors stay within the configured bounds") {
    const RigidTransform t_gt;  // identity: the se(3) draw is the whole error
    PerturbationSpec spec;
    spec.translation_magnitude = 0.5;
    spec.rotation_magnitude = 20.0 * M_PI / 180.0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        spec.seed = seed;
        const RigidTransform t = perturb(t_gt, spec);
        t.validate();
        const RegistrationErrors err = registration_errors(t, t_gt);
        CHECK(err.translation <= 0.5 + 1e-12);
        CHECK(err.rotation <= 20.0 * M_PI / 180.0 + 1e-12);
    }
}

TEST_CASE("perturb is reproducible and per-axis mode works") {
    RigidTransform t_gt;
    PerturbationSpec spec;
    spec.seed = 99;
    const RigidTransform a = perturb(t_gt, spec);
    const RigidTransform b = perturb(t_gt, spec);
    CHECK((a.rotation - b.rotation).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.translation - b.translation).norm() == 0.0);

    spec.per_axis = true;
    const RigidTransform c = perturb(t_gt, spec);
    c.validate();
    const RegistrationErrors err = registration_errors(c, t_gt);
    CHECK(err.rotation <= std::sqrt(3.0) * spec.rotation_magnitude + 1e-12);
}

TEST_CASE("match: identical clouds self-match at distance zero") {
    const PointCloud cloud = three_planes(200, 101);
    const SpatialIndex index(cloud);
    const Correspondences c = match(cloud, cloud, index, 1);
    REQUIRE(c.size() == cloud.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(c[i].reading_index == static_cast<int>(i));
        CHECK(c[i].reference_index == static_cast<int>(i));
        CHECK(c[i].squared_distance == 0.0);
    }
}

TEST_CASE("match: m = 2 doubles the correspondence count") {
    const PointCloud reference = three_planes(150, 103);
    PointCloud reading = three_planes(100, 104);
    reading.normals.clear();
    const SpatialIndex index(reference);
    CHECK(match(reading, reference, index, 2).size() == 2 * reading.size());
}

TEST_CASE("match equals the brute-force nearest pairs") {
    Rng rng(105);
    PointCloud reference;
    for (int i = 0; i < 400; ++i) {
        reference.points.push_back(rng.gaussian_vec3());
        reference.normals.push_back(rng.unit_vector());
    }
    PointCloud reading;
    for (int i = 0; i < 120; ++i) reading.points.push_back(rng.gaussian_vec3());

    const SpatialIndex index(reference);
    const Correspondences got = match(reading, reference, index, 2);
    for (std::size_t i = 0; i < reading.size(); ++i) {
        const auto want = spdf::testing::brute_force_knn(reference.points,
                                                         reading.points[i], 2);
        CHECK(got[2 * i].reference_index == want[0].index);
        CHECK(got[2 * i + 1].reference_index == want[1].index);
    }

    PointCloud no_normals = reference;
    no_normals.normals.clear();
    CHECK_THROWS_AS(match(reading, no_normals, index, 2), InvalidInput);
}

TEST_CASE("trim keeps the smallest distances in stable order") {
    Correspondences c;
    Rng rng(107);
    for (int i = 0; i < 100; ++i) {
        c.push_back({i, i, rng.uniform(), Vec3::UnitZ()});
    }
    const Correspondences all = trim_outliers(c, 1.0);
    CHECK(all.size() == 100);

    const Correspondences kept = trim_outliers(c, 0.75);
    REQUIRE(kept.size() == 75);
    double max_kept = 0.0;
    for (const auto& pair : kept) max_kept = std::max(max_kept, pair.squared_distance);
    double min_dropped = 1e9;
    std::vector<bool> in_kept(100, false);
    for (const auto& pair : kept) in_kept[pair.reading_index] = true;
    for (const auto& pair : c) {
        if (!in_kept[pair.reading_index]) {
            min_dropped = std::min(min_dropped, pair.squared_distance);
        }
    }
    CHECK(max_kept <= min_dropped);
    for (std::size_t i = 1; i < kept.size(); ++i) {
        CHECK(kept[i - 1].reading_index < kept[i].reading_index);  // original order
    }
}

TEST_CASE("trim ties resolve by position") {
    Correspondences c;
    for (int i = 0; i < 100; ++i) c.push_back({i, i, 0.25, Vec3::UnitZ()});
    const Correspondences kept = trim_outliers(c, 0.75);
    REQUIRE(kept.size() == 75);
    for (int i = 0; i < 75; ++i) CHECK(kept[i].reading_index == i);
}

TEST_CASE("point_to_plane_step: zero residuals give the identity") {
    const PointCloud cloud = three_planes(100, 109);
    const RigidTransform t = point_to_plane_step(identity_matches(cloud), cloud, cloud);
    CHECK((t.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(t.translation.norm() < 1e-12);
}

TEST_CASE("point_to_plane_step recovers a pure translation exactly") {
    const PointCloud reference = three_planes(120, 111);
    const Vec3 shift = 0.1 * Vec3(1, 0, 0) + 0.1 * Vec3(0, 1, 1).normalized();
    PointCloud reading = reference;
    for (Vec3& p : reading.points) p -= shift;

    const RigidTransform t =
        point_to_plane_step(identity_matches(reference), reading, reference);
    CHECK((t.translation - shift).norm() < 1e-9);
    CHECK(rotation_angle(t.rotation) < 1e-9);
}

TEST_CASE("point_to_plane_step on a single plane is degenerate") {
    Rng rng(113);
    PointCloud plane;
    for (int i = 0; i < 200; ++i) {
        plane.points.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2), -1.0);
        plane.normals.emplace_back(0, 0, 1);
    }
    const Correspondences matches = identity_matches(plane);
    CHECK_THROWS_AS(point_to_plane_step(matches, plane, plane), DegenerateGeometry);

    const Correspondences five(matches.begin(), matches.begin() + 5);
    CHECK_THROWS_AS(point_to_plane_step(five, plane, plane), DegenerateGeometry);
}

TEST_CASE("step solution zeroes the cost gradient") {
    // Consistent system: finite differences of the true cost vanish at the
    // returned transform.
    const PointCloud reference = three_planes(80, 115);
    PointCloud reading = reference;
    const Vec3 shift(0.05, -0.03, 0.08);
    for (Vec3& p : reading.points) p -= shift;
    const Correspondences c = identity_matches(reference);
    const RigidTransform sol = point_to_plane_step(c, reading, reference);

    auto cost = [&](const Vec3& dw, const Vec3& dt) {
        const Mat3 r = so3_exp(dw) * sol.rotation;
        const Vec3 t = sol.translation + dt;
        double f = 0.0;
        for (const auto& pair : c) {
            const Vec3 q = r * reading.points[pair.reading_index] + t;
            const double res = (reference.points[pair.reference_index] - q)
                                   .dot(pair.reference_normal);
            f += res * res;
        }
        return f;
    };

    const double h = 1e-6;
    double scale = std::max(cost(Vec3::Zero(), Vec3::Zero()), 1.0);
    for (int a = 0; a < 6; ++a) {
        Vec3 dw = Vec3::Zero(), dt = Vec3::Zero();
        (a < 3 ? dw(a) : dt(a - 3)) = h;
        const double fp = cost(dw, dt);
        (a < 3 ? dw(a) : dt(a - 3)) = -h;
        const double fm = cost(dw, dt);
        CHECK(std::abs(fp - fm) / (2.0 * h) < 1e-6 * scale + 1e-9);
    }
}

TEST_CASE("icp: identical clouds converge immediately") {
    const SynthScene scene = synth_scene(SceneKind::Room, 4000, 0.0, 117);
    IcpConfig cfg;
    const IcpResult res = icp(scene.cloud, scene.cloud, RigidTransform{}, cfg);
    CHECK(res.diagnostics.converged);
    CHECK(res.diagnostics.iterations <= 2);
    CHECK(res.transform.translation.norm() < 1e-9);
    CHECK(rotation_angle(res.transform.rotation) < 1e-9);
}

TEST_CASE("icp: room scene recovers the ground truth under perturbation") {
    const SynthScene ref_scene = synth_scene(SceneKind::Room, 7000, 0.003, 119);
    const SynthScene read_scene = synth_scene(SceneKind::Room, 7000, 0.003, 120);

    RigidTransform t_gt;
    t_gt.rotation = so3_exp(Vec3(0.03, -0.05, 0.08));
    t_gt.translation = Vec3(0.25, -0.15, 0.1);
    const PointCloud reading = transformed(t_gt.inverse(), read_scene.cloud);

    IcpConfig cfg;
    std::vector<double> errors_t, errors_r;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        PerturbationSpec pspec;
        pspec.seed = seed;
        const RigidTransform t_init = perturb(t_gt, pspec);
        const IcpResult res = icp(reading, ref_scene.cloud, t_init, cfg);
        const RegistrationErrors err = registration_errors(res.transform, t_gt);
        errors_t.push_back(err.translation);
        errors_r.push_back(err.rotation);
    }
    std::sort(errors_t.begin(), errors_t.end());
    std::sort(errors_r.begin(), errors_r.end());
    CHECK(errors_t[errors_t.size() / 2] <= 0.02);
    CHECK(errors_r[errors_r.size() / 2] <= 0.5 * M_PI / 180.0);
}

TEST_CASE("icp: trimming shrugs off gross outliers") {
    const SynthScene ref_scene = synth_scene(SceneKind::Room, 6000, 0.003, 121);
    const SynthScene read_scene = synth_scene(SceneKind::Room, 6000, 0.003, 122);

    PointCloud clean = read_scene.cloud;
    clean.normals.clear();
    PointCloud dirty = clean;
    Rng rng(123);
    const std::size_t n_out = dirty.size() / 5;
    for (std::size_t i = 0; i < n_out; ++i) {  // 20% gross outliers
        dirty.points.push_back(Vec3(rng.uniform(-4, 4), rng.uniform(-4, 4),
                                    rng.uniform(-2, 3)));
    }

    IcpConfig cfg;
    PerturbationSpec pspec;
    pspec.seed = 17;
    pspec.translation_magnitude = 0.3;
    pspec.rotation_magnitude = 10.0 * M_PI / 180.0;
    const RigidTransform t_init = perturb(RigidTransform{}, pspec);

    const IcpResult clean_res = icp(clean, ref_scene.cloud, t_init, cfg);
    const IcpResult dirty_res = icp(dirty, ref_scene.cloud, t_init, cfg);
    const double clean_err =
        registration_errors(clean_res.transform, RigidTransform{}).translation;
    const double dirty_err =
        registration_errors(dirty_res.transform, RigidTransform{}).translation;
    CHECK(dirty_err <= std::max(2.0 * clean_err, 0.01));
}

TEST_CASE("icp errors invariant under a common rigid motion") {
    const SynthScene ref_scene = synth_scene(SceneKind::Room, 15000, 0.002, 125);
    const SynthScene read_scene = synth_scene(SceneKind::Room, 15000, 0.002, 126);
    PointCloud reference = ref_scene.cloud;
    PointCloud reading = read_scene.cloud;
    reference.normals.clear();
    reading.normals.clear();

    PerturbationSpec pspec;
    pspec.seed = 31;
    pspec.translation_magnitude = 0.2;
    pspec.rotation_magnitude = 8.0 * M_PI / 180.0;
    const RigidTransform t_init = perturb(RigidTransform{}, pspec);

    // Conjugating both clouds and the init by g maps the ground truth
    // (identity) onto g * I * g^-1 = identity again.
    RigidTransform g;
    g.rotation = so3_exp(Vec3(0.4, 0.2, -0.3));
    g.translation = Vec3(3, -2, 1);
    const RigidTransform t_init_g = (g * t_init * g.inverse()).orthonormalized();

    // The iteration crosses trim/match tie boundaries, so the fixed point can
    // wander by a few correspondence swaps; the errors still agree far below
    // the scene noise.
    IcpConfig cfg;
    const IcpResult base = icp(reading, reference, t_init, cfg);
    const IcpResult moved = icp(transformed(g, reading), transformed(g, reference),
                                t_init_g, cfg);
    const RegistrationErrors base_err =
        registration_errors(base.transform, RigidTransform{});
    const RegistrationErrors moved_err =
        registration_errors(moved.transform, RigidTransform{});
    CHECK(std::abs(moved_err.translation - base_err.translation) < 1e-4);
    CHECK(std::abs(moved_err.rotation - base_err.rotation) < 1e-4);
}

TEST_CASE("registration errors: exact cases") {
    RigidTransform a;
    CHECK(registration_errors(a, a).translation == 0.0);
    CHECK(registration_errors(a, a).rotation == 0.0);

    RigidTransform rot;
    rot.rotation = so3_exp(20.0 * M_PI / 180.0 * Vec3(1, 2, -1).normalized());
    const RegistrationErrors err = registration_errors(rot, RigidTransform{});
    CHECK(err.rotation == doctest::Approx(20.0 * M_PI / 180.0).epsilon(1e-12));
    CHECK(err.translation == 0.0);
}

TEST_CASE("rotation error matches the quaternion oracle") {
    Rng rng(127);
    for (int trial = 0; trial < 200; ++trial) {
        RigidTransform a, b;
        a.rotation = random_rotation(rng);
        a.translation = rng.gaussian_vec3();
        b.rotation = random_rotation(rng);
        b.translation = rng.gaussian_vec3();
        const RegistrationErrors ab = registration_errors(a, b);
        const RegistrationErrors ba = registration_errors(b, a);
        CHECK(ab.rotation ==
              doctest::Approx(quaternion_angle(b.rotation.transpose() * a.rotation))
                  .epsilon(1e-9));
        CHECK(ab.rotation == doctest::Approx(ba.rotation).epsilon(1e-9));
    }
}

TEST_SUITE_END();
