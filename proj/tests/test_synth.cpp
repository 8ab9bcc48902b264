// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/synth.hpp"

#include "oracles.hpp"
#include "spdf/filters.hpp"
#include "spdf/kdtree.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace spdf;
using spdf::testing::angle_between_lines;

TEST_SUITE_BEGIN("synth");

TEST_CASE("plane scene with zero noise sits exactly on z = 0") {
    const SynthScene scene = synth_scene(SceneKind::Plane, 2000, 0.0, 11);
    REQUIRE(scene.cloud.size() == 2000);
    for (const Vec3& p : scene.cloud.points) CHECK(p.z() == 0.0);
    for (const Vec3& n : scene.cloud.normals) CHECK(n == Vec3(0, 0, 1));
}

TEST_CASE("scenes are deterministic per seed") {
    const SynthScene a = synth_scene(SceneKind::Room, 3000, 0.002, 13);
    const SynthScene b = synth_scene(SceneKind::Room, 3000, 0.002, 13);
    const SynthScene c = synth_scene(SceneKind::Room, 3000, 0.002, 14);
    REQUIRE(a.cloud.size() == b.cloud.size());
    for (std::size_t i = 0; i < a.cloud.size(); ++i) {
        CHECK(a.cloud.points[i] == b.cloud.points[i]);
    }
    CHECK(a.cloud.points[0] != c.cloud.points[0]);
}

TEST_CASE("room scene recovers at least three distinct plane normals") {
    const SynthScene scene = synth_scene(SceneKind::Room, 8000, 0.002, 15);
    const PointCloud with_n = compute_normals(scene.cloud, 15);

    // Greedy direction clustering (antipodes identified).
    std::vector<Vec3> centers;
    std::vector<std::size_t> counts;
    for (const Vec3& n : with_n.normals) {
        bool found = false;
        for (std::size_t c = 0; c < centers.size(); ++c) {
            if (angle_between_lines(centers[c], n) < 10.0 * M_PI / 180.0) {
                counts[c] += 1;
                found = true;
                break;
            }
        }
        if (!found) {
            centers.push_back(n);
            counts.push_back(1);
        }
    }
    std::size_t big = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        if (counts[c] > with_n.size() / 20) ++big;
    }
    CHECK(big >= 3);
}

TEST_CASE("room scene labels all three primitives") {
    const SynthScene scene = synth_scene(SceneKind::Room, 6000, 0.0, 17);
    std::array<std::size_t, 3> counts{};
    for (PrimitiveLabel l : scene.truth.true_labels) {
        counts[static_cast<std::size_t>(l)] += 1;
    }
    CHECK(counts[0] > 0);  // surfaces dominate
    CHECK(counts[0] > counts[1]);
}

TEST_CASE("density gradient: knn radius grows along x") {
    const SynthScene scene = synth_scene(SceneKind::DensityGradient, 30000, 0.0, 19);
    const SpatialIndex index(scene.cloud);
    // Median k=10 radius per x-bin increases monotonically.
    const int bins = 6;
    std::vector<std::vector<double>> radii(bins);
    for (const Vec3& p : scene.cloud.points) {
        const int b = std::min(bins - 1, static_cast<int>(p.x() / 2.4 * bins));
        radii[b].push_back(index.knn(p, 11).back().distance);
    }
    double prev = 0.0;
    for (int b = 0; b < bins; ++b) {
        REQUIRE(radii[b].size() > 50);
        std::sort(radii[b].begin(), radii[b].end());
        const double med = radii[b][radii[b].size() / 2];
        CHECK(med > prev);
        prev = med;
    }
}

TEST_CASE("pole forest has ground and pole points") {
    const SynthScene scene = synth_scene(SceneKind::PoleForest, 20000, 0.0, 21);
    std::size_t ground = 0, poles = 0;
    for (int id : scene.truth.primitive_id) {
        if (id == 0) {
            ++ground;
        } else {
            ++poles;
        }
    }
    CHECK(ground > 0);
    CHECK(poles > 0);
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(synth_scene(SceneKind::Plane, 50, 0.0, 1), InvalidInput);
    CHECK_THROWS_AS(scene_from_name("donut"), InvalidInput);
    CHECK(scene_from_name("pole_forest") == SceneKind::PoleForest);
}

TEST_SUITE_END();
