// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/spdf_filter.hpp"

#include "oracles.hpp"
#include "spdf/kdtree.hpp"
#include "spdf/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

using namespace spdf;
using spdf::testing::coefficient_of_variation;

namespace {

PointCloud random_plane(double side, double density, std::uint64_t seed,
                        double z = 0.0) {
    Rng rng(seed);
    PointCloud cloud;
    const auto n = static_cast<std::size_t>(side * side * density);
    for (std::size_t i = 0; i < n; ++i) {
        cloud.points.emplace_back(rng.uniform(0, side), rng.uniform(0, side), z);
    }
    return cloud;
}

bool is_subset(const PointCloud& sub, const PointCloud& super) {
    std::multiset<std::array<double, 3>> s;
    for (const Vec3& p : super.points) s.insert({p.x(), p.y(), p.z()});
    for (const Vec3& p : sub.points) {
        auto it = s.find({p.x(), p.y(), p.z()});
        if (it == s.end()) return false;
        s.erase(it);
    }
    return true;
}

// Fraction of points whose three first-pass saliencies all sit at or below
// the expected values.
double below_threshold_fraction(const PointCloud& cloud, const SpdfConfig& cfg) {
    const ExpectedSaliencies e = expected_saliencies(cfg.density);
    const auto tensors = first_pass(cloud, cfg.vote);
    std::size_t ok = 0;
    for (const SymTensor3& t : tensors) {
        const Interpretation in = interpret(eigendecompose_sym3(t));
        if (in.surfaceness <= e.surface_threshold && in.curveness <= e.curve_threshold &&
            in.pointness <= e.point_threshold) {
            ++ok;
        }
    }
    return static_cast<double>(ok) / static_cast<double>(cloud.size());
}

}  // namespace

TEST_SUITE_BEGIN("spdf");

TEST_CASE("config validation") {
    SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
    CHECK_NOTHROW(cfg.validate());
    cfg.density.sigma = 0.3;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = SpdfConfig::with(0.2, 0.2);
    cfg.outlier_threshold = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = SpdfConfig::with(0.2, 0.2);
    cfg.convergence_fraction = 0.6;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("uniformize leaves a sparse cloud unchanged") {
    const PointCloud cloud = random_plane(5.0, 80.0, 61);
    const SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
    UniformizeReport report;
    const PointCloud out = uniformize(cloud, cfg, &report);
    CHECK(out.size() == cloud.size());
    CHECK(report.converged);
    CHECK(report.iterations.size() == 1);
    CHECK(report.iterations[0].removed == 0);
}

TEST_CASE("uniformize decimates dense clusters, keeps the sparse plane") {
    Rng rng(63);
    PointCloud cloud = random_plane(5.0, 100.0, 64);
    const std::size_t plane_n = cloud.size();
    for (const Vec3 center : {Vec3(1.5, 1.5, 0.0), Vec3(3.5, 3.5, 0.0)}) {
        for (int i = 0; i < 600; ++i) {
            const double ang = rng.uniform(0.0, 2.0 * M_PI);
            const double rad = 0.1 * std::sqrt(rng.uniform());
            cloud.points.push_back(center + rad * Vec3(std::cos(ang), std::sin(ang), 0.0));
        }
    }

    // The clusters are small islands; a tight convergence fraction keeps the
    // loop running until their local excess is gone too.
    SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
    cfg.convergence_fraction = 0.001;
    UniformizeReport report;
    const PointCloud out = uniformize(cloud, cfg, &report);

    CHECK(is_subset(out, cloud));
    CHECK(report.converged);

    // Plane points far from the clusters survive; the clusters collapse.
    std::multiset<std::array<double, 3>> kept;
    for (const Vec3& p : out.points) kept.insert({p.x(), p.y(), p.z()});
    std::size_t plane_far = 0, plane_far_kept = 0, cluster_kept = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        const bool in_cloud = kept.count({p.x(), p.y(), p.z()}) > 0;
        if (i < plane_n) {
            if ((p - Vec3(1.5, 1.5, 0)).norm() > 0.5 && (p - Vec3(3.5, 3.5, 0)).norm() > 0.5) {
                ++plane_far;
                if (in_cloud) ++plane_far_kept;
            }
        } else if (in_cloud) {
            ++cluster_kept;
        }
    }
    CHECK(static_cast<double>(plane_far_kept) >= 0.99 * static_cast<double>(plane_far));
    CHECK(cluster_kept < 720);  // tail-clipping equilibrium, down from 1200

    CHECK(below_threshold_fraction(out, cfg) >= 0.95);
}

TEST_CASE("uniformize counts decrease monotonically on a dense plane") {
    const PointCloud cloud = random_plane(4.0, 1600.0, 65);
    const SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
    UniformizeReport report;
    const PointCloud out = uniformize(cloud, cfg, &report);

    CHECK(out.size() < cloud.size());
    for (std::size_t i = 1; i < report.iterations.size(); ++i) {
        CHECK(report.iterations[i].points_before <= report.iterations[i - 1].points_before);
    }
    CHECK(report.converged);
    // Surfaces equilibrate near the k / (pi rho^2) uniform density
    // (~398/m^2 here, ~6400 points on 16 m^2, minus edge effects).
    CHECK(out.size() < 9000);
    CHECK(out.size() > 3500);
    CHECK(below_threshold_fraction(out, cfg) >= 0.95);
}

TEST_CASE("uniformize is idempotent up to the convergence fraction") {
    const PointCloud cloud = random_plane(4.0, 900.0, 67);
    const SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
    const PointCloud once = uniformize(cloud, cfg);
    const PointCloud twice = uniformize(once, cfg);
    CHECK(static_cast<double>(once.size() - twice.size()) <=
          cfg.convergence_fraction * static_cast<double>(once.size()) + 1.0);
}

TEST_CASE("uniformize requires more than k points") {
    const PointCloud cloud = random_plane(1.0, 30.0, 69);
    CHECK_THROWS_AS(uniformize(cloud, SpdfConfig::with(0.2, 0.2)), InsufficientPoints);
}

TEST_CASE("subset, determinism and monotone-count properties on random mixes") {
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(2000 + trial);
        PointCloud cloud;
        // A small plane patch plus a dense blob, scaled to k = 12 voting.
        const double side = 1.2;
        for (int i = 0; i < 260; ++i) {
            cloud.points.emplace_back(rng.uniform(0, side), rng.uniform(0, side), 0.0);
        }
        const Vec3 center(rng.uniform(0.3, 0.9), rng.uniform(0.3, 0.9), 0.0);
        for (int i = 0; i < 60; ++i) {
            cloud.points.push_back(center + 0.03 * rng.gaussian_vec3());
        }

        SpdfConfig cfg = SpdfConfig::with(0.1, 0.1, 12);
        UniformizeReport report;
        const PointCloud out = uniformize(cloud, cfg, &report);
        CHECK(is_subset(out, cloud));
        for (std::size_t i = 1; i < report.iterations.size(); ++i) {
            CHECK(report.iterations[i].points_before <=
                  report.iterations[i - 1].points_before);
        }
        const PointCloud again = uniformize(cloud, cfg);
        REQUIRE(again.size() == out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(again.points[i] == out.points[i]);
        }
    }
}

TEST_CASE("label_and_reject labels a clean plane Surface and keeps it") {
    const PointCloud cloud = random_plane(5.0, 120.0, 71);
    SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
    RejectionStats stats;
    const LabeledCloud out = label_and_reject(cloud, cfg, &stats);
    CHECK(out.cloud.size() == cloud.size());
    std::size_t surfaces = 0;
    for (PrimitiveLabel l : out.cloud.labels) {
        if (l == PrimitiveLabel::Surface) ++surfaces;
    }
    CHECK(static_cast<double>(surfaces) >= 0.95 * static_cast<double>(cloud.size()));
    CHECK(out.directions.size() == out.cloud.size());
    for (std::size_t i = 0; i < out.cloud.size(); ++i) {
        const auto cls = static_cast<int>(out.cloud.labels[i]);
        CHECK(out.cloud.confidences[i] == out.cloud.saliencies[i](cls));
    }
}

TEST_CASE("label_and_reject removes isolated outliers") {
    PointCloud cloud = random_plane(7.0, 150.0, 73);
    const std::size_t plane_n = cloud.size();
    Rng rng(74);
    const std::size_t outliers = plane_n / 100;
    for (std::size_t i = 0; i < outliers; ++i) {
        cloud.points.emplace_back(rng.uniform(0, 7), rng.uniform(0, 7),
                                  rng.uniform(0.5, 2.5));
    }

    SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
    const LabeledCloud out = label_and_reject(cloud, cfg);

    std::multiset<std::array<double, 3>> kept;
    for (const Vec3& p : out.cloud.points) kept.insert({p.x(), p.y(), p.z()});
    std::size_t plane_kept = 0, outliers_kept = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        if (kept.count({p.x(), p.y(), p.z()}) == 0) continue;
        if (i < plane_n) {
            ++plane_kept;
        } else {
            ++outliers_kept;
        }
    }
    CHECK(static_cast<double>(plane_kept) >= 0.98 * static_cast<double>(plane_n));
    CHECK(static_cast<double>(outliers_kept) <= 0.10 * static_cast<double>(outliers));
}

TEST_CASE("label_and_reject with t = 0 keeps everything") {
    const PointCloud cloud = random_plane(4.0, 120.0, 75);
    SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
    cfg.outlier_threshold = 0.0;
    const LabeledCloud out = label_and_reject(cloud, cfg);
    CHECK(out.cloud.size() == cloud.size());
}

TEST_CASE("rejection is monotone in t") {
    PointCloud cloud = random_plane(4.0, 150.0, 77);
    Rng rng(78);
    for (int i = 0; i < 30; ++i) {
        cloud.points.emplace_back(rng.uniform(0, 4), rng.uniform(0, 4),
                                  rng.uniform(0.5, 2.0));
    }
    std::size_t prev = cloud.size() + 1;
    for (double t : {0.0, 0.05, 0.2, 0.5}) {
        SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
        cfg.outlier_threshold = t;
        const std::size_t size = label_and_reject(cloud, cfg).cloud.size();
        CHECK(size <= prev);
        prev = size;
    }
}

TEST_CASE("primitive spatial sample: proportional budgets") {
    Rng rng(79);
    LabeledCloud labeled;
    // 9000 surface / 900 curve / 100 junction points.
    for (int i = 0; i < 9000; ++i) {
        labeled.cloud.points.emplace_back(rng.uniform(0, 10), rng.uniform(0, 10), 0.0);
        labeled.cloud.labels.push_back(PrimitiveLabel::Surface);
    }
    for (int i = 0; i < 900; ++i) {
        labeled.cloud.points.emplace_back(rng.uniform(0, 10), 11.0, 1.0);
        labeled.cloud.labels.push_back(PrimitiveLabel::Curve);
    }
    for (int i = 0; i < 100; ++i) {
        labeled.cloud.points.push_back(Vec3(12, 12, 2) + 0.2 * rng.gaussian_vec3());
        labeled.cloud.labels.push_back(PrimitiveLabel::Junction);
    }
    labeled.cloud.confidences.assign(labeled.cloud.size(), 0.5);
    labeled.cloud.saliencies.assign(labeled.cloud.size(), Vec3(0.3, 0.1, 0.05));

    const PointCloud out = primitive_spatial_sample(labeled, 1000);
    std::array<std::size_t, 3> counts{};
    for (PrimitiveLabel l : out.labels) counts[static_cast<std::size_t>(l)] += 1;

    CHECK(std::abs(static_cast<double>(out.size()) - 1000.0) <= 20.0);
    CHECK(std::abs(static_cast<double>(counts[0]) - 900.0) <= 20.0);
    CHECK(std::abs(static_cast<double>(counts[1]) - 90.0) <= 4.0);
    CHECK(std::abs(static_cast<double>(counts[2]) - 10.0) <= 2.0);
}

TEST_CASE("primitive spatial sample: target = size is the identity") {
    Rng rng(81);
    LabeledCloud labeled;
    for (int i = 0; i < 500; ++i) {
        labeled.cloud.points.emplace_back(rng.uniform(0, 2), rng.uniform(0, 2), 0.0);
        labeled.cloud.labels.push_back(PrimitiveLabel::Surface);
    }
    const PointCloud out = primitive_spatial_sample(labeled, 500);
    CHECK(out.size() == 500);
    CHECK_THROWS_AS(primitive_spatial_sample(labeled, 501), InvalidInput);
    CHECK_THROWS_AS(primitive_spatial_sample(labeled, 2), InvalidInput);
}

TEST_CASE("primitive spatial sample does not worsen uniformity") {
    LabeledCloud labeled;
    Rng rng(83);
    for (int i = 0; i < 8000; ++i) {
        labeled.cloud.points.emplace_back(rng.uniform(0, 8), rng.uniform(0, 8), 0.0);
        labeled.cloud.labels.push_back(PrimitiveLabel::Surface);
    }
    const PointCloud out = primitive_spatial_sample(labeled, 2000);

    auto nn_cov = [](const PointCloud& cloud) {
        const SpatialIndex index(cloud);
        std::vector<double> d1;
        d1.reserve(cloud.size());
        for (const Vec3& p : cloud.points) {
            d1.push_back(index.knn(p, 2).back().distance);
        }
        return coefficient_of_variation(d1);
    };
    CHECK(nn_cov(out) <= nn_cov(labeled.cloud) + 1e-9);
}

TEST_CASE("spdf pipeline composes and keeps labels") {
    // Plane + pole + dense corner blob: all three primitives present.
    Rng rng(85);
    PointCloud cloud = random_plane(4.0, 260.0, 86);
    for (int i = 0; i < 900; ++i) {
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        cloud.points.push_back(Vec3(2.0 + 0.05 * std::cos(ang), 2.0 + 0.05 * std::sin(ang),
                                    rng.uniform(0.0, 2.0)));
    }
    for (int i = 0; i < 500; ++i) {
        cloud.points.push_back(Vec3(0.5, 0.5, 1.0) + 0.05 * rng.gaussian_vec3());
    }

    SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
    SpdfReport report;
    const PointCloud out = spdf::spdf(cloud, cfg, &report);

    CHECK(out.size() > 0);
    CHECK(out.size() <= cloud.size());
    CHECK(out.has_labels());
    CHECK(out.has_confidences());
    std::array<bool, 3> present{};
    for (PrimitiveLabel l : out.labels) present[static_cast<std::size_t>(l)] = true;
    CHECK(present[0]);
    CHECK(present[1]);
    CHECK(present[2]);
    CHECK(report.input_points == cloud.size());
    CHECK(report.after_uniformize >= report.after_rejection);
}

TEST_CASE("spdf output size weakly decreases as rho grows") {
    const PointCloud cloud = random_plane(4.0, 900.0, 87);
    std::size_t prev = cloud.size() + 1;
    for (double rho : {0.1, 0.2, 0.4, 0.8}) {
        const PointCloud out = spdf::spdf(cloud, SpdfConfig::with(0.2, rho));
        CHECK(out.size() <= prev);
        prev = out.size();
    }
}

TEST_CASE("spatial spdf hits the requested target") {
    const PointCloud cloud = random_plane(5.0, 700.0, 89);
    SpdfConfig cfg = SpdfConfig::with(0.2, 0.2);
    cfg.target_points = 1500;
    const PointCloud out = spdf::spdf(cloud, cfg);
    CHECK(std::abs(static_cast<double>(out.size()) - 1500.0) <= 30.0);
}

TEST_SUITE_END();
