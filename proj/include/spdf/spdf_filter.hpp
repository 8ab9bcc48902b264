// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_SPDF_FILTER_HPP
#define SPDF_SPDF_FILTER_HPP

#include "spdf/density_model.hpp"
#include "spdf/tensor_voting.hpp"
#include "spdf/types.hpp"

#include <array>
#include <optional>
#include <vector>

namespace spdf {

/// Spectral decomposition filter configuration. vote.sigma and density.sigma
/// must agree; with() keeps them in sync.
struct SpdfConfig {
    VoteConfig vote;
    DensityParams density;
    double outlier_threshold = 0.10;      // t: fraction of per-primitive max confidence
    int max_iterations = 50;
    double convergence_fraction = 0.01;   // stop when removed fraction drops below
    std::optional<std::size_t> target_points;  // enables the spatial stage
    double decimation_aggressiveness = 0.5;    // fraction of marked points removed per iteration

    static SpdfConfig with(double sigma, double rho, int k = 50);
    void validate() const;
};

/// Uniformized, labeled cloud: the label / confidence / saliency channels are
/// set and directions carry the per-point eigenvector frames.
struct LabeledCloud {
    PointCloud cloud;
    std::vector<Mat3> directions;
};

struct SaliencyHistogram {
    double threshold = 0.0;
    double bin_width = 0.0;
    std::vector<std::size_t> counts;  // dominant saliency, bins over [0, 1]
};

struct UniformizeIteration {
    std::size_t points_before = 0;
    std::size_t marked = 0;
    std::size_t removed = 0;
};

struct UniformizeReport {
    std::vector<UniformizeIteration> iterations;
    bool converged = false;
    std::size_t duplicate_votes_skipped = 0;
    // First-pass saliency distributions (surfaceness, curveness, pointness),
    // each with its expected-value threshold, before and after uniformization.
    std::array<SaliencyHistogram, 3> initial_histograms;
    std::array<SaliencyHistogram, 3> final_histograms;
};

struct RejectionStats {
    std::array<std::size_t, 3> class_counts{};    // before rejection
    std::array<std::size_t, 3> class_rejected{};
    std::array<double, 3> class_max_confidence{};
};

struct SpdfReport {
    UniformizeReport uniformize;
    RejectionStats rejection;
    std::size_t input_points = 0;
    std::size_t after_uniformize = 0;
    std::size_t after_rejection = 0;
    std::size_t output_points = 0;
};

/// Stage 1: iteratively decimates points whose first-pass saliencies exceed
/// the expected values for a uniform density (any of surfaceness, curveness,
/// pointness above its threshold marks the point over-dense) until the
/// per-iteration removed fraction falls below cfg.convergence_fraction (or
/// max_iterations). The result is always a subset of the input;
/// non-convergence is reported, not thrown. Throws InsufficientPoints unless
/// cloud size > cfg.vote.k.
PointCloud uniformize(const PointCloud& cloud, const SpdfConfig& cfg,
                      UniformizeReport* report = nullptr);

/// Stage 2: labels every point from a ball-disabled second pass and discards
/// points whose confidence falls below outlier_threshold times the maximum
/// confidence of their primitive class.
LabeledCloud label_and_reject(const PointCloud& cloud, const SpdfConfig& cfg,
                              RejectionStats* stats = nullptr);

/// Stage 3: splits by label, allocates per-class budgets proportionally
/// (largest remainder, each non-empty class gets at least one), runs octree
/// centroid sampling per class with the cell capacity searched to land within
/// 2% of its budget, and recombines. Throws InvalidInput if target_points is
/// out of range [3, cloud size].
PointCloud primitive_spatial_sample(const LabeledCloud& cloud, std::size_t target_points);

/// Full pipeline: uniformize, label + reject, then the spatial stage when
/// cfg.target_points is set. Label/confidence/saliency channels are retained.
PointCloud spdf(const PointCloud& cloud, const SpdfConfig& cfg,
                SpdfReport* report = nullptr);

}  // namespace spdf

#endif  // SPDF_SPDF_FILTER_HPP
