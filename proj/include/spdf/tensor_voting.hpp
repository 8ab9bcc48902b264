// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_TENSOR_VOTING_HPP
#define SPDF_TENSOR_VOTING_HPP

#include "spdf/kdtree.hpp"
#include "spdf/sym3.hpp"
#include "spdf/types.hpp"

#include <vector>

namespace spdf {

/// Parameters of the closed-form k-NN voting passes.
struct VoteConfig {
    double sigma = 0.2;  // kernel scale, m^2: vote strength exp(-d^2 / sigma)
    int k = 50;          // neighborhood size

    /// Pipeline-level validation: sigma > 0 and k >= 4 (fewer neighbors cannot
    /// distinguish the three primitive classes). The voting passes themselves
    /// only require k >= 1.
    void validate() const;
};

/// Per-point saliencies and preferred directions from a voting pass.
///
/// surfaceness = l1-l2, curveness = l2-l3, pointness = l3, all normalized by
/// the configured k. Directions are the ordered eigenvector columns; labels
/// are the argmax interpretation with ties broken Surface > Curve > Junction.
struct SaliencyField {
    std::vector<Vec3> saliencies;  // (surfaceness, curveness, pointness)
    std::vector<Mat3> directions;  // columns e1, e2, e3
    std::vector<PrimitiveLabel> labels;

    std::size_t size() const { return saliencies.size(); }
};

struct Interpretation {
    double surfaceness;
    double curveness;
    double pointness;
    PrimitiveLabel label;
};

/// Voting-pass side information.
struct VoteDiagnostics {
    std::size_t duplicate_votes_skipped = 0;
    // Number of usable voters found for each point (self and exact duplicates
    // excluded); less than k only when the cloud cannot supply k voters.
    std::vector<int> valid_neighbor_counts;
};

/// Single closed-form vote cast from x_j (carrying tensor K_j) to x_i:
///   S_ij = c R K_j (I - r r^T / 2) R,   R = I - 2 r r^T,
///   r = (x_i - x_j)/|x_i - x_j|,        c = exp(-|x_i - x_j|^2 / sigma).
/// The symmetric part is returned (exact for unit-ball and aligned voters).
/// Throws DegeneratePair for coincident points.
SymTensor3 cftv_vote(const Vec3& x_i, const Vec3& x_j, const SymTensor3& k_j,
                     double sigma);

/// First voting pass: every voter encoded as a unit ball. Returns one
/// accumulated tensor per point, normalized by cfg.k; all eigenvalues lie in
/// [0, 1]. Self-votes are excluded; exact duplicates are skipped and counted.
/// Throws InsufficientPoints unless cloud size > cfg.k.
std::vector<SymTensor3> first_pass(const PointCloud& cloud, const VoteConfig& cfg,
                                   VoteDiagnostics* diagnostics = nullptr);
std::vector<SymTensor3> first_pass(const PointCloud& cloud, const SpatialIndex& index,
                                   const VoteConfig& cfg,
                                   VoteDiagnostics* diagnostics = nullptr);

/// Second voting pass: voters are re-encoded from the first-pass tensors with
/// the ball component removed, K_j = (l1-l2) S_j + (l2-l3) P_j, then votes are
/// accumulated and interpreted. Throws InvalidInput on a length mismatch.
SaliencyField second_pass(const PointCloud& cloud,
                          const std::vector<SymTensor3>& first_pass_tensors,
                          const VoteConfig& cfg,
                          VoteDiagnostics* diagnostics = nullptr);
SaliencyField second_pass(const PointCloud& cloud, const SpatialIndex& index,
                          const std::vector<SymTensor3>& first_pass_tensors,
                          const VoteConfig& cfg,
                          VoteDiagnostics* diagnostics = nullptr);

/// Saliencies and dominant primitive of a decomposed tensor.
Interpretation interpret(const SpectralDecomp& d);

}  // namespace spdf

#endif  // SPDF_TENSOR_VOTING_HPP
