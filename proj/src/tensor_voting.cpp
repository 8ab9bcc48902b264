// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/tensor_voting.hpp"

#include "spdf/parallel.hpp"

#include <atomic>
#include <cmath>

namespace spdf {

void VoteConfig::validate() const {
    if (!(sigma > 0.0)) throw InvalidInput("VoteConfig: sigma must be > 0");
    if (k < 4) throw InvalidInput("VoteConfig: k must be >= 4");
}

SymTensor3 cftv_vote(const Vec3& x_i, const Vec3& x_j, const SymTensor3& k_j,
                     double sigma) {
    const Vec3 diff = x_i - x_j;
    const double d2 = diff.squaredNorm();
    if (d2 == 0.0) throw DegeneratePair("cftv_vote: coincident voter and receiver");

    const Vec3 r = diff / std::sqrt(d2);
    const double c = std::exp(-d2 / sigma);

    const Mat3 rrt = r * r.transpose();
    const Mat3 reflect = Mat3::Identity() - 2.0 * rrt;
    const Mat3 vote = c * reflect * k_j.to_matrix() *
                      (Mat3::Identity() - 0.5 * rrt) * reflect;
    return SymTensor3::from_matrix(vote);
}

namespace {

// Unit-ball voter: the vote collapses to c (I - r r^T / 2), cheaper and exact.
inline void accumulate_ball_vote(const Vec3& x_i, const Vec3& x_j, double sigma,
                                 SymTensor3& acc) {
    const Vec3 diff = x_i - x_j;
    const double d2 = diff.squaredNorm();
    const double c = std::exp(-d2 / sigma);
    const Vec3 r = diff / std::sqrt(d2);
    acc.xx += c * (1.0 - 0.5 * r.x() * r.x());
    acc.yy += c * (1.0 - 0.5 * r.y() * r.y());
    acc.zz += c * (1.0 - 0.5 * r.z() * r.z());
    acc.xy += c * (-0.5 * r.x() * r.y());
    acc.xz += c * (-0.5 * r.x() * r.z());
    acc.yz += c * (-0.5 * r.y() * r.z());
}

// Voting neighbors of point i: the k nearest, excluding i itself and any
// exact duplicate (which is counted). Grows the fetch window until k valid
// voters are found or the cloud is exhausted.
void voting_neighbors(const SpatialIndex& index, const std::vector<Vec3>& pts, int i,
                      int k, std::vector<SpatialIndex::Neighbor>& scratch,
                      std::vector<int>& voters, std::size_t& duplicates) {
    const int n = static_cast<int>(pts.size());
    voters.clear();
    int fetch = std::min(n, k + 1);
    while (true) {
        index.knn(pts[i], fetch, scratch);
        voters.clear();
        std::size_t dup = 0;
        for (const auto& nb : scratch) {
            if (nb.index == i) continue;
            if (nb.distance == 0.0) {
                ++dup;
                continue;
            }
            voters.push_back(nb.index);
            if (static_cast<int>(voters.size()) == k) break;
        }
        if (static_cast<int>(voters.size()) == k || fetch == n) {
            duplicates += dup;
            return;
        }
        fetch = std::min(n, 2 * fetch);
    }
}

}  // namespace

std::vector<SymTensor3> first_pass(const PointCloud& cloud, const VoteConfig& cfg,
                                   VoteDiagnostics* diagnostics) {
    const SpatialIndex index(cloud);
    return first_pass(cloud, index, cfg, diagnostics);
}

std::vector<SymTensor3> first_pass(const PointCloud& cloud, const SpatialIndex& index,
                                   const VoteConfig& cfg, VoteDiagnostics* diagnostics) {
    if (!(cfg.sigma > 0.0)) throw InvalidInput("first_pass: sigma must be > 0");
    if (cfg.k < 1) throw InvalidInput("first_pass: k must be >= 1");
    const std::size_t n = cloud.size();
    if (n <= static_cast<std::size_t>(cfg.k)) {
        throw InsufficientPoints("first_pass: cloud must have more than k points");
    }

    std::vector<SymTensor3> tensors(n);
    if (diagnostics) diagnostics->valid_neighbor_counts.assign(n, 0);
    std::atomic<std::size_t> duplicates{0};
    const double inv_k = 1.0 / static_cast<double>(cfg.k);
    const auto& pts = index.points();

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<SpatialIndex::Neighbor> scratch;
        std::vector<int> voters;
        std::size_t local_dup = 0;
        for (std::size_t i = begin; i < end; ++i) {
            voting_neighbors(index, pts, static_cast<int>(i), cfg.k, scratch, voters,
                             local_dup);
            SymTensor3 acc;
            for (int j : voters) accumulate_ball_vote(pts[i], pts[j], cfg.sigma, acc);
            tensors[i] = acc * inv_k;
            if (diagnostics) {
                diagnostics->valid_neighbor_counts[i] = static_cast<int>(voters.size());
            }
        }
        duplicates += local_dup;
    });

    if (diagnostics) diagnostics->duplicate_votes_skipped = duplicates.load();
    return tensors;
}

SaliencyField second_pass(const PointCloud& cloud,
                          const std::vector<SymTensor3>& first_pass_tensors,
                          const VoteConfig& cfg, VoteDiagnostics* diagnostics) {
    const SpatialIndex index(cloud);
    return second_pass(cloud, index, first_pass_tensors, cfg, diagnostics);
}

SaliencyField second_pass(const PointCloud& cloud, const SpatialIndex& index,
                          const std::vector<SymTensor3>& first_pass_tensors,
                          const VoteConfig& cfg, VoteDiagnostics* diagnostics) {
    const std::size_t n = cloud.size();
    if (first_pass_tensors.size() != n) {
        throw InvalidInput("second_pass: tensor list length does not match cloud size");
    }
    if (!(cfg.sigma > 0.0)) throw InvalidInput("second_pass: sigma must be > 0");
    if (cfg.k < 1) throw InvalidInput("second_pass: k must be >= 1");
    if (n <= static_cast<std::size_t>(cfg.k)) {
        throw InsufficientPoints("second_pass: cloud must have more than k points");
    }

    // Re-encode every voter with the ball component removed:
    // K_j = (l1-l2) e1 e1^T + (l2-l3) (e1 e1^T + e2 e2^T).
    std::vector<SymTensor3> voters_encoded(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const SpectralDecomp d = eigendecompose_sym3(first_pass_tensors[i]);
            const double stick = d.eigenvalues(0) - d.eigenvalues(1);
            const double plate = d.eigenvalues(1) - d.eigenvalues(2);
            SymTensor3 enc = SymTensor3::outer(d.e1()) * (stick + plate);
            enc += SymTensor3::outer(d.e2()) * plate;
            voters_encoded[i] = enc;
        }
    });

    SaliencyField field;
    field.saliencies.resize(n);
    field.directions.resize(n);
    field.labels.resize(n);
    std::atomic<std::size_t> duplicates{0};
    if (diagnostics) diagnostics->valid_neighbor_counts.assign(n, 0);
    const double inv_k = 1.0 / static_cast<double>(cfg.k);
    const auto& pts = index.points();

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<SpatialIndex::Neighbor> scratch;
        std::vector<int> voters;
        std::size_t local_dup = 0;
        for (std::size_t i = begin; i < end; ++i) {
            voting_neighbors(index, pts, static_cast<int>(i), cfg.k, scratch, voters,
                             local_dup);
            SymTensor3 acc;
            for (int j : voters) {
                acc += cftv_vote(pts[i], pts[j], voters_encoded[j], cfg.sigma);
            }
            const SpectralDecomp d = eigendecompose_sym3(acc * inv_k);
            const Interpretation in = interpret(d);
            field.saliencies[i] = {in.surfaceness, in.curveness, in.pointness};
            field.directions[i] = d.eigenvectors;
            field.labels[i] = in.label;
            if (diagnostics) {
                diagnostics->valid_neighbor_counts[i] = static_cast<int>(voters.size());
            }
        }
        duplicates += local_dup;
    });

    if (diagnostics) diagnostics->duplicate_votes_skipped = duplicates.load();
    return field;
}

Interpretation interpret(const SpectralDecomp& d) {
    Interpretation out;
    out.surfaceness = d.eigenvalues(0) - d.eigenvalues(1);
    out.curveness = d.eigenvalues(1) - d.eigenvalues(2);
    out.pointness = d.eigenvalues(2);
    if (out.surfaceness >= out.curveness && out.surfaceness >= out.pointness) {
        out.label = PrimitiveLabel::Surface;
    } else if (out.curveness >= out.pointness) {
        out.label = PrimitiveLabel::Curve;
    } else {
        out.label = PrimitiveLabel::Junction;
    }
    return out;
}

}  // namespace spdf
