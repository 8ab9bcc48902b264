// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/spdf_filter.hpp"

#include "spdf/filters.hpp"
#include "spdf/kdtree.hpp"
#include "spdf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spdf {

SpdfConfig SpdfConfig::with(double sigma, double rho, int k) {
    SpdfConfig cfg;
    cfg.vote.sigma = sigma;
    cfg.vote.k = k;
    cfg.density.sigma = sigma;
    cfg.density.rho = rho;
    return cfg;
}

void SpdfConfig::validate() const {
    vote.validate();
    density.validate();
    if (vote.sigma != density.sigma) {
        throw InvalidInput("SpdfConfig: vote.sigma and density.sigma must agree");
    }
    // t = 0 is the degenerate keep-everything threshold.
    if (!(outlier_threshold >= 0.0) || !(outlier_threshold < 1.0)) {
        throw InvalidInput("SpdfConfig: outlier threshold must be in [0, 1)");
    }
    if (max_iterations < 1) throw InvalidInput("SpdfConfig: max_iterations must be >= 1");
    if (!(convergence_fraction > 0.0) || !(convergence_fraction < 0.5)) {
        throw InvalidInput("SpdfConfig: convergence fraction must be in (0, 0.5)");
    }
    if (!(decimation_aggressiveness > 0.0) || decimation_aggressiveness > 1.0) {
        throw InvalidInput("SpdfConfig: decimation aggressiveness must be in (0, 1]");
    }
}

namespace {

struct PointState {
    Vec3 saliencies = Vec3::Zero();  // (surfaceness, curveness, pointness)
    // Worst violation of the Table-II expectations; a point is over-dense
    // when this is positive. Two families of checks feed it: every saliency
    // against its own expected value, and the leading eigenvalue against the
    // expected leading eigenvalue of the nearest ideal shape. The latter is
    // the sharp density signal: sampling anisotropy splits lambda2/lambda3
    // and biases the saliencies low, but lambda1 is a clean kernel-mass
    // reading (an over-dense surface has lambda1 = xi(r_k) > xi(rho) no
    // matter how the in-plane split falls).
    double excess = 0.0;
};

std::vector<PointState> measure(const PointCloud& cloud, const SpatialIndex& index,
                                const SpdfConfig& cfg, const ExpectedSaliencies& expected,
                                VoteDiagnostics* diag) {
    const std::vector<SymTensor3> tensors = first_pass(cloud, index, cfg.vote, diag);
    const Vec3 thresholds(expected.surface_threshold, expected.curve_threshold,
                          expected.point_threshold);
    // Normalized eigenvalue shapes (lambda2/lambda1, lambda3/lambda1) of the
    // ideal configurations, with the expected lambda1 of each.
    const Eigen::Vector2d shape_surface(0.75, 0.75), shape_curve(1.0, 0.5),
        shape_junction(1.0, 1.0);
    const Vec3 expected_l1(expected.surface_eigenvalues[0], expected.curve_eigenvalues[0],
                           expected.junction_eigenvalues[0]);

    std::vector<PointState> states(cloud.size());
    parallel_for(cloud.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const SpectralDecomp d = eigendecompose_sym3(tensors[i]);
            const Interpretation in = interpret(d);
            PointState& s = states[i];
            s.saliencies = Vec3(in.surfaceness, in.curveness, in.pointness);
            s.excess = (s.saliencies - thresholds).maxCoeff();

            const double l1 = d.eigenvalues(0);
            if (l1 > 1e-12) {
                const Eigen::Vector2d shape(d.eigenvalues(1) / l1, d.eigenvalues(2) / l1);
                int cls = 0;
                double best = (shape - shape_surface).squaredNorm();
                if (const double dc = (shape - shape_curve).squaredNorm(); dc < best) {
                    best = dc;
                    cls = 1;
                }
                if ((shape - shape_junction).squaredNorm() < best) cls = 2;
                s.excess = std::max(s.excess, l1 - expected_l1(cls));
            }
        }
    });
    return states;
}

void fill_histograms(const std::vector<PointState>& states,
                     const ExpectedSaliencies& expected,
                     std::array<SaliencyHistogram, 3>& out) {
    const Vec3 thresholds(expected.surface_threshold, expected.curve_threshold,
                          expected.point_threshold);
    for (int c = 0; c < 3; ++c) {
        SaliencyHistogram& h = out[c];
        h.threshold = thresholds(c);
        h.counts.assign(24, 0);
        h.bin_width = 1.0 / static_cast<double>(h.counts.size());
        for (const PointState& s : states) {
            const double v = std::clamp(s.saliencies(c), 0.0, 1.0 - 1e-15);
            h.counts[static_cast<std::size_t>(v / h.bin_width)] += 1;
        }
    }
}

}  // namespace

PointCloud uniformize(const PointCloud& cloud, const SpdfConfig& cfg,
                      UniformizeReport* report) {
    cfg.validate();
    if (cloud.size() <= static_cast<std::size_t>(cfg.vote.k)) {
        throw InsufficientPoints("uniformize: cloud must have more than k points");
    }
    const ExpectedSaliencies expected = expected_saliencies(cfg.density);

    PointCloud current = cloud;
    if (report) *report = {};

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (current.size() <= static_cast<std::size_t>(cfg.vote.k) + 1) break;

        const SpatialIndex index(current);
        VoteDiagnostics diag;
        const std::vector<PointState> states = measure(current, index, cfg, expected, &diag);
        if (report) {
            report->duplicate_votes_skipped += diag.duplicate_votes_skipped;
            if (iter == 0) fill_histograms(states, expected, report->initial_histograms);
        }

        // Over-dense candidates; boundary points (short of k usable voters)
        // are never marked.
        std::vector<int> marked;
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (diag.valid_neighbor_counts[i] < cfg.vote.k) continue;
            if (states[i].excess > 0.0) marked.push_back(static_cast<int>(i));
        }
        std::sort(marked.begin(), marked.end(), [&](int a, int b) {
            if (states[a].excess != states[b].excess) {
                return states[a].excess > states[b].excess;
            }
            return a < b;
        });

        // Greedy removal by excess, capped at the aggressiveness quota and
        // never taking both sides of a mutual nearest-neighbor pair in the
        // same iteration.
        const std::size_t quota = static_cast<std::size_t>(
            std::ceil(cfg.decimation_aggressiveness * static_cast<double>(marked.size())));
        std::vector<int> nn1(current.size(), -1);
        if (!marked.empty()) {
            parallel_for(current.size(), [&](std::size_t begin, std::size_t end) {
                std::vector<SpatialIndex::Neighbor> nn;
                for (std::size_t i = begin; i < end; ++i) {
                    index.knn(current.points[i], 2, nn);
                    for (const auto& nb : nn) {
                        if (nb.index != static_cast<int>(i)) {
                            nn1[i] = nb.index;
                            break;
                        }
                    }
                }
            }, 4096);
        }

        std::vector<char> removed_flag(current.size(), 0);
        std::size_t removed = 0;
        for (int cand : marked) {
            if (removed >= quota) break;
            const int partner = nn1[cand];
            if (partner >= 0 && nn1[partner] == cand && removed_flag[partner]) continue;
            removed_flag[cand] = 1;
            ++removed;
        }

        if (report) {
            report->iterations.push_back({current.size(), marked.size(), removed});
        }

        const double removed_fraction =
            static_cast<double>(removed) / static_cast<double>(current.size());

        if (removed > 0) {
            std::vector<int> keep;
            keep.reserve(current.size() - removed);
            for (std::size_t i = 0; i < current.size(); ++i) {
                if (!removed_flag[i]) keep.push_back(static_cast<int>(i));
            }
            current = current.select(keep);
        }

        if (removed_fraction < cfg.convergence_fraction) {
            if (report) report->converged = true;
            break;
        }
    }

    if (report && current.size() > static_cast<std::size_t>(cfg.vote.k)) {
        const SpatialIndex index(current);
        const std::vector<PointState> states = measure(current, index, cfg, expected, nullptr);
        fill_histograms(states, expected, report->final_histograms);
    }
    return current;
}

LabeledCloud label_and_reject(const PointCloud& cloud, const SpdfConfig& cfg,
                              RejectionStats* stats) {
    cfg.validate();
    if (cloud.size() <= static_cast<std::size_t>(cfg.vote.k)) {
        throw InsufficientPoints("label_and_reject: cloud must have more than k points");
    }

    const SpatialIndex index(cloud);
    const std::vector<SymTensor3> tensors = first_pass(cloud, index, cfg.vote);
    const SaliencyField field = second_pass(cloud, index, tensors, cfg.vote);

    RejectionStats local;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto cls = static_cast<std::size_t>(field.labels[i]);
        const double conf = field.saliencies[i](static_cast<int>(cls));
        local.class_counts[cls] += 1;
        local.class_max_confidence[cls] = std::max(local.class_max_confidence[cls], conf);
    }

    // A class whose own maximum is negligible next to the strongest class is
    // populated by stray points only (nothing real anchors it); such points
    // are held against the global maximum instead of self-validating.
    const double global_max =
        std::max({local.class_max_confidence[0], local.class_max_confidence[1],
                  local.class_max_confidence[2]});
    std::array<double, 3> effective_max{};
    for (std::size_t c = 0; c < 3; ++c) {
        effective_max[c] =
            local.class_max_confidence[c] >= cfg.outlier_threshold * global_max
                ? local.class_max_confidence[c]
                : global_max;
    }

    std::vector<int> keep;
    keep.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto cls = static_cast<std::size_t>(field.labels[i]);
        const double conf = field.saliencies[i](static_cast<int>(cls));
        if (conf >= cfg.outlier_threshold * effective_max[cls]) {
            keep.push_back(static_cast<int>(i));
        } else {
            local.class_rejected[cls] += 1;
        }
    }

    LabeledCloud out;
    out.cloud = cloud.select(keep);
    out.cloud.labels.clear();
    out.cloud.confidences.clear();
    out.cloud.saliencies.clear();
    out.directions.reserve(keep.size());
    for (int i : keep) {
        const auto cls = static_cast<int>(field.labels[i]);
        out.cloud.labels.push_back(field.labels[i]);
        out.cloud.confidences.push_back(field.saliencies[i](cls));
        out.cloud.saliencies.push_back(field.saliencies[i]);
        out.directions.push_back(field.directions[i]);
    }
    if (stats) *stats = local;
    return out;
}

namespace {

// Largest-remainder budgets proportional to class sizes; every non-empty
// class receives at least one point.
std::array<std::size_t, 3> class_budgets(const std::array<std::size_t, 3>& counts,
                                         std::size_t target) {
    const double total = static_cast<double>(counts[0] + counts[1] + counts[2]);
    std::array<std::size_t, 3> budget{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        if (counts[c] == 0) continue;
        const double exact = static_cast<double>(target) * counts[c] / total;
        budget[c] = std::max<std::size_t>(1, static_cast<std::size_t>(exact));
        budget[c] = std::min(budget[c], counts[c]);
        remainder[c] = exact - static_cast<double>(budget[c]);
        assigned += budget[c];
    }
    while (assigned < target) {
        int best = -1;
        for (int c = 0; c < 3; ++c) {
            if (counts[c] == 0 || budget[c] >= counts[c]) continue;
            if (best < 0 || remainder[c] > remainder[best]) best = c;
        }
        if (best < 0) break;
        budget[best] += 1;
        remainder[best] -= 1.0;
        ++assigned;
    }
    while (assigned > target) {
        int best = -1;
        for (int c = 0; c < 3; ++c) {
            if (budget[c] <= 1) continue;
            if (best < 0 || remainder[c] < remainder[best]) best = c;
        }
        if (best < 0) break;
        budget[best] -= 1;
        remainder[best] += 1.0;
        --assigned;
    }
    return budget;
}

// Octree capacity whose leaf count lands within 2% of the budget; when no
// integer capacity does, the closest over-budget capacity is used and the
// thinnest leaves are dropped to hit the budget exactly.
PointCloud octree_to_budget(const PointCloud& cls, std::size_t budget) {
    if (budget >= cls.size()) return octree_sample(cls, 1);

    std::size_t lo = 1, hi = cls.size();  // count(lo) = n >= budget
    auto count_for = [&](std::size_t cap) {
        return octree_sample(cls, static_cast<int>(cap)).size();
    };
    // Smallest capacity with count <= budget.
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (count_for(mid) > budget) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    const std::size_t at = count_for(lo);
    const double tol = 0.02 * static_cast<double>(budget);
    if (static_cast<double>(budget) - static_cast<double>(at) <= tol) {
        return octree_sample(cls, static_cast<int>(lo));
    }
    const std::size_t cap_over = lo - 1;  // count(cap_over) > budget
    std::vector<std::size_t> leaf_sizes;
    PointCloud sampled = octree_sample(cls, static_cast<int>(cap_over), &leaf_sizes);
    if (static_cast<double>(sampled.size()) - static_cast<double>(budget) <= tol) {
        return sampled;
    }
    // No integer capacity lands inside the tolerance band; trim the overshoot
    // by dropping the centroids of the least-populated cells.
    std::vector<std::pair<std::size_t, int>> occupancy(sampled.size());
    for (std::size_t i = 0; i < sampled.size(); ++i) {
        occupancy[i] = {leaf_sizes[i], static_cast<int>(i)};
    }
    std::sort(occupancy.begin(), occupancy.end());
    std::vector<int> keep;
    for (std::size_t i = sampled.size() - budget; i < sampled.size(); ++i) {
        keep.push_back(occupancy[i].second);
    }
    std::sort(keep.begin(), keep.end());
    return sampled.select(keep);
}

}  // namespace

PointCloud primitive_spatial_sample(const LabeledCloud& labeled, std::size_t target_points) {
    const PointCloud& cloud = labeled.cloud;
    if (!cloud.has_labels()) {
        throw InvalidInput("primitive_spatial_sample: cloud has no labels");
    }
    if (target_points < 3 || target_points > cloud.size()) {
        throw InvalidInput("primitive_spatial_sample: target must be in [3, cloud size]");
    }

    std::array<std::vector<int>, 3> by_class;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        by_class[static_cast<std::size_t>(cloud.labels[i])].push_back(static_cast<int>(i));
    }
    const std::array<std::size_t, 3> counts = {by_class[0].size(), by_class[1].size(),
                                               by_class[2].size()};
    const std::array<std::size_t, 3> budgets = class_budgets(counts, target_points);

    PointCloud out;
    for (std::size_t c = 0; c < 3; ++c) {
        if (counts[c] == 0 || budgets[c] == 0) continue;
        const PointCloud cls = cloud.select(by_class[c]);
        PointCloud sampled = octree_to_budget(cls, budgets[c]);
        // Centroids carry their class label; confidence is not meaningful for
        // synthesized points and is set to the class mean.
        double mean_conf = 0.0;
        if (cls.has_confidences()) {
            for (double v : cls.confidences) mean_conf += v;
            mean_conf /= static_cast<double>(cls.size());
        }
        sampled.labels.assign(sampled.size(), static_cast<PrimitiveLabel>(c));
        sampled.confidences.assign(sampled.size(), mean_conf);
        out.append(sampled);
    }
    return out;
}

PointCloud spdf(const PointCloud& cloud, const SpdfConfig& cfg, SpdfReport* report) {
    cfg.validate();
    if (report) {
        *report = {};
        report->input_points = cloud.size();
    }

    PointCloud uniform = uniformize(cloud, cfg, report ? &report->uniformize : nullptr);
    if (report) report->after_uniformize = uniform.size();

    LabeledCloud labeled =
        label_and_reject(uniform, cfg, report ? &report->rejection : nullptr);
    if (report) report->after_rejection = labeled.cloud.size();

    PointCloud out;
    if (cfg.target_points && *cfg.target_points < labeled.cloud.size()) {
        out = primitive_spatial_sample(labeled, *cfg.target_points);
    } else {
        out = std::move(labeled.cloud);
    }
    if (report) report->output_points = out.size();
    return out;
}

}  // namespace spdf
