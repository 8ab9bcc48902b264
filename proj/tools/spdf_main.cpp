// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: expected-saliency, synth, filter, icp, bench.

#include "spdf/bench.hpp"
#include "spdf/density_model.hpp"
#include "spdf/filters.hpp"
#include "spdf/io.hpp"
#include "spdf/registration.hpp"
#include "spdf/spdf_filter.hpp"
#include "spdf/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace spdf;

void print_expected_saliency(double rho, double sigma, const std::string& convention) {
    DensityParams params;
    params.rho = rho;
    params.sigma = sigma;
    params.xi1_convention = convention == "printed" ? Xi1Convention::Printed
                                                    : Xi1Convention::GeneralFormula;
    const ExpectedSaliencies e = expected_saliencies(params);
    std::printf("xi1,%.12g\nxi2,%.12g\nxi3,%.12g\n", e.xi1, e.xi2, e.xi3);
    std::printf("curve_threshold,%.12g\nsurface_threshold,%.12g\npoint_threshold,%.12g\n",
                e.curve_threshold, e.surface_threshold, e.point_threshold);
}

void write_spdf_report(const SpdfReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "record,iteration,points_before,marked,removed\n";
    for (std::size_t i = 0; i < report.uniformize.iterations.size(); ++i) {
        const auto& it = report.uniformize.iterations[i];
        out << "iteration," << i << ',' << it.points_before << ',' << it.marked << ','
            << it.removed << "\n";
    }
    out << "record,stage,primitive,threshold,bin_lo,bin_hi,count\n";
    auto dump = [&](const char* stage, const std::array<SaliencyHistogram, 3>& hs) {
        const char* names[3] = {"surface", "curve", "junction"};
        for (int c = 0; c < 3; ++c) {
            const SaliencyHistogram& h = hs[c];
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
                out << "histogram," << stage << ',' << names[c] << ',' << h.threshold
                    << ',' << h.bin_width * static_cast<double>(b) << ','
                    << h.bin_width * static_cast<double>(b + 1) << ',' << h.counts[b]
                    << "\n";
            }
        }
    };
    dump("initial", report.uniformize.initial_histograms);
    dump("final", report.uniformize.final_histograms);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point-cloud subsampling and registration toolkit"};
    app.require_subcommand(1);

    // expected-saliency
    double es_rho = 0.2, es_sigma = 0.2;
    std::string es_convention = "general";
    auto* es = app.add_subcommand("expected-saliency",
                                  "Print expected kernel strengths and thresholds");
    es->add_option("--rho", es_rho, "Uniformity radius (m)")->required();
    es->add_option("--sigma", es_sigma, "Vote scale (m^2)")->required();
    es->add_option("--xi1", es_convention, "xi1 convention: general|printed");

    // synth
    std::string sy_scene = "room", sy_out;
    std::size_t sy_n = 20000;
    double sy_noise = 0.0;
    std::uint64_t sy_seed = 0;
    std::vector<double> sy_transform;
    auto* sy = app.add_subcommand("synth", "Generate a synthetic scene");
    sy->add_option("--scene", sy_scene, "plane|room|pole_forest|density_gradient");
    sy->add_option("--n", sy_n, "Point count");
    sy->add_option("--noise", sy_noise, "Gaussian noise sigma (m)");
    sy->add_option("--seed", sy_seed, "Random seed");
    sy->add_option("--out", sy_out, "Output file (.csv or .ply)")->required();
    sy->add_option("--transform", sy_transform,
                   "Apply se(3) motion wx,wy,wz,tx,ty,tz before writing")
        ->expected(6);

    // filter
    auto* fi = app.add_subcommand("filter", "Subsample a point cloud");
    fi->require_subcommand(1);
    std::string fi_in, fi_out, fi_report;
    double fp_sigma = 0.2, fp_rho = 0.2, fp_t = 0.10;
    int fp_k = 50;
    std::int64_t fp_target = -1;
    auto* f_spdf = fi->add_subcommand("spdf", "Spectral decomposition filter");
    f_spdf->add_option("--sigma", fp_sigma, "Vote scale (m^2)");
    f_spdf->add_option("--rho", fp_rho, "Uniformity radius (m)");
    f_spdf->add_option("--t", fp_t, "Outlier rejection fraction");
    f_spdf->add_option("--k", fp_k, "Neighborhood size");
    f_spdf->add_option("--target-points", fp_target, "Spatial stage target (optional)");

    double f_param = 0.0;
    std::uint64_t f_seed = 0;
    auto add_io = [&](CLI::App* cmd) {
        cmd->add_option("--in", fi_in, "Input cloud")->required();
        cmd->add_option("--out", fi_out, "Output cloud")->required();
    };
    add_io(f_spdf);
    f_spdf->add_option("--report", fi_report, "Per-iteration report CSV");

    auto* f_random = fi->add_subcommand("random", "Keep each point with probability p");
    f_random->add_option("--p", f_param, "Keep probability")->required();
    f_random->add_option("--seed", f_seed, "Random seed");
    add_io(f_random);
    auto* f_voxel = fi->add_subcommand("voxel", "Voxel-grid centroids");
    f_voxel->add_option("--cell", f_param, "Cell size (m)")->required();
    add_io(f_voxel);
    auto* f_octree = fi->add_subcommand("octree", "Octree centroids");
    f_octree->add_option("--capacity", f_param, "Max points per cell")->required();
    add_io(f_octree);
    auto* f_maxd = fi->add_subcommand("max-density", "Cap local density");
    f_maxd->add_option("--density", f_param, "Max density (points/m^3)")->required();
    f_maxd->add_option("--seed", f_seed, "Random seed");
    add_io(f_maxd);
    auto* f_ssn = fi->add_subcommand("ssnormal", "Surface-normal bin centroids");
    f_ssn->add_option("--knn", f_param, "Neighbors to merge")->required();
    add_io(f_ssn);
    auto* f_nss = fi->add_subcommand("nss", "Normal-space sampling");
    f_nss->add_option("--target", f_param, "Points to keep")->required();
    f_nss->add_option("--seed", f_seed, "Random seed");
    add_io(f_nss);
    auto* f_covs = fi->add_subcommand("covs", "Covariance stability sampling");
    f_covs->add_option("--target", f_param, "Points to keep")->required();
    add_io(f_covs);

    // icp
    std::string icp_reading, icp_reference, icp_perturb;
    std::uint64_t icp_seed = 0;
    std::vector<double> icp_gt;
    IcpConfig icp_cfg;
    auto* ic = app.add_subcommand("icp", "Register a reading onto a reference");
    ic->add_option("--reading", icp_reading)->required();
    ic->add_option("--reference", icp_reference)->required();
    ic->add_option("--init-perturb", icp_perturb,
                   "Initial perturbation \"trans_m,rot_deg\" applied to ground truth");
    ic->add_option("--seed", icp_seed, "Perturbation seed");
    ic->add_option("--ground-truth", icp_gt,
                   "Row-major 3x4 ground truth (12 numbers, default identity)")
        ->expected(12);
    ic->add_option("--max-iterations", icp_cfg.max_iterations);
    ic->add_option("--trim", icp_cfg.trim_keep_ratio);

    // bench
    std::string be_config, be_out = "bench_out";
    int be_jobs = 0;
    auto* be = app.add_subcommand("bench", "Run a registration benchmark sweep");
    be->add_option("--config", be_config, "JSON config")->required();
    be->add_option("--out", be_out, "Output directory");
    be->add_option("--jobs", be_jobs, "Worker threads (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (es->parsed()) {
            print_expected_saliency(es_rho, es_sigma, es_convention);
            return 0;
        }
        if (sy->parsed()) {
            SynthScene scene = synth_scene(scene_from_name(sy_scene), sy_n, sy_noise, sy_seed);
            PointCloud cloud = scene.cloud;
            if (!sy_transform.empty()) {
                const Vec3 omega(sy_transform[0], sy_transform[1], sy_transform[2]);
                const Vec3 v(sy_transform[3], sy_transform[4], sy_transform[5]);
                cloud = transformed(se3_exp(omega, v), cloud);
            }
            save_cloud(cloud, sy_out);
            std::printf("%zu points -> %s\n", cloud.size(), sy_out.c_str());
            return 0;
        }
        if (fi->parsed()) {
            const PointCloud in = load_cloud(fi_in);
            PointCloud out;
            if (f_spdf->parsed()) {
                SpdfConfig cfg = SpdfConfig::with(fp_sigma, fp_rho, fp_k);
                cfg.outlier_threshold = fp_t;
                if (fp_target > 0) cfg.target_points = static_cast<std::size_t>(fp_target);
                SpdfReport report;
                out = spdf::spdf(in, cfg, &report);
                if (!fi_report.empty()) write_spdf_report(report, fi_report);
            } else if (f_random->parsed()) {
                out = random_sample(in, f_param, f_seed);
            } else if (f_voxel->parsed()) {
                out = voxel_sample(in, f_param);
            } else if (f_octree->parsed()) {
                out = octree_sample(in, static_cast<int>(f_param));
            } else if (f_maxd->parsed()) {
                out = max_density_sample(in, f_param, f_seed);
            } else if (f_ssn->parsed()) {
                out = sampling_surface_normal(in, static_cast<int>(f_param));
            } else if (f_nss->parsed()) {
                out = normal_space_sample(in, static_cast<std::size_t>(f_param), f_seed);
            } else if (f_covs->parsed()) {
                out = covariance_sample(in, static_cast<std::size_t>(f_param));
            }
            save_cloud(out, fi_out);
            std::printf("%zu -> %zu points\n", in.size(), out.size());
            return 0;
        }
        if (ic->parsed()) {
            const PointCloud reading = load_cloud(icp_reading);
            const PointCloud reference = load_cloud(icp_reference);
            RigidTransform t_gt;
            if (!icp_gt.empty()) {
                for (int r = 0; r < 3; ++r) {
                    for (int c = 0; c < 3; ++c) t_gt.rotation(r, c) = icp_gt[r * 4 + c];
                    t_gt.translation(r) = icp_gt[r * 4 + 3];
                }
                t_gt.validate();
            }
            RigidTransform t_init = t_gt;
            if (!icp_perturb.empty()) {
                PerturbationSpec spec;
                spec.seed = icp_seed;
                if (std::sscanf(icp_perturb.c_str(), "%lf,%lf",
                                &spec.translation_magnitude,
                                &spec.rotation_magnitude) != 2) {
                    throw InvalidInput("--init-perturb expects \"trans_m,rot_deg\"");
                }
                spec.rotation_magnitude *= M_PI / 180.0;
                t_init = perturb(t_gt, spec);
            }
            const IcpResult res = icp(reading, reference, t_init, icp_cfg);
            const RegistrationErrors err = registration_errors(res.transform, t_gt);
            std::printf("r00,r01,r02,tx,r10,r11,r12,ty,r20,r21,r22,tz,eps_t,eps_r_deg,"
                        "iterations,converged\n");
            const Mat3& r = res.transform.rotation;
            const Vec3& t = res.transform.translation;
            std::printf("%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                        "%.9g,%.9g,%d,%d\n",
                        r(0, 0), r(0, 1), r(0, 2), t(0), r(1, 0), r(1, 1), r(1, 2), t(1),
                        r(2, 0), r(2, 1), r(2, 2), t(2), err.translation,
                        err.rotation * 180.0 / M_PI, res.diagnostics.iterations,
                        res.diagnostics.converged ? 1 : 0);
            return 0;
        }
        if (be->parsed()) {
            BenchConfig cfg = load_bench_config(be_config);
            if (be_jobs > 0) cfg.jobs = be_jobs;
            const BenchResult result = run_benchmark(cfg);
            write_bench_outputs(result, be_out);
            std::size_t failed = 0;
            for (const BenchRow& row : result.rows) failed += row.failed ? 1 : 0;
            std::printf("%zu rows (%zu failed) -> %s\n", result.rows.size(), failed,
                        be_out.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
