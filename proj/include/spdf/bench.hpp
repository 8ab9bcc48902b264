// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_BENCH_HPP
#define SPDF_BENCH_HPP

#include "spdf/registration.hpp"
#include "spdf/spdf_filter.hpp"
#include "spdf/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spdf {

/// One scan pair: file paths plus the ground-truth transform that maps the
/// reading frame onto the reference frame.
struct ScanPair {
    std::string name;
    std::string reading_path;
    std::string reference_path;
    RigidTransform ground_truth;
};

/// One method sweep. Baseline methods take their Table-style scalar parameter;
/// "spdf" sweeps the uniformity radius rho and "spatial_spdf" the target point
/// count, both using the sigma/k/t settings below.
struct MethodSweep {
    std::string method;
    std::vector<double> parameters;
    std::uint64_t seed = 0;
    double sigma = 0.2;
    double rho = 0.2;
    int k = 50;
    double outlier_threshold = 0.10;
};

struct BenchConfig {
    std::vector<ScanPair> pairs;
    std::vector<MethodSweep> methods;
    int trials_per_setting = 100;
    PerturbationSpec perturbation;
    IcpConfig icp;
    std::uint64_t master_seed = 0;
    int jobs = 0;  // worker threads; 0 = hardware concurrency

    void validate() const;
};

/// Parses the documented JSON schema (see README). Throws on schema errors.
BenchConfig load_bench_config(const std::string& path);

/// One registration trial. Timing lives in the per-setting record, not here,
/// so the raw table is bit-reproducible.
struct BenchRow {
    std::string pair;
    std::string method;
    double parameter = 0.0;
    std::size_t achieved_points = 0;  // min of filtered reading/reference sizes
    int trial = 0;
    std::uint64_t seed = 0;
    double eps_t = 0.0;
    double eps_r = 0.0;  // rad
    int iterations = 0;
    bool converged = false;
    bool failed = false;
};

/// Wall-clock timings per (pair, method, parameter) setting.
struct BenchTiming {
    std::string pair;
    std::string method;
    double parameter = 0.0;
    double filter_ms = 0.0;      // filtering both clouds, measured once
    double icp_total_ms = 0.0;   // summed over trials
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::vector<BenchTiming> timings;
    // Saliency histograms captured from spdf-family settings, keyed by
    // "(pair)/(method)/(parameter)".
    std::map<std::string, UniformizeReport> spdf_reports;
};

/// Runs every (pair, method, parameter, trial) combination. Filtering happens
/// once per setting; trials draw independent perturbations from seeds derived
/// with a counter-based splitter, so the result is a pure function of
/// (config, master_seed) regardless of the worker count. Per-trial failures
/// are recorded (failed = true) and the run continues.
BenchResult run_benchmark(const BenchConfig& cfg);

/// Writes raw.csv, summary.csv, timings.csv and histograms.csv. raw.csv is
/// byte-identical across reruns with the same config and master seed.
void write_bench_outputs(const BenchResult& result, const std::string& out_dir);

/// Median helper used for the summaries (NaN-free input).
double median(std::vector<double> values);

}  // namespace spdf

#endif  // SPDF_BENCH_HPP
