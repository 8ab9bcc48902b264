// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#include "spdf/bench.hpp"

#include "spdf/filters.hpp"
#include "spdf/io.hpp"
#include "spdf/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace spdf {

using nlohmann::json;

void BenchConfig::validate() const {
    if (pairs.empty()) throw InvalidInput("BenchConfig: at least one scan pair required");
    if (methods.empty()) throw InvalidInput("BenchConfig: at least one method required");
    if (trials_per_setting < 1) throw InvalidInput("BenchConfig: trials must be >= 1");
    for (const MethodSweep& m : methods) {
        if (m.parameters.empty()) {
            throw InvalidInput("BenchConfig: method '" + m.method + "' has no parameters");
        }
    }
    icp.validate();
}

namespace {

RigidTransform transform_from_json(const json& j) {
    RigidTransform t;
    if (j.is_null()) return t;
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if ((rows.size() != 3 && rows.size() != 4) || rows[0].size() != 4) {
        throw InvalidInput("ground_truth must be a 3x4 or 4x4 row-major matrix");
    }
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) t.rotation(r, c) = rows[r][c];
        t.translation(r) = rows[r][3];
    }
    t.validate();
    return t;
}

bool is_spdf_method(const std::string& name) {
    return name == "spdf" || name == "spatial_spdf";
}

struct FilteredPair {
    PointCloud reading;
    PointCloud reference;
    double filter_ms = 0.0;
    UniformizeReport report;
    bool has_report = false;
};

PointCloud run_method(const PointCloud& cloud, const MethodSweep& sweep, double parameter,
                      std::uint64_t seed, UniformizeReport* report) {
    if (sweep.method == "spdf") {
        SpdfConfig cfg = SpdfConfig::with(sweep.sigma, parameter, sweep.k);
        cfg.outlier_threshold = sweep.outlier_threshold;
        SpdfReport full;
        PointCloud out = spdf(cloud, cfg, &full);
        if (report) *report = full.uniformize;
        return out;
    }
    if (sweep.method == "spatial_spdf") {
        SpdfConfig cfg = SpdfConfig::with(sweep.sigma, sweep.rho, sweep.k);
        cfg.outlier_threshold = sweep.outlier_threshold;
        cfg.target_points = static_cast<std::size_t>(std::lround(parameter));
        SpdfReport full;
        PointCloud out = spdf(cloud, cfg, &full);
        if (report) *report = full.uniformize;
        return out;
    }
    FilterSpec spec;
    spec.method = filter_method_from_name(sweep.method);
    spec.parameter = parameter;
    spec.seed = seed;
    // NSS / CovS parameters are point targets; saturate at the cloud size.
    if (spec.method == FilterMethod::NSS || spec.method == FilterMethod::CovS) {
        spec.parameter = std::min(parameter, static_cast<double>(cloud.size()));
    }
    return apply_filter(cloud, spec);
}

std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

BenchConfig load_bench_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config " + path);
    json j;
    in >> j;

    BenchConfig cfg;
    cfg.master_seed = j.value("master_seed", 0ULL);
    cfg.trials_per_setting = j.value("trials_per_setting", 100);
    cfg.jobs = j.value("jobs", 0);

    if (j.contains("perturbation")) {
        const json& p = j["perturbation"];
        cfg.perturbation.translation_magnitude = p.value("translation", 0.5);
        cfg.perturbation.rotation_magnitude =
            p.value("rotation_deg", 20.0) * M_PI / 180.0;
        cfg.perturbation.per_axis = p.value("per_axis", false);
    }
    if (j.contains("icp")) {
        const json& i = j["icp"];
        cfg.icp.max_iterations = i.value("max_iterations", cfg.icp.max_iterations);
        cfg.icp.trim_keep_ratio = i.value("trim_keep_ratio", cfg.icp.trim_keep_ratio);
        cfg.icp.translation_epsilon =
            i.value("translation_epsilon", cfg.icp.translation_epsilon);
        cfg.icp.rotation_epsilon = i.value("rotation_epsilon", cfg.icp.rotation_epsilon);
        cfg.icp.matches_per_point = i.value("matches_per_point", cfg.icp.matches_per_point);
        cfg.icp.normal_k = i.value("normal_k", cfg.icp.normal_k);
    }
    for (const json& p : j.at("pairs")) {
        ScanPair pair;
        pair.name = p.value("name", "pair" + std::to_string(cfg.pairs.size()));
        pair.reading_path = p.at("reading").get<std::string>();
        pair.reference_path = p.at("reference").get<std::string>();
        pair.ground_truth = transform_from_json(p.value("ground_truth", json()));
        cfg.pairs.push_back(std::move(pair));
    }
    for (const json& m : j.at("methods")) {
        MethodSweep sweep;
        sweep.method = m.at("method").get<std::string>();
        sweep.parameters = m.at("parameters").get<std::vector<double>>();
        sweep.seed = m.value("seed", 0ULL);
        sweep.sigma = m.value("sigma", 0.2);
        sweep.rho = m.value("rho", 0.2);
        sweep.k = m.value("k", 50);
        sweep.outlier_threshold = m.value("t", 0.10);
        if (!is_spdf_method(sweep.method)) {
            filter_method_from_name(sweep.method);  // validates the name
        }
        cfg.methods.push_back(std::move(sweep));
    }
    cfg.validate();
    return cfg;
}

BenchResult run_benchmark(const BenchConfig& cfg) {
    cfg.validate();

    struct Setting {
        std::size_t pair_idx, method_idx, param_idx;
    };
    std::vector<Setting> settings;
    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            for (std::size_t a = 0; a < cfg.methods[m].parameters.size(); ++a) {
                settings.push_back({p, m, a});
            }
        }
    }

    // Scan pairs are loaded once up front.
    std::vector<PointCloud> readings(cfg.pairs.size()), references(cfg.pairs.size());
    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
        readings[p] = load_cloud(cfg.pairs[p].reading_path);
        references[p] = load_cloud(cfg.pairs[p].reference_path);
    }

    const int trials = cfg.trials_per_setting;
    std::vector<std::vector<BenchRow>> rows_per_setting(settings.size());
    std::vector<BenchTiming> timings(settings.size());
    std::vector<std::pair<std::string, UniformizeReport>> reports(settings.size());
    std::vector<char> has_report(settings.size(), 0);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t s = next.fetch_add(1);
            if (s >= settings.size()) return;
            const Setting& setting = settings[s];
            const ScanPair& pair = cfg.pairs[setting.pair_idx];
            const MethodSweep& sweep = cfg.methods[setting.method_idx];
            const double parameter = sweep.parameters[setting.param_idx];

            BenchTiming timing;
            timing.pair = pair.name;
            timing.method = sweep.method;
            timing.parameter = parameter;

            std::vector<BenchRow>& rows = rows_per_setting[s];
            rows.resize(trials);
            for (int t = 0; t < trials; ++t) {
                BenchRow& row = rows[t];
                row.pair = pair.name;
                row.method = sweep.method;
                row.parameter = parameter;
                row.trial = t;
                row.seed = derive_seed(cfg.master_seed, setting.pair_idx,
                                       setting.method_idx, setting.param_idx,
                                       static_cast<std::uint64_t>(t));
                row.failed = true;
            }

            FilteredPair filtered;
            try {
                const auto t0 = std::chrono::steady_clock::now();
                const std::uint64_t filter_seed =
                    derive_seed(cfg.master_seed, setting.pair_idx, setting.method_idx,
                                setting.param_idx, 0xf117e5ULL) ^ sweep.seed;
                UniformizeReport report;
                filtered.reading = run_method(readings[setting.pair_idx], sweep, parameter,
                                              filter_seed, &report);
                filtered.reference = run_method(references[setting.pair_idx], sweep,
                                                parameter, filter_seed + 1, nullptr);
                const auto t1 = std::chrono::steady_clock::now();
                timing.filter_ms =
                    std::chrono::duration<double, std::milli>(t1 - t0).count();
                if (is_spdf_method(sweep.method)) {
                    reports[s] = {pair.name + "/" + sweep.method + "/" + csv_num(parameter),
                                  report};
                    has_report[s] = 1;
                }
                // All methods register from estimated normals; selection-stage
                // normals (NSS/CovS) are dropped before ICP.
                filtered.reading.normals.clear();
                filtered.reference.normals.clear();
            } catch (const std::exception&) {
                timings[s] = timing;
                continue;  // rows stay failed
            }

            const std::size_t achieved =
                std::min(filtered.reading.size(), filtered.reference.size());

            const auto icp_t0 = std::chrono::steady_clock::now();
            for (int t = 0; t < trials; ++t) {
                BenchRow& row = rows[t];
                row.achieved_points = achieved;
                try {
                    PerturbationSpec pspec = cfg.perturbation;
                    pspec.seed = row.seed;
                    const RigidTransform t_init = perturb(pair.ground_truth, pspec);
                    const IcpResult res =
                        icp(filtered.reading, filtered.reference, t_init, cfg.icp);
                    const RegistrationErrors err =
                        registration_errors(res.transform, pair.ground_truth);
                    row.eps_t = err.translation;
                    row.eps_r = err.rotation;
                    row.iterations = res.diagnostics.iterations;
                    row.converged = res.diagnostics.converged && !res.diagnostics.degenerate;
                    row.failed = false;
                } catch (const std::exception&) {
                    row.failed = true;
                }
            }
            const auto icp_t1 = std::chrono::steady_clock::now();
            timing.icp_total_ms =
                std::chrono::duration<double, std::milli>(icp_t1 - icp_t0).count();
            timings[s] = timing;
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned jobs = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs) : hw;
    const unsigned workers =
        std::min<unsigned>(jobs, static_cast<unsigned>(settings.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Deterministic merge in (pair, method, parameter, trial) order.
    BenchResult result;
    for (std::size_t s = 0; s < settings.size(); ++s) {
        result.rows.insert(result.rows.end(), rows_per_setting[s].begin(),
                           rows_per_setting[s].end());
        result.timings.push_back(timings[s]);
        if (has_report[s]) result.spdf_reports.insert(reports[s]);
    }
    return result;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void write_bench_outputs(const BenchResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        std::ofstream raw(out_dir + "/raw.csv");
        raw << "pair,method,parameter,achieved_points,trial,seed,eps_t,eps_r_deg,"
               "iterations,converged,failed\n";
        for (const BenchRow& r : result.rows) {
            raw << r.pair << ',' << r.method << ',' << csv_num(r.parameter) << ','
                << r.achieved_points << ',' << r.trial << ',' << r.seed << ','
                << (r.failed ? "nan" : csv_num(r.eps_t)) << ','
                << (r.failed ? "nan" : csv_num(r.eps_r * 180.0 / M_PI)) << ','
                << r.iterations << ',' << (r.converged ? 1 : 0) << ','
                << (r.failed ? 1 : 0) << "\n";
        }
    }

    {
        // Per-method medians plus point-count-decade groups.
        struct Key {
            std::string method;
            int decade;  // -1 = all
            bool operator<(const Key& o) const {
                if (method != o.method) return method < o.method;
                return decade < o.decade;
            }
        };
        std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
        std::map<Key, std::pair<std::size_t, std::size_t>> counts;  // (rows, failed)
        for (const BenchRow& r : result.rows) {
            const int decade = r.achieved_points > 0
                                   ? static_cast<int>(std::floor(
                                         std::log10(static_cast<double>(r.achieved_points))))
                                   : 0;
            for (const Key& key : {Key{r.method, -1}, Key{r.method, decade}}) {
                auto& c = counts[key];
                c.first += 1;
                if (r.failed) {
                    c.second += 1;
                } else {
                    groups[key].first.push_back(r.eps_t);
                    groups[key].second.push_back(r.eps_r * 180.0 / M_PI);
                }
            }
        }
        std::ofstream summary(out_dir + "/summary.csv");
        summary << "method,decade,rows,failed,median_eps_t,median_eps_r_deg\n";
        for (const auto& [key, c] : counts) {
            const auto it = groups.find(key);
            const double mt = it != groups.end() ? median(it->second.first)
                                                 : std::numeric_limits<double>::quiet_NaN();
            const double mr = it != groups.end() ? median(it->second.second)
                                                 : std::numeric_limits<double>::quiet_NaN();
            summary << key.method << ','
                    << (key.decade < 0 ? std::string("all") : std::to_string(key.decade))
                    << ',' << c.first << ',' << c.second << ',' << csv_num(mt) << ','
                    << csv_num(mr) << "\n";
        }
    }

    {
        std::ofstream timings(out_dir + "/timings.csv");
        timings << "pair,method,parameter,filter_ms,icp_total_ms\n";
        for (const BenchTiming& t : result.timings) {
            timings << t.pair << ',' << t.method << ',' << csv_num(t.parameter) << ','
                    << csv_num(t.filter_ms) << ',' << csv_num(t.icp_total_ms) << "\n";
        }
    }

    {
        std::ofstream hist(out_dir + "/histograms.csv");
        hist << "setting,stage,primitive,threshold,bin_lo,bin_hi,count\n";
        for (const auto& [setting, report] : result.spdf_reports) {
            auto dump = [&](const char* stage, const std::array<SaliencyHistogram, 3>& hs) {
                const char* names[3] = {"surface", "curve", "junction"};
                for (int c = 0; c < 3; ++c) {
                    const SaliencyHistogram& h = hs[c];
                    for (std::size_t b = 0; b < h.counts.size(); ++b) {
                        hist << setting << ',' << stage << ',' << names[c] << ','
                             << csv_num(h.threshold) << ','
                             << csv_num(h.bin_width * static_cast<double>(b)) << ','
                             << csv_num(h.bin_width * static_cast<double>(b + 1)) << ','
                             << h.counts[b] << "\n";
                    }
                }
            };
            dump("initial", report.initial_histograms);
            dump("final", report.final_histograms);
        }
    }
}

}  // namespace spdf
