// sedpf-lab: multipath low-delay transport laboratory.
//
//   sedpf-lab run <spec.json>          run an experiment spec (sweep x seeds)
//   sedpf-lab scenario <tag>           run a canned scenario (fig2|fig6|fig7a|fig7b|custom)
//   sedpf-lab sgrid <spec.json>        analytic decode-period grid -> CSV
//   sedpf-lab validate <results.csv>   check simulated delay against the bound
//   sedpf-lab fit <trace.csv>          fit per-path models from a feedback trace
//
// Exit codes: 0 success, 2 validation failure, 1 error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sedpf/expctl.hpp"
#include "sedpf/path_stats.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void print_bound_report(const sedpf::BoundReport& report) {
    for (const auto& c : report.checks) {
        if (c.excluded) {
            std::printf("[SKIP] %s bound divergent (capacity)\n", c.grid_key.c_str());
            continue;
        }
        std::printf("[%s] %s sim=%.6g se=%.3g bound=%.6g tightness=%.3g (seeds=%zu)\n",
                    c.pass ? "PASS" : "FAIL", c.grid_key.c_str(), c.sim_mean, c.sim_se,
                    c.bound, c.tightness, c.seeds);
    }
    std::printf("%s\n", report.all_pass ? "all bounds hold" : "bound violation detected");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multipath low-delay scheduling and streaming-code laboratory"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, tag, results_path, trace_path;
    unsigned seeds_override = 0;
    std::uint64_t packets_override = 0;
    unsigned threads = 0;
    std::uint64_t mc_periods = 200000;
    std::uint64_t mc_seed = 1;
    std::string sgrid_out;

    auto* run_cmd = app.add_subcommand("run", "run an experiment spec file");
    run_cmd->add_option("spec", spec_path, "experiment spec (json)")->required();
    run_cmd->add_option("--out", out_dir, "output directory override");
    run_cmd->add_option("--threads", threads, "worker threads (0 = auto)");

    auto* scen_cmd = app.add_subcommand("scenario", "run a canned scenario");
    scen_cmd->add_option("tag", tag, "fig2|fig6|fig7a|fig7b|custom")->required();
    scen_cmd->add_option("--out", out_dir, "output directory");
    scen_cmd->add_option("--seeds", seeds_override, "number of seeds (1..n)");
    scen_cmd->add_option("--packets", packets_override, "packets per run");
    scen_cmd->add_option("--threads", threads, "worker threads (0 = auto)");

    auto* sgrid_cmd = app.add_subcommand("sgrid", "analytic decode-period grid");
    sgrid_cmd->add_option("spec", spec_path, "grid spec (json)")->required();
    sgrid_cmd->add_option("--out", sgrid_out, "output csv (default stdout)");
    sgrid_cmd->add_option("--mc-periods", mc_periods, "Monte Carlo periods per point");
    sgrid_cmd->add_option("--mc-seed", mc_seed, "Monte Carlo seed");

    auto* val_cmd = app.add_subcommand("validate", "validate bounds in a results csv");
    val_cmd->add_option("results", results_path, "results csv")->required();

    auto* fit_cmd = app.add_subcommand("fit", "fit path models from a trace");
    fit_cmd->add_option("trace", trace_path, "csv: path_id,send_time_s,arrival_time_s|LOST")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            auto spec = sedpf::experiment_from_json(sedpf::json::parse(slurp(spec_path)));
            if (!out_dir.empty()) spec.out_dir = out_dir;
            auto result = sedpf::run_experiment(spec, threads);
            std::printf("wrote %zu rows to %s\n", result.rows.size(), spec.out_dir.c_str());
        } else if (*scen_cmd) {
            auto spec = sedpf::scenario(tag);
            if (!out_dir.empty()) spec.out_dir = out_dir;
            if (seeds_override > 0) {
                spec.seeds.clear();
                for (std::uint64_t s = 1; s <= seeds_override; ++s) spec.seeds.push_back(s);
            }
            if (packets_override > 0) spec.base.total_packets = packets_override;
            auto result = sedpf::run_experiment(spec, threads);
            std::printf("wrote %zu rows to %s\n", result.rows.size(), spec.out_dir.c_str());
            if (tag == "fig6") print_bound_report(sedpf::validate_bounds(result));
        } else if (*sgrid_cmd) {
            auto grid = sedpf::sgrid_from_json(sedpf::json::parse(slurp(spec_path)));
            auto csv = sedpf::sgrid_csv(grid, mc_periods, mc_seed);
            if (sgrid_out.empty())
                std::fputs(csv.c_str(), stdout);
            else
                sedpf::write_file(sgrid_out, csv);
        } else if (*val_cmd) {
            auto result = sedpf::load_results_csv(slurp(results_path));
            auto report = sedpf::validate_bounds(result);
            print_bound_report(report);
            if (!report.all_pass) return 2;
        } else if (*fit_cmd) {
            std::ifstream f(trace_path);
            if (!f) throw std::runtime_error("cannot read " + trace_path);
            auto ests = sedpf::parse_trace(f);
            sedpf::json out = sedpf::json::array();
            for (auto& [path, est] : ests) {
                sedpf::PathModel m;
                m.path_id = path;
                m = sedpf::refresh(m, est);
                out.push_back({{"path_id", path},
                               {"stale", m.stale},
                               {"slot_duration", m.slot_duration},
                               {"delay_bound", m.delay_bound},
                               {"window", m.window},
                               {"delta_mean", m.delta_mean},
                               {"delta_var", m.delta_var},
                               {"erasure_rate", m.erasure_rate},
                               {"owd_mean", m.owd_mean}});
            }
            std::printf("%s\n", out.dump(2).c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
