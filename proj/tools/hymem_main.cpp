// hymem: trace-driven hybrid DRAM/NVM memory system simulator.
//
//   hymem run --config sim.cfg --trace app.trace --seed 7 --report out.json
//   hymem run --synthetic "footprint=602MB,requests=200000" --report out.json
//   hymem validate --trace app.trace
//   hymem sweep --plan plan.txt --jobs 4
//
// Exit status: 0 success, 1 usage/parse error, 2 invariant breach.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "hymem/config.hpp"
#include "hymem/runner.hpp"
#include "hymem/synth.hpp"
#include "hymem/trace.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFault = 2;

hymem::SimConfig config_or_default(const std::string& path) {
    return path.empty() ? hymem::validate_config(hymem::SimConfig{}) : hymem::load_config(path);
}

int cmd_run(const std::string& config, const std::string& trace, const std::string& synthetic,
            std::optional<std::uint64_t> seed, const std::string& report) {
    hymem::SimConfig cfg = config_or_default(config);
    hymem::TraceSource src = trace.empty()
                                 ? hymem::TraceSource::synthetic(hymem::parse_synth_spec(synthetic), synthetic)
                                 : hymem::TraceSource::file(trace);
    hymem::RunResult r = hymem::run_simulation(cfg, src, seed);
    if (report.empty() || report == "-") {
        std::cout << r.report;
    } else {
        std::ofstream out(report);
        if (!out) {
            std::cerr << "hymem: cannot write report '" << report << "'\n";
            return kUsage;
        }
        out << r.report;
    }
    return kOk;
}

int cmd_validate(const std::string& config, const std::string& trace) {
    hymem::SimConfig cfg = config_or_default(config);
    auto issues = hymem::validate_trace(trace, cfg);
    for (const auto& i : issues) std::cerr << trace << ":" << i.line << ": " << i.message << '\n';
    if (!issues.empty()) return kUsage;
    std::cout << trace << ": ok\n";
    return kOk;
}

int cmd_sweep(const std::string& plan_path, unsigned jobs) {
    auto plan = hymem::parse_sweep_plan(plan_path);
    auto outcomes = hymem::run_sweep(plan, jobs);
    int worst = kOk;
    for (const auto& o : outcomes) {
        std::cout << plan_path << ":" << o.line << ": " << (o.exit_code == 0 ? "ok" : o.message) << '\n';
        worst = std::max(worst, o.exit_code);
    }
    return worst;
}

int cmd_synth(const std::string& config, const std::string& synthetic, std::optional<std::uint64_t> seed,
              const std::string& out_path) {
    hymem::SimConfig cfg = config_or_default(config);
    auto params = hymem::parse_synth_spec(synthetic);
    if (!params.allocs.empty()) {
        std::cerr << "hymem: synth writes flat-window traces; alloc directives need 'run --synthetic'\n";
        return kUsage;
    }
    hymem::TraceSynthesizer s(cfg, params, seed.value_or(cfg.seed));
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty() && out_path != "-") {
        file.open(out_path);
        if (!file) {
            std::cerr << "hymem: cannot write '" << out_path << "'\n";
            return kUsage;
        }
        out = &file;
    }
    *out << "# synthetic: " << synthetic << '\n';
    while (auto r = s.next()) *out << hymem::format_record(*r) << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace-driven hybrid DRAM/NVM memory system simulator"};
    app.require_subcommand(1);

    std::string config, trace, synthetic, report, plan, out;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;

    auto* run = app.add_subcommand("run", "Simulate a trace to quiescence and write a JSON report");
    run->add_option("--config", config, "key = value configuration file")->check(CLI::ExistingFile);
    auto* trace_opt = run->add_option("--trace", trace, "trace file: R|W <hex addr> <size> [+gap]")
                          ->check(CLI::ExistingFile);
    auto* synth_opt = run->add_option("--synthetic", synthetic, "workload file or inline key=value,... list");
    trace_opt->excludes(synth_opt);
    run->add_option("--seed", seed, "seed for synthesis and write data (overrides config)");
    run->add_option("--report", report, "report path ('-' for stdout)");

    auto* validate = app.add_subcommand("validate", "Check a trace without simulating it");
    validate->add_option("--trace", trace, "trace file")->required();
    validate->add_option("--config", config, "configuration providing the window")->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "Run every job of a sweep plan");
    sweep->add_option("--plan", plan, "plan file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--jobs", jobs, "concurrent simulations")->check(CLI::PositiveNumber);

    auto* synth = app.add_subcommand("synth", "Write a synthetic trace file");
    synth->add_option("--config", config, "configuration providing the window")->check(CLI::ExistingFile);
    synth->add_option("--synthetic", synthetic, "workload file or inline key=value,... list")->required();
    synth->add_option("--seed", seed, "generator seed");
    synth->add_option("--out", out, "output path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*run) {
            if (trace.empty() && synthetic.empty()) {
                std::cerr << "hymem run: one of --trace or --synthetic is required\n";
                return kUsage;
            }
            return cmd_run(config, trace, synthetic, seed, report);
        }
        if (*validate) return cmd_validate(config, trace);
        if (*sweep) return cmd_sweep(plan, jobs);
        if (*synth) return cmd_synth(config, synthetic, seed, out);
    } catch (const hymem::InvariantError& e) {
        std::cerr << "hymem: invariant breach: " << e.what() << '\n';
        return kFault;
    } catch (const std::exception& e) {
        std::cerr << "hymem: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
