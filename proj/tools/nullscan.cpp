// Command-line driver: analyze .bof programs, dump per-point states, or
// fuzz the analyzer against the concrete interpreter.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include <CLI11.hpp>

#include "nullscan/detect.hpp"
#include "nullscan/frontend.hpp"
#include "nullscan/generate.hpp"
#include "nullscan/multi.hpp"
#include "nullscan/oracle.hpp"
#include "nullscan/render.hpp"
#include "nullscan/solver.hpp"

namespace {

namespace fs = std::filesystem;
using namespace nullscan;

struct RunConfig {
    std::string input;
    std::string mode = "single";
    std::string format = "text";
    bool no_check_reads = false;
    std::size_t trials = 200;
    unsigned loop_bound = 8;
    std::uint64_t seed = 0;
};

bool use_color() {
    const char* v = std::getenv("NULLSCAN_COLOR");
    if (v && std::string(v) == "0") return false;
    return isatty(fileno(stdout));
}

std::string paint(const std::string& s, const char* code) {
    if (!use_color()) return s;
    return std::string("\033[") + code + "m" + s + "\033[0m";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int exit_code_for(const std::vector<Diagnostic>& ds) {
    bool err = false, warn = false;
    for (const Diagnostic& d : ds) (is_error(d) ? err : warn) = true;
    return err ? 2 : warn ? 1 : 0;
}

std::string colored_report(const std::vector<Diagnostic>& ds) {
    std::ostringstream os;
    for (const Diagnostic& d : ds) {
        std::string line = std::to_string(d.line) + ':' + str(d.kind) + ':' +
                           d.buffer.str() + ':' + str(d.reason) + ':' + d.message;
        os << paint(line, is_error(d) ? "31" : "33") << '\n';
    }
    return os.str();
}

std::vector<Diagnostic> run_analysis(const Program& p, const RunConfig& cfg) {
    CollectOptions opts{!cfg.no_check_reads};
    // Diagnostics come from the cyclic fixpoint so loop bodies are judged
    // against every iteration, not just the first.
    if (cfg.mode == "multi") {
        MultiFlowResult fr =
            solve_multi(p.cfg, initial_multi_state(p.buffers, p.pointers),
                        SolveMode::Cyclic);
        return collect_multi(fr, p.cfg, opts);
    }
    FlowResult fr = solve(p.cfg, initial_state(p.buffers, p.pointers),
                          SolveMode::Cyclic);
    return collect(fr, p.cfg, opts);
}

int cmd_analyze(const RunConfig& cfg) {
    Program p = load_program(read_file(cfg.input));
    std::vector<Diagnostic> ds = run_analysis(p, cfg);
    if (cfg.format == "json")
        std::cout << report_json(ds).dump(2) << '\n';
    else
        std::cout << colored_report(ds);
    return exit_code_for(ds);
}

int cmd_dump(const RunConfig& cfg) {
    Program p = load_program(read_file(cfg.input));
    if (cfg.mode == "multi") {
        MultiFlowResult fr =
            solve_multi(p.cfg, initial_multi_state(p.buffers, p.pointers));
        if (cfg.format == "json")
            std::cout << dump_json(p, fr).dump(2) << '\n';
        else
            std::cout << dump_text(p, fr);
        return 0;
    }
    FlowResult fr = solve(p.cfg, initial_state(p.buffers, p.pointers));
    if (cfg.format == "json")
        std::cout << dump_json(p, fr).dump(2) << '\n';
    else
        std::cout << dump_text(p, fr);
    return 0;
}

SoundnessVerdict fuzz_one(const std::string& text, const RunConfig& cfg,
                          std::mt19937_64& rng, std::size_t runs) {
    Program p = load_program(text);
    std::vector<Diagnostic> ds = run_analysis(p, cfg);
    return check_soundness(p, ds, runs, rng, cfg.loop_bound);
}

/// Greedy line removal: keep dropping lines while the failure reproduces.
std::string minimize(const std::string& text, const RunConfig& cfg,
                     std::uint64_t seed, std::size_t runs) {
    auto fails = [&](const std::string& t) {
        try {
            std::mt19937_64 rng(seed);
            return !fuzz_one(t, cfg, rng, runs).pass;
        } catch (const std::exception&) {
            return false; // removal broke the program; keep the line
        }
    };
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            std::vector<std::string> trial = lines;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
            std::ostringstream os;
            for (const std::string& l : trial) os << l << '\n';
            if (fails(os.str())) {
                lines = trial;
                changed = true;
                break;
            }
        }
    }
    std::ostringstream os;
    for (const std::string& l : lines) os << l << '\n';
    return os.str();
}

int cmd_fuzz(const RunConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    const std::size_t runs_per_program = 64;

    if (!cfg.input.empty()) {
        std::vector<fs::path> files;
        if (fs::is_directory(cfg.input)) {
            for (const auto& e : fs::directory_iterator(cfg.input))
                if (e.path().extension() == ".bof") files.push_back(e.path());
            std::sort(files.begin(), files.end());
        } else {
            files.push_back(cfg.input);
        }
        bool all_pass = true;
        for (const fs::path& f : files) {
            std::mt19937_64 file_rng(cfg.seed);
            SoundnessVerdict v =
                fuzz_one(read_file(f.string()), cfg, file_rng, cfg.trials);
            std::cout << f.string() << ": "
                      << (v.pass ? "PASS" : "FAIL " + v.detail) << '\n';
            all_pass = all_pass && v.pass;
        }
        std::cout << "verdict: " << (all_pass ? "PASS" : "FAIL")
                  << " (loop bound " << cfg.loop_bound << ")\n";
        return all_pass ? 0 : 2;
    }

    GenConfig gen;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        std::uint64_t program_seed = rng();
        std::mt19937_64 prng(program_seed);
        std::string text = generate_program(prng, gen);
        SoundnessVerdict v = fuzz_one(text, cfg, prng, runs_per_program);
        if (!v.pass) {
            std::cout << "FAIL at generated program " << t << " (seed "
                      << program_seed << "): " << v.detail << '\n';
            std::cout << "minimized counterexample:\n"
                      << minimize(text, cfg, program_seed, runs_per_program);
            return 2;
        }
    }
    std::cout << "verdict: PASS (" << cfg.trials
              << " generated programs, within loop bound " << cfg.loop_bound
              << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nullscan: data-flow buffer overflow analysis for a small "
                 "string-manipulating IR"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub, bool needs_input) {
        auto* in = sub->add_option("input", cfg.input, ".bof program file");
        if (needs_input) in->required()->check(CLI::ExistingFile);
        sub->add_option("--mode", cfg.mode, "single or multi pointee mode")
            ->check(CLI::IsMember({"single", "multi"}));
        sub->add_option("--format", cfg.format, "text or json output")
            ->check(CLI::IsMember({"text", "json"}));
        sub->add_flag("--no-check-reads", cfg.no_check_reads,
                      "skip read-statement checks");
        sub->add_option("--trials", cfg.trials, "fuzz trial count");
        sub->add_option("--loop-bound", cfg.loop_bound,
                        "concrete iterations per loop");
        sub->add_option("--seed", cfg.seed, "random seed");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "report diagnostics");
    add_common(analyze, true);
    CLI::App* dump = app.add_subcommand("dump", "print per-point states");
    add_common(dump, true);
    CLI::App* fuzz = app.add_subcommand(
        "fuzz", "check analyzer soundness against the concrete interpreter");
    add_common(fuzz, false);
    fuzz->get_option("input")->check(CLI::ExistingPath);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(cfg);
        if (app.got_subcommand(dump)) return cmd_dump(cfg);
        return cmd_fuzz(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
