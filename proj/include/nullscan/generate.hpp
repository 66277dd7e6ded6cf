#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nullscan/detect.hpp"
#include "nullscan/frontend.hpp"
#include "nullscan/oracle.hpp"
#include "nullscan/solver.hpp"

// Random program generation and the fuzz driver: generate a program,
// analyze it, then sample concrete runs and demand that every concrete
// overflow event is covered by a diagnostic.

namespace nullscan {

struct GenConfig {
    int max_stmts = 20;
    int max_branch_depth = 2;
    int max_loops = 1;
};

namespace gen_detail {

struct Generator {
    std::mt19937_64& rng;
    const GenConfig& cfg;
    std::vector<std::string> names;
    int stmts_left;
    int loops_left;
    std::ostringstream out;

    Generator(std::mt19937_64& rng, const GenConfig& cfg)
        : rng(rng), cfg(cfg), stmts_left(cfg.max_stmts),
          loops_left(cfg.max_loops) {
        int n = 2 + static_cast<int>(rng() % 4);
        for (int i = 0; i < n; ++i) names.push_back("p" + std::to_string(i));
    }

    std::uint64_t num(std::uint64_t lo, std::uint64_t hi) {
        return lo + rng() % (hi - lo + 1);
    }
    const std::string& ptr() { return names[rng() % names.size()]; }

    std::string extent() {
        switch (rng() % 8) {
        case 0: return "?";
        case 1:
        case 2: {
            std::uint64_t lo = num(0, 8);
            std::uint64_t hi = lo + num(0, 6);
            return "n@range(" + std::to_string(lo) + "," + std::to_string(hi) + ")";
        }
        default: return std::to_string(num(0, 12));
        }
    }

    void indent(int depth) {
        for (int i = 0; i < depth; ++i) out << "  ";
    }

    void stmt(int depth) {
        --stmts_left;
        indent(depth + 1);
        switch (rng() % 17) {
        case 0: out << ptr() << " = malloc(" << extent() << ")\n"; break;
        case 1: out << ptr() << " = calloc(" << extent() << ")\n"; break;
        case 2: out << ptr() << " = " << ptr() << "\n"; break;
        case 3: out << ptr() << " = " << ptr() << " + " << extent() << "\n"; break;
        case 4: out << ptr() << "[" << extent() << "] = null\n"; break;
        case 5: out << ptr() << "[" << extent() << "] = char\n"; break;
        case 6: out << "strcpy(" << ptr() << ", " << ptr() << ")\n"; break;
        case 7: out << "strcat(" << ptr() << ", " << ptr() << ")\n"; break;
        case 8:
            out << "strncpy(" << ptr() << ", " << ptr() << ", " << extent()
                << ")\n";
            break;
        case 9:
            out << "strncat(" << ptr() << ", " << ptr() << ", " << extent()
                << ")\n";
            break;
        case 10:
            out << "memcpy(" << ptr() << ", " << ptr() << ", " << extent()
                << ")\n";
            break;
        case 11: out << "strlen(" << ptr() << ")\n"; break;
        case 12: out << "read " << ptr() << "\n"; break;
        case 13: out << "read " << ptr() << "[" << extent() << "]\n"; break;
        case 14: out << "free(" << ptr() << ")\n"; break;
        case 15:
            out << ptr() << " = \"" << std::string(num(0, 9), 'a') << "\"\n";
            break;
        default:
            out << ptr() << " = realloc(" << ptr() << ", " << extent() << ")\n";
            break;
        }
    }

    void block(int depth, int budget) {
        while (budget > 0 && stmts_left > 0) {
            --budget;
            unsigned roll = rng() % 10;
            if (roll == 0 && depth < cfg.max_branch_depth && stmts_left > 2) {
                --stmts_left;
                indent(depth + 1);
                out << "if (*) {\n";
                block(depth + 1, static_cast<int>(num(1, 3)));
                if (rng() % 2) {
                    indent(depth + 1);
                    out << "} else {\n";
                    block(depth + 1, static_cast<int>(num(1, 3)));
                }
                indent(depth + 1);
                out << "}\n";
            } else if (roll == 1 && loops_left > 0 && depth < cfg.max_branch_depth &&
                       stmts_left > 2) {
                --loops_left;
                --stmts_left;
                indent(depth + 1);
                out << "while (*) {\n";
                block(depth + 1, static_cast<int>(num(1, 3)));
                indent(depth + 1);
                out << "}\n";
            } else {
                stmt(depth);
            }
        }
    }

    std::string run() {
        out << "ptr " << names[0];
        for (std::size_t i = 1; i < names.size(); ++i) out << ", " << names[i];
        out << "\n";
        // Give most pointers something to point at so the interesting
        // operations are reachable.
        for (const std::string& n : names)
            if (rng() % 4) {
                --stmts_left;
                out << n << " = malloc(" << num(0, 12) << ")\n";
            }
        block(-1, stmts_left);
        return out.str();
    }
};

} // namespace gen_detail

inline std::string generate_program(std::mt19937_64& rng,
                                    const GenConfig& cfg = {}) {
    return gen_detail::Generator(rng, cfg).run();
}

// Random path/extent choices for one run of a program.
inline PathChoices random_choices(std::mt19937_64& rng, const Cfg& g,
                                  unsigned loop_bound) {
    PathChoices c;
    c.loop_bound = loop_bound;
    c.bits.reserve(256);
    for (int i = 0; i < 256; ++i) c.bits.push_back(rng() % 2 == 1);
    for (const Stmt& s : g.nodes()) {
        switch (s.extent.kind) {
        case Extent::Kind::Range:
            c.extents[s.id] =
                s.extent.lo + rng() % (s.extent.hi - s.extent.lo + 1);
            break;
        case Extent::Kind::Unknown: c.extents[s.id] = rng() % 16; break;
        case Extent::Kind::Const: break;
        }
    }
    return c;
}

// Analyze a program and sample `trials` concrete runs; fails on the first
// concrete overflow event no diagnostic covers.
inline SoundnessVerdict check_soundness(const Program& p,
                                        const std::vector<Diagnostic>& diags,
                                        std::size_t trials,
                                        std::mt19937_64& rng,
                                        unsigned loop_bound = 8) {
    for (std::size_t t = 0; t < trials; ++t) {
        RunReport report =
            interpret(p.cfg, random_choices(rng, p.cfg, loop_bound));
        SoundnessVerdict v = check_coverage(p.cfg, diags, report, t);
        if (!v.pass) return v;
    }
    return {};
}

inline SoundnessVerdict check_soundness(const Program& p, std::size_t trials,
                                        std::mt19937_64& rng,
                                        unsigned loop_bound = 8) {
    FlowResult fr = solve(p.cfg, initial_state(p.buffers, p.pointers),
                          SolveMode::Cyclic);
    return check_soundness(p, collect(fr, p.cfg), trials, rng, loop_bound);
}

} // namespace nullscan
