// Acceptance suite: one self-contained check per criterion, one PASS/FAIL
// line each, nonzero exit when anything fails. Run from the repository root
// (the fixture checks read samples/).
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nullscan/generate.hpp"
#include "nullscan/multi.hpp"
#include "nullscan/render.hpp"

using namespace nullscan;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, const std::string& what, bool ok,
            const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << ": criterion " << criterion << " - "
              << what;
    if (!ok && !detail.empty()) std::cout << " (" << detail << ")";
    std::cout << '\n';
    if (!ok) ++failures;
}

Size fin(std::uint64_t n) { return Size::finite(n); }

const BufferId b0 = BufferId::site(100);
const BufferId b1 = BufferId::site(101);

// The running example's pre-state: a terminated 10-byte string w, and a
// 14-byte buffer holding three packed strings with nulls at 3, 7 and 13.
AnalysisState seeded_state() {
    AnalysisState s;
    s.alpha.declare(b0);
    s.alpha.declare(b1);
    s.alpha.set(b0, BufInfo{fin(10), NullPosSet{fin(10)}, true});
    s.alpha.set(b1, BufInfo{fin(14), NullPosSet{fin(3), fin(7), fin(13)}, true});
    s.beta.declare("w");
    s.beta.declare("x");
    s.beta.declare("y");
    s.beta.declare("z");
    s.beta.set("w", PtrInfo{b0, fin(0), true});
    s.beta.set("x", PtrInfo{b1, fin(0), true});
    return s;
}

const char* kCalls =
    "ptr w, x, y, z\n"
    "z = x + 6\n"
    "y = x + 4\n"
    "strcat(z, y)\n"  // line 4
    "strcat(z, y)\n"  // line 5
    "strcpy(y, w)\n"; // line 6

const NodeFacts& facts_at_line(const Program& p, const FlowResult& fr, int line) {
    for (const Stmt& n : p.cfg.nodes())
        if (n.line == line && n.kind != StmtKind::Nop) return fr.facts.at(n.id);
    throw std::runtime_error("no statement at line " + std::to_string(line));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const char* kSamples[] = {"arrays",   "control", "deref_writes", "fig1",
                          "literal",  "realloc", "scan_calls"};

// ---- Criteria 1-3 ----

void criterion1() {
    auto t0 = Clock::now();
    Program p = load_program(kCalls);
    FlowResult fr = solve(p.cfg, seeded_state());

    bool ok = true;
    std::string detail;
    auto expect = [&](int line, NullPosSet nps) {
        const BufInfo& info = facts_at_line(p, fr, line).out.alpha.at(b1);
        if (info.size == fin(14) && info.nps == nps) return;
        ok = false;
        detail += "after line " + std::to_string(line) + ": got (" +
                  info.size.str() + ", " + info.nps.str() + ") want (14, " +
                  nps.str() + "); ";
    };
    expect(4, NullPosSet{fin(3), fin(10), fin(13)});
    expect(5, NullPosSet{fin(3), Size::inf()});
    expect(6, NullPosSet{fin(3), fin(14), Size::inf()});

    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs >= 1.0) {
        ok = false;
        detail += "took " + std::to_string(secs) + "s";
    }
    report(1, "the three-call example reaches its three buffer states in "
              "under a second", ok, detail);
}

void criterion2() {
    std::string text =
        "ptr w, x, y, z, v\n"
        "z = x + 6\n"
        "y = x + 4\n"
        "v = x + 14\n"
        "strlen(v)\n"   // line 5: flagged, no null at or after 14
        "strlen(y)\n"   // line 6: end 7, clean
        "strcat(z, y)\n"
        "strlen(y)\n"   // line 8: end 10, clean
        "strcat(z, y)\n"
        "strlen(y)\n"   // line 10: flagged, terminator destroyed
        "strcpy(y, w)\n";
    Program p = load_program(text);
    AnalysisState boundary = seeded_state();
    boundary.beta.declare("v");
    FlowResult fr = solve(p.cfg, boundary);
    std::vector<Diagnostic> ds = collect(fr, p.cfg);

    auto flagged = [&](int line) {
        for (const Diagnostic& d : ds)
            if (d.line == line && d.kind == DiagKind::PotentialReadOverflow)
                return true;
        return false;
    };
    bool ok = flagged(5) && !flagged(6) && !flagged(8) && flagged(10);
    report(2, "scans are flagged exactly when no terminator is in reach", ok);
}

void criterion3() {
    Program p = load_program(kCalls);
    FlowResult fr = solve(p.cfg, seeded_state());
    std::vector<Diagnostic> writes;
    for (const Diagnostic& d : collect(fr, p.cfg))
        if (d.kind == DiagKind::WriteOverflow) writes.push_back(d);
    bool ok = writes.size() == 1 && writes[0].line == 5;
    report(3, "exactly one write overflow, at the second concatenation", ok);
}

// ---- Criteria 4-5: lattice laws ----

struct Gen {
    std::mt19937_64 rng{20260826};

    Size size() {
        std::uint64_t r = rng() % 11;
        return r == 10 ? Size::inf() : fin(r);
    }
    BufferId bufid() {
        std::uint64_t r = rng() % 5;
        return r == 4 ? BufferId::undef() : BufferId::site(static_cast<std::uint32_t>(r));
    }
    NullPosSet nps() {
        NullPosSet s;
        for (int i = 0; i < static_cast<int>(rng() % 5); ++i) s.insert(size());
        return s;
    }
    BufInfo bufinfo() { return BufInfo{size(), nps(), rng() % 2 == 0}; }
    PtrInfo ptrinfo() {
        PtrInfo p{bufid(), size(), rng() % 2 == 0};
        if (p.buf.is_undef()) p.offset = Size::inf();
        if (!p.offset.is_finite()) p.exact = false; // exact implies finite
        return p;
    }
    BufferMap alpha() {
        BufferMap a;
        for (std::uint32_t b = 0; b < 4; ++b)
            if (rng() % 2) a.set(BufferId::site(b), bufinfo());
        return a;
    }
    PointerMap beta() {
        PointerMap m;
        for (const char* x : {"p", "q", "r"})
            if (rng() % 2) m.set(x, ptrinfo());
        return m;
    }
};

template <class T, class Meet>
bool laws(Gen& g, T (Gen::*make)(), Meet meet, std::string& detail,
          const char* name) {
    for (int i = 0; i < 10000; ++i) {
        T a = (g.*make)();
        T b = (g.*make)();
        T c = (g.*make)();
        if (!(meet(a, a) == a)) {
            detail = std::string(name) + ": not idempotent";
            return false;
        }
        if (!(meet(a, b) == meet(b, a))) {
            detail = std::string(name) + ": not commutative";
            return false;
        }
        if (!(meet(meet(a, b), c) == meet(a, meet(b, c)))) {
            detail = std::string(name) + ": not associative";
            return false;
        }
    }
    return true;
}

void criterion4() {
    Gen g;
    std::string detail;
    bool ok =
        laws(g, &Gen::size, [](Size a, Size b) { return meet_size(a, b); },
             detail, "meet_size") &&
        laws(g, &Gen::bufid,
             [](BufferId a, BufferId b) { return meet_bufid(a, b); }, detail,
             "meet_bufid") &&
        laws(g, &Gen::nps,
             [](const NullPosSet& a, const NullPosSet& b) {
                 return meet_nps(a, b);
             },
             detail, "meet_nps") &&
        laws(g, &Gen::alpha,
             [](const BufferMap& a, const BufferMap& b) {
                 return meet_alpha(a, b);
             },
             detail, "meet_alpha") &&
        laws(g, &Gen::beta,
             [](const PointerMap& a, const PointerMap& b) {
                 return meet_beta(a, b);
             },
             detail, "meet_beta");
    report(4, "every meet is idempotent, commutative and associative "
              "(10000 cases each)", ok, detail);
}

void criterion5() {
    Gen g;
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
        NullPosSet x = g.nps();
        NullPosSet y = g.nps();
        bool want = x.has_inf() || y.has_inf();
        ok = meet_nps(x, y).has_inf() == want;
    }
    report(5, "infinity survives a meet exactly when either side has it", ok);
}

// ---- Criteria 6-8: fuzzing and mode agreement ----

std::vector<std::string> corpus_texts() {
    std::vector<std::string> texts;
    for (const char* name : kSamples)
        texts.push_back(read_file(std::string("samples/") + name + ".bof"));
    std::mt19937_64 rng(42);
    for (int i = 0; i < 500; ++i) texts.push_back(generate_program(rng));
    return texts;
}

void criterion6(const std::vector<std::string>& texts) {
    auto t0 = Clock::now();
    std::mt19937_64 rng(99);
    bool ok = true;
    std::string detail;
    std::size_t programs = 0;
    for (const std::string& text : texts) {
        Program p = load_program(text);
        ++programs;
        SoundnessVerdict v = check_soundness(p, 64, rng);
        if (!v.pass) {
            ok = false;
            detail = "program " + std::to_string(programs) + ": " + v.detail;
            break;
        }
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (ok && programs < 500) {
        ok = false;
        detail = "only " + std::to_string(programs) + " programs";
    }
    if (ok && secs >= 300.0) {
        ok = false;
        detail = "took " + std::to_string(secs) + "s";
    }
    report(6, "every concrete overflow in " + std::to_string(programs) +
                  " random programs is covered by a diagnostic",
           ok, detail);
}

void criterion7(const std::vector<std::string>& texts) {
    bool ok = true;
    std::string detail;
    std::size_t compared = 0;
    for (std::size_t i = 0; i < texts.size() && ok; ++i) {
        Program p = load_program(texts[i]);
        MultiFlowResult mfr =
            solve_multi(p.cfg, initial_multi_state(p.buffers, p.pointers),
                        SolveMode::Cyclic);
        if (!is_single_pointee(mfr)) continue;
        ++compared;
        FlowResult fr = solve(p.cfg, initial_state(p.buffers, p.pointers),
                              SolveMode::Cyclic);
        if (!(collect_multi(mfr, p.cfg) == collect(fr, p.cfg))) {
            ok = false;
            detail = "diagnostics diverge on corpus program " + std::to_string(i);
        }
    }
    report(7, "multi-pointee mode reproduces single-pointee diagnostics on " +
                  std::to_string(compared) + " single-pointee programs",
           ok, detail);
}

void criterion8(const std::vector<std::string>& texts) {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < texts.size() && ok; ++i) {
        Program p = load_program(texts[i]);
        AnalysisState boundary = initial_state(p.buffers, p.pointers);
        if (!(solve(p.cfg, boundary, SolveMode::SinglePass) ==
              solve(p.cfg, boundary, SolveMode::Worklist))) {
            ok = false;
            detail = "solutions diverge on corpus program " + std::to_string(i);
        }
    }
    report(8, "single-pass and worklist solves agree on the whole corpus", ok,
           detail);
}

// ---- Criterion 9: fixture dumps ----

void criterion9() {
    bool ok = true;
    std::string detail;
    for (const char* name : kSamples) {
        std::string base = std::string("samples/") + name;
        Program p = load_program(read_file(base + ".bof"));
        std::string got = dump_core(p);
        std::string want = read_file("samples/expected/" + std::string(name) +
                                     ".core");
        if (got != want) {
            ok = false;
            detail += base + ".bof does not match its expected dump; ";
        }
    }

    // Behavioral cross-check of the literal fixture: a 5-character literal
    // ends at 5, and reading up to there is clean both abstractly and
    // concretely.
    Program lit = load_program(read_file("samples/literal.bof"));
    FlowResult fr = solve(lit.cfg, initial_state(lit.buffers, lit.pointers));
    bool end_ok = false;
    for (const Stmt& n : lit.cfg.nodes())
        if (n.kind == StmtKind::StrLen) {
            const AnalysisState& in = fr.facts.at(n.id).in;
            end_ok = end_of(in, "x", pt_of(in.beta, "x")) == fin(5);
        }
    if (!end_ok) {
        ok = false;
        detail += "literal string does not end at 5; ";
    }
    if (!collect(fr, lit.cfg).empty() ||
        !interpret(lit.cfg, PathChoices{}).events.empty()) {
        ok = false;
        detail += "literal sample is not clean; ";
    }
    report(9, "checked-in sample dumps and the literal's behavior match", ok,
           detail);
}

} // namespace

int main() {
    try {
        criterion1();
        criterion2();
        criterion3();
        criterion4();
        criterion5();
        std::vector<std::string> texts = corpus_texts();
        criterion6(texts);
        criterion7(texts);
        criterion8(texts);
        criterion9();
    } catch (const std::exception& e) {
        std::cout << "FAIL: acceptance suite aborted (" << e.what() << ")\n";
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
