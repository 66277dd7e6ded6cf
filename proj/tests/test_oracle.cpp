#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nullscan/generate.hpp"

using namespace nullscan;

namespace {

std::vector<std::uint32_t> ids_of(const Program& p, StmtKind k) {
    std::vector<std::uint32_t> out;
    for (const Stmt& n : p.cfg.nodes())
        if (n.kind == k) out.push_back(n.id);
    return out;
}

const char* kShared =
    "ptr w, x, y, z\n"
    "w = malloc(10)\n"
    "w[10] = null\n"
    "x = malloc(14)\n"
    "x[3] = null\n"
    "x[7] = null\n"
    "x[13] = null\n"
    "z = x + 6\n"
    "y = x + 4\n"
    "strcat(z, y)\n"
    "strcat(z, y)\n"
    "strcpy(y, w)\n";

} // namespace

TEST_CASE("the shared-buffer program overflows exactly once, at call two") {
    Program p = load_program(kShared);
    RunReport r = interpret(p.cfg, PathChoices{});
    CHECK(r.completed);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].is_write);
    std::vector<std::uint32_t> cats = ids_of(p, StmtKind::StrCat);
    REQUIRE(cats.size() == 2);
    CHECK(r.events[0].stmt_id == cats[1]);
}

TEST_CASE("a string literal behaves like a terminated buffer") {
    Program p = load_program("ptr x\nx = \"Hello\"\nstrlen(x)\nread x[5]\n");
    CHECK(interpret(p.cfg, PathChoices{}).events.empty());

    // One cell further is outside the buffer.
    Program q = load_program("ptr x\nx = \"Hello\"\nread x[6]\n");
    RunReport r = interpret(q.cfg, PathChoices{});
    REQUIRE(r.events.size() == 1);
    CHECK_FALSE(r.events[0].is_write);
}

TEST_CASE("runs are deterministic in their choices") {
    Program p = load_program(kShared);
    PathChoices c;
    c.bits = {true, false, true};
    RunReport a = interpret(p.cfg, c);
    RunReport b = interpret(p.cfg, c);
    CHECK(a.events == b.events);
    CHECK(a.completed == b.completed);
}

TEST_CASE("path bits select branch arms") {
    std::string text =
        "ptr x\n"
        "if (*) {\n"
        "  x = malloc(4)\n"
        "} else {\n"
        "  x = malloc(9)\n"
        "}\n"
        "read x[7]\n";
    Program p = load_program(text);

    PathChoices take_then;
    take_then.bits = {true}; // the then-arm: a 4-byte buffer, x[7] overflows
    CHECK(interpret(p.cfg, take_then).events.size() == 1);

    PathChoices take_else;
    take_else.bits = {false};
    CHECK(interpret(p.cfg, take_else).events.empty());
}

TEST_CASE("loops iterate on demand and stay bounded") {
    std::string text =
        "ptr x\n"
        "x = malloc(5)\n"
        "x[5] = null\n"
        "while (*) {\n"
        "  strlen(x)\n"
        "  x[5] = 'a'\n"
        "}\n";
    Program p = load_program(text);

    // No iterations: nothing happens.
    CHECK(interpret(p.cfg, PathChoices{}).events.empty());

    // Two iterations: the second strlen finds the terminator destroyed.
    PathChoices two;
    two.bits = {true, true};
    RunReport r = interpret(p.cfg, two);
    REQUIRE(r.events.size() == 1);
    CHECK_FALSE(r.events[0].is_write);
    CHECK(r.events[0].stmt_id == ids_of(p, StmtKind::StrLen).at(0));

    // All-true bits cannot spin forever: the loop bound cuts the run off.
    PathChoices spin;
    spin.bits.assign(256, true);
    spin.loop_bound = 3;
    RunReport s = interpret(p.cfg, spin);
    CHECK(s.completed);
    CHECK(s.events.size() == 2); // iterations 2 and 3 each hit the dead scan
}

TEST_CASE("coverage: writes may be pre-announced, reads may not") {
    std::string text =
        "ptr x\n"
        "x = malloc(5)\n"
        "x[5] = null\n"
        "while (*) {\n"
        "  strlen(x)\n"
        "  x[5] = 'a'\n"
        "}\n";
    Program p = load_program(text);
    PathChoices two;
    two.bits = {true, true};
    RunReport run = interpret(p.cfg, two);
    REQUIRE_FALSE(run.events.empty());

    // Without diagnostics the concrete read overflow is uncovered.
    SoundnessVerdict bare = check_coverage(p.cfg, {}, run, 0);
    CHECK_FALSE(bare.pass);
    CHECK(bare.detail.find("read") != std::string::npos);
    CHECK(bare.failing_stmt == run.events[0].stmt_id);

    // The cyclic analysis flags the scan, which covers it.
    FlowResult fr = solve(p.cfg, initial_state(p.buffers, p.pointers),
                          SolveMode::Cyclic);
    CHECK(check_coverage(p.cfg, collect(fr, p.cfg), run, 0).pass);

    // A read diagnostic at an earlier statement would not do: reads must be
    // flagged where they happen.
    Diagnostic early;
    early.stmt_id = ids_of(p, StmtKind::Malloc).at(0);
    CHECK_FALSE(check_coverage(p.cfg, {early}, run, 0).pass);

    // For a write event, any diagnostic at or before the statement counts.
    RunReport fake;
    fake.events.push_back({run.events[0].stmt_id, true});
    CHECK(check_coverage(p.cfg, {early}, fake, 0).pass);
}

TEST_CASE("generated programs parse and analyze soundly") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 60; ++i) {
        Program p = load_program(generate_program(rng));
        CHECK(p.cfg.nodes().size() >= 2);
        SoundnessVerdict v = check_soundness(p, 8, rng);
        if (!v.pass) {
            CAPTURE(v.detail);
            CAPTURE(i);
        }
        CHECK(v.pass);
    }
}
