#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "nullscan/frontend.hpp"
#include "nullscan/render.hpp"

using namespace nullscan;

namespace {

std::vector<StmtKind> core_kinds(const Program& p) {
    std::vector<StmtKind> out;
    for (std::uint32_t id : topo_order(p.cfg, find_back_edges_checked(p.cfg))) {
        const Stmt& n = p.cfg.node(id);
        if (n.kind != StmtKind::Nop) out.push_back(n.kind);
    }
    return out;
}

constexpr const char* kFig1 =
    "ptr w, x, y, z\n"
    "z = x + 6\n"
    "y = x + 4\n"
    "strcat(z, y)\n"
    "strcat(z, y)\n"
    "strcpy(y, w)\n";

} // namespace

TEST_CASE("the running-example text parses to five statements") {
    SourceProgram p = parse(std::string(kFig1));
    CHECK(p.pointers == std::vector<std::string>{"w", "x", "y", "z"});
    REQUIRE(p.stmts.size() == 5);
    CHECK(p.stmts[0].kind == SourceStmt::Kind::AssignAdd);
    CHECK(p.stmts[2].kind == SourceStmt::Kind::StrCat);
    CHECK(p.stmts[4].kind == SourceStmt::Kind::StrCpy);
    CHECK(p.stmts[4].x == "y");
    CHECK(p.stmts[4].y == "w");
    CHECK(p.stmts[4].line == 6);
}

TEST_CASE("an empty file is a program with zero statements") {
    CHECK(parse(std::string("")).stmts.empty());
    CHECK(parse(std::string("# only a comment\n\n")).stmts.empty());
}

TEST_CASE("syntax errors carry the offending line") {
    try {
        parse(std::string("ptr z, y\nstrcat(z y)\n"));
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse(std::string("ptr x\nx = malloc(5\n")), SyntaxError);
    CHECK_THROWS_AS(parse(std::string("ptr x\nx[0] = 7\n")), SyntaxError);
    CHECK_THROWS_AS(parse(std::string("ptr x\nif (*) {\nfree(x)\n")), SyntaxError);
    CHECK_THROWS_AS(parse(std::string("}\n")), SyntaxError);
    CHECK_THROWS_AS(parse(std::string("ptr x\nx = \"oops\n")), SyntaxError);
}

TEST_CASE("uses of undeclared pointers are rejected") {
    try {
        parse(std::string("ptr x\nstrcpy(x, q)\n"));
        FAIL("expected an undeclared-pointer error");
    } catch (const UndeclaredPointer& e) {
        CHECK(e.name == "q");
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse(std::string("q = malloc(5)\n")), UndeclaredPointer);
}

TEST_CASE("extents: constants, ranges and unknowns") {
    SourceProgram p = parse(std::string(
        "ptr x\nx = malloc(5)\nx = malloc(n@range(2,6))\nx = malloc(?)\n"));
    CHECK(p.stmts[0].extent == Extent::constant(5));
    CHECK(p.stmts[1].extent == Extent::range(2, 6));
    CHECK(p.stmts[2].extent == Extent::unknown());
    CHECK_THROWS_AS(parse(std::string("ptr x\nx = malloc(n@range(6,2))\n")),
                    SyntaxError);
}

TEST_CASE("string literal assignment desugars to malloc plus terminator") {
    Program p = load_program("ptr x\nx = \"Hello\"\n");
    std::vector<StmtKind> k = core_kinds(p);
    REQUIRE(k == std::vector<StmtKind>{StmtKind::Malloc, StmtKind::IndexWriteNull});
    // Both carry the literal's length: size 5, terminator at index 5.
    const Stmt& alloc = p.cfg.node(1);
    const Stmt& wr = p.cfg.node(2);
    CHECK(alloc.extent == Extent::constant(5));
    CHECK(wr.extent == Extent::constant(5));
    CHECK(alloc.line == wr.line);
}

TEST_CASE("realloc desugars to a fresh allocation at its own site plus a copy") {
    Program p = load_program("ptr x, y\ny = malloc(4)\nx = realloc(y, 8)\n");
    std::vector<StmtKind> k = core_kinds(p);
    REQUIRE(k == std::vector<StmtKind>{StmtKind::Malloc, StmtKind::Malloc,
                                       StmtKind::StrCpy});
    const Stmt& fresh = p.cfg.node(2);
    CHECK(fresh.x == "x");
    CHECK(fresh.extent == Extent::constant(8));
    const Stmt& copy = p.cfg.node(3);
    CHECK(copy.x == "x");
    CHECK(copy.y == "y");
    // Two allocation sites: the malloc and the realloc.
    CHECK(p.buffers.size() == 2);
}

TEST_CASE("comparison and search calls desugar to scans of their strings") {
    Program p = load_program(
        "ptr x, y\nx = \"a\"\ny = \"b\"\nstrcmp(x, y)\nstrncmp(x, y, 3)\n"
        "strchr(x, q)\nstrrchr(y, q)\n");
    std::vector<StmtKind> k = core_kinds(p);
    std::vector<StmtKind> expect{
        StmtKind::Malloc, StmtKind::IndexWriteNull, // x = "a"
        StmtKind::Malloc, StmtKind::IndexWriteNull, // y = "b"
        StmtKind::StrLen, StmtKind::StrLen,         // strcmp
        StmtKind::StrLen, StmtKind::StrLen,         // strncmp
        StmtKind::StrLen,                           // strchr
        StmtKind::StrLen,                           // strrchr
    };
    CHECK(k == expect);
}

TEST_CASE("substring search scans both arguments and makes an unknown-size buffer") {
    Program p = load_program("ptr x, y, t\nx = \"aa\"\ny = \"b\"\nt = strstr(x, y)\n");
    std::vector<StmtKind> k = core_kinds(p);
    std::vector<StmtKind> tail{k.end() - 3, k.end()};
    CHECK(tail == std::vector<StmtKind>{StmtKind::StrLen, StmtKind::StrLen,
                                        StmtKind::Malloc});
    const Stmt& alloc = p.cfg.node(7);
    CHECK(alloc.x == "t");
    CHECK(alloc.extent == Extent::unknown());
}

TEST_CASE("array declarations") {
    Program bare = load_program("char a[8]\n");
    CHECK(core_kinds(bare) == std::vector<StmtKind>{StmtKind::Malloc});

    Program lit = load_program("char b[8] = \"abc\"\n");
    REQUIRE(core_kinds(lit) ==
            std::vector<StmtKind>{StmtKind::Malloc, StmtKind::IndexWriteNull});
    CHECK(lit.cfg.node(1).extent == Extent::constant(8)); // array size
    CHECK(lit.cfg.node(2).extent == Extent::constant(3)); // literal length

    Program braces = load_program("char c[4] = {0}\n");
    REQUIRE(core_kinds(braces) ==
            std::vector<StmtKind>{StmtKind::Malloc, StmtKind::IndexWriteNull});
    CHECK(braces.cfg.node(2).extent == Extent::constant(4));
}

TEST_CASE("pointer-arithmetic writes are index writes") {
    Program p = load_program(
        "ptr x\nx = malloc(6)\n*(x+2) = null\n*(x+3) = char\n"
        "x[4] = '\\0'\nx[5] = 'q'\n");
    CHECK(core_kinds(p) ==
          std::vector<StmtKind>{StmtKind::Malloc, StmtKind::IndexWriteNull,
                                StmtKind::IndexWriteChar, StmtKind::IndexWriteNull,
                                StmtKind::IndexWriteChar});
}

TEST_CASE("if/else builds a diamond") {
    Program p = load_program(
        "ptr x, y\nx = malloc(14)\nif (*) {\ny = x + 4\n} else {\ny = x + 6\n}\n"
        "read y\n");
    // malloc has both arms as successors; both arms feed the read.
    const Stmt& alloc = p.cfg.node(1);
    CHECK(alloc.kind == StmtKind::Malloc);
    CHECK(p.cfg.succs(1).size() == 2);
    std::uint32_t read_id = 0;
    for (const Stmt& n : p.cfg.nodes())
        if (n.kind == StmtKind::ReadPtr) read_id = n.id;
    CHECK(p.cfg.preds(read_id).size() == 2);
    CHECK(find_back_edges_checked(p.cfg).empty());
}

TEST_CASE("an if without an else still joins with the fallthrough path") {
    Program p = load_program("ptr x\nif (*) {\nx = malloc(5)\n}\nread x\n");
    std::uint32_t read_id = 0;
    for (const Stmt& n : p.cfg.nodes())
        if (n.kind == StmtKind::ReadPtr) read_id = n.id;
    CHECK(p.cfg.preds(read_id).size() == 2);
}

TEST_CASE("while builds a header with a forward exit and a latch back edge") {
    Program p = load_program(
        "ptr x\nx = malloc(9)\nwhile (*) {\nx[0] = null\nstrlen(x)\n}\nread x\n");
    std::uint32_t header = 0;
    for (const Stmt& n : p.cfg.nodes())
        if (n.loop_header) header = n.id;
    REQUIRE(header != 0);

    std::vector<Edge> back = find_back_edges_checked(p.cfg);
    REQUIRE(back.size() == 1);
    CHECK(back[0].second == header);

    // Forward successors: the body entry first, the loop exit last.
    const auto& succs = p.cfg.succs(header);
    REQUIRE(succs.size() == 2);
    CHECK(p.cfg.node(succs.front()).kind == StmtKind::IndexWriteNull);
    CHECK(p.cfg.node(succs.back()).kind == StmtKind::ReadPtr);

    // Body statements are marked as in-loop, the rest are not.
    for (const Stmt& n : p.cfg.nodes()) {
        bool body = n.kind == StmtKind::IndexWriteNull || n.kind == StmtKind::StrLen;
        if (body) CHECK(n.in_loop);
        if (n.kind == StmtKind::ReadPtr || n.kind == StmtKind::Malloc)
            CHECK_FALSE(n.in_loop);
    }
}

TEST_CASE("a pointer shift off a base reassigned in the same loop is loop-variant") {
    Program p = load_program(
        "ptr x, y\nx = malloc(9)\nwhile (*) {\ny = x + 1\nx = y\n}\n");
    bool found = false;
    for (const Stmt& n : p.cfg.nodes())
        if (n.kind == StmtKind::AssignAdd) {
            found = true;
            CHECK(n.shift_src_loop_variant);
        }
    CHECK(found);

    // Outside a loop, or with an invariant base, the flag stays off.
    Program q = load_program("ptr x, y\nx = malloc(9)\nwhile (*) {\ny = x + 1\n}\n");
    for (const Stmt& n : q.cfg.nodes())
        if (n.kind == StmtKind::AssignAdd) CHECK_FALSE(n.shift_src_loop_variant);
}

TEST_CASE("every core statement traces to exactly one source line") {
    Program p = load_program(
        "ptr x, y\nx = \"ab\"\ny = realloc(x, 9)\nstrcmp(x, y)\n");
    for (const Stmt& n : p.cfg.nodes()) {
        if (n.kind == StmtKind::Nop) continue;
        CHECK(n.line >= 2);
        CHECK(n.line <= 4);
    }
    // Desugared groups share their line.
    CHECK(p.cfg.node(1).line == p.cfg.node(2).line);
    CHECK(p.cfg.node(3).line == p.cfg.node(4).line);
}

TEST_CASE("re-desugaring a core-only rendering is idempotent") {
    Program p1 = load_program(kFig1);
    std::string again = "ptr w, x, y, z\n";
    for (std::uint32_t id : topo_order(p1.cfg, {})) {
        const Stmt& n = p1.cfg.node(id);
        if (n.kind != StmtKind::Nop) again += stmt_str(n) + "\n";
    }
    Program p2 = load_program(again);
    CHECK(core_kinds(p1) == core_kinds(p2));
    CHECK(dump_core(p1).size() > 0);
    CHECK(core_kinds(p1).size() == 5);
}

TEST_CASE("trailing semicolons and whitespace are tolerated") {
    Program p = load_program("ptr x;\n  x = malloc(5);\n\tstrlen(x)  \n");
    CHECK(core_kinds(p) == std::vector<StmtKind>{StmtKind::Malloc, StmtKind::StrLen});
}
