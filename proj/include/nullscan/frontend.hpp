#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nullscan/ir.hpp"

// Textual program format (.bof): one statement per line, '#' comments,
// structured nondeterministic control flow. Surface forms that are not core
// statements (string literals, realloc, array declarations, the strcmp /
// strstr family) are desugared into core statements, each carrying the line
// it came from.

namespace nullscan {

struct SyntaxError : std::runtime_error {
    int line;
    SyntaxError(int line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg),
          line(line) {}
};

struct UndeclaredPointer : std::runtime_error {
    std::string name;
    int line;
    UndeclaredPointer(std::string name, int line)
        : std::runtime_error("line " + std::to_string(line) +
                             ": undeclared pointer '" + name + "'"),
          name(std::move(name)), line(line) {}
};

struct SourceStmt {
    enum class Kind {
        Malloc, Calloc, Free, Assign, AssignAdd,
        IndexWriteNull, IndexWriteChar,
        StrCpy, StrCat, StrNCpy, StrNCat, MemCpy,
        ReadPtr, ReadIndex, StrLen,
        Literal,      // x = "..." (len chars)
        Realloc,      // x = realloc(y, e)
        StrCmp,       // strcmp/strncmp(x, y[, e])
        StrChr,       // strchr/strrchr(x, c)
        StrStr,       // x = strstr/strtok(y, z); y in `y`, z in `z`
        CharDecl,     // char x[k];  (initialized ? terminator at k)
        If, While,
    };
    Kind kind;
    std::string x, y, z;
    Extent extent;
    std::uint64_t len = 0; // literal length / array element count
    bool initialized = false;
    int line = 0;
    std::vector<SourceStmt> body;      // If: then-arm; While: loop body
    std::vector<SourceStmt> else_body; // If only
};

struct SourceProgram {
    std::vector<std::string> pointers;
    std::vector<SourceStmt> stmts;
};

namespace detail {

struct Cursor {
    std::string_view s;
    std::size_t pos = 0;
    int line;

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool eat(std::string_view lit) {
        skip_ws();
        if (s.substr(pos, lit.size()) == lit) {
            pos += lit.size();
            return true;
        }
        return false;
    }
    void expect(std::string_view lit) {
        if (!eat(lit))
            throw SyntaxError(line, "expected '" + std::string(lit) + "'");
    }
    bool at_end() {
        skip_ws();
        return pos >= s.size();
    }
    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            ++pos;
        if (pos == start) throw SyntaxError(line, "expected identifier");
        return std::string(s.substr(start, pos - start));
    }
    std::uint64_t number() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
            ++pos;
        if (pos == start) throw SyntaxError(line, "expected number");
        return std::stoull(std::string(s.substr(start, pos - start)));
    }
    void expect_end() {
        eat(";");
        skip_ws();
        if (pos < s.size())
            throw SyntaxError(line, "trailing input: '" +
                                        std::string(s.substr(pos)) + "'");
    }
};

inline Extent parse_extent(Cursor& c) {
    c.skip_ws();
    if (c.eat("?")) return Extent::unknown();
    if (c.pos < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.pos])))
        return Extent::constant(c.number());
    c.ident(); // range-analysed variable; only its range matters
    c.expect("@range(");
    std::uint64_t lo = c.number();
    c.expect(",");
    std::uint64_t hi = c.number();
    c.expect(")");
    if (lo > hi) throw SyntaxError(c.line, "empty range");
    return Extent::range(lo, hi);
}

inline std::uint64_t parse_string_lit(Cursor& c) {
    c.expect("\"");
    std::uint64_t len = 0;
    while (c.pos < c.s.size() && c.s[c.pos] != '"') {
        ++len;
        ++c.pos;
    }
    if (c.pos >= c.s.size()) throw SyntaxError(c.line, "unterminated string");
    ++c.pos;
    return len;
}

struct Parser {
    std::istream& in;
    int line_no = 0;
    std::set<std::string> declared;
    SourceProgram prog;

    explicit Parser(std::istream& in) : in(in) {}

    void require_declared(const std::string& name, int line) {
        if (!declared.count(name)) throw UndeclaredPointer(name, line);
    }

    void declare(const std::string& name) {
        if (declared.insert(name).second) prog.pointers.push_back(name);
    }

    // Returns false at a closing brace (consumed by the caller's logic).
    bool next_line(std::string& out) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            std::size_t b = raw.find_first_not_of(" \t\r");
            if (b == std::string::npos) continue;
            std::size_t e = raw.find_last_not_of(" \t\r");
            out = raw.substr(b, e - b + 1);
            return true;
        }
        return false;
    }

    // depth > 0 means inside braces; returns when the matching '}' (or the
    // '} else {' pivot) is read. `stop` receives what ended the block.
    enum class BlockEnd { Eof, Close, ElsePivot };

    BlockEnd parse_block(std::vector<SourceStmt>& out, bool nested) {
        std::string text;
        while (next_line(text)) {
            if (text == "}" || text == "};") {
                if (!nested) throw SyntaxError(line_no, "unmatched '}'");
                return BlockEnd::Close;
            }
            if (text == "} else {") {
                if (!nested) throw SyntaxError(line_no, "unmatched '}'");
                return BlockEnd::ElsePivot;
            }
            parse_stmt_line(text, out);
        }
        if (nested) throw SyntaxError(line_no, "unterminated block");
        return BlockEnd::Eof;
    }

    void parse_stmt_line(const std::string& text, std::vector<SourceStmt>& out) {
        Cursor c{text, 0, line_no};
        SourceStmt s;
        s.line = line_no;

        if (c.eat("ptr ") || c.eat("ptr\t")) {
            declare(c.ident());
            while (c.eat(",")) declare(c.ident());
            c.expect_end();
            return;
        }
        if (c.eat("if (*)") || c.eat("if(*)")) {
            c.expect("{");
            c.expect_end();
            s.kind = SourceStmt::Kind::If;
            BlockEnd end = parse_block(s.body, true);
            if (end == BlockEnd::ElsePivot) {
                if (parse_block(s.else_body, true) != BlockEnd::Close)
                    throw SyntaxError(line_no, "unterminated else");
            } else if (end != BlockEnd::Close) {
                throw SyntaxError(line_no, "unterminated if");
            }
            out.push_back(std::move(s));
            return;
        }
        if (c.eat("while (*)") || c.eat("while(*)")) {
            c.expect("{");
            c.expect_end();
            s.kind = SourceStmt::Kind::While;
            if (parse_block(s.body, true) != BlockEnd::Close)
                throw SyntaxError(line_no, "unterminated while");
            out.push_back(std::move(s));
            return;
        }
        if (c.eat("free(")) {
            s.kind = SourceStmt::Kind::Free;
            s.x = c.ident();
            require_declared(s.x, s.line);
            c.expect(")");
            c.expect_end();
            out.push_back(std::move(s));
            return;
        }
        if (c.eat("read ") || c.eat("read\t")) {
            s.x = c.ident();
            require_declared(s.x, s.line);
            if (c.eat("[")) {
                s.kind = SourceStmt::Kind::ReadIndex;
                s.extent = parse_extent(c);
                c.expect("]");
            } else {
                s.kind = SourceStmt::Kind::ReadPtr;
            }
            c.expect_end();
            out.push_back(std::move(s));
            return;
        }
        if (c.eat("strlen(")) {
            s.kind = SourceStmt::Kind::StrLen;
            s.x = c.ident();
            require_declared(s.x, s.line);
            c.expect(")");
            c.expect_end();
            out.push_back(std::move(s));
            return;
        }
        for (auto [name, kind] :
             {std::pair{"strcpy(", SourceStmt::Kind::StrCpy},
              {"strcat(", SourceStmt::Kind::StrCat}}) {
            if (c.eat(name)) {
                s.kind = kind;
                s.x = c.ident();
                require_declared(s.x, s.line);
                c.expect(",");
                s.y = c.ident();
                require_declared(s.y, s.line);
                c.expect(")");
                c.expect_end();
                out.push_back(std::move(s));
                return;
            }
        }
        for (auto [name, kind] :
             {std::pair{"strncpy(", SourceStmt::Kind::StrNCpy},
              {"strncat(", SourceStmt::Kind::StrNCat},
              {"memcpy(", SourceStmt::Kind::MemCpy}}) {
            if (c.eat(name)) {
                s.kind = kind;
                s.x = c.ident();
                require_declared(s.x, s.line);
                c.expect(",");
                s.y = c.ident();
                require_declared(s.y, s.line);
                c.expect(",");
                s.extent = parse_extent(c);
                c.expect(")");
                c.expect_end();
                out.push_back(std::move(s));
                return;
            }
        }
        for (const char* name : {"strncmp(", "strcmp("}) {
            if (c.eat(name)) {
                s.kind = SourceStmt::Kind::StrCmp;
                s.x = c.ident();
                require_declared(s.x, s.line);
                c.expect(",");
                s.y = c.ident();
                require_declared(s.y, s.line);
                if (c.eat(",")) parse_extent(c); // length cap is irrelevant
                c.expect(")");
                c.expect_end();
                out.push_back(std::move(s));
                return;
            }
        }
        for (const char* name : {"strrchr(", "strchr("}) {
            if (c.eat(name)) {
                s.kind = SourceStmt::Kind::StrChr;
                s.x = c.ident();
                require_declared(s.x, s.line);
                if (c.eat(",")) c.ident(); // searched character
                c.expect(")");
                c.expect_end();
                out.push_back(std::move(s));
                return;
            }
        }
        if (c.eat("char ") || c.eat("char\t")) {
            s.kind = SourceStmt::Kind::CharDecl;
            s.x = c.ident();
            c.expect("[");
            s.len = c.number();
            c.expect("]");
            if (c.eat("=")) {
                s.initialized = true;
                c.skip_ws();
                if (c.pos < c.s.size() && c.s[c.pos] == '"') {
                    // terminator lands at the literal's length (capped at
                    // the array size)
                    std::uint64_t lit = parse_string_lit(c);
                    s.extent = Extent::constant(std::min(lit, s.len));
                } else {
                    c.expect("{");
                    while (c.pos < c.s.size() && c.s[c.pos] != '}') ++c.pos;
                    c.expect("}");
                    s.extent = Extent::constant(s.len);
                }
            }
            c.expect_end();
            declare(s.x);
            out.push_back(std::move(s));
            return;
        }
        if (c.eat("*(")) {
            s.x = c.ident();
            require_declared(s.x, s.line);
            c.expect("+");
            s.extent = parse_extent(c);
            c.expect(")");
            c.expect("=");
            parse_write_rhs(c, s);
            out.push_back(std::move(s));
            return;
        }

        // ident-leading statements
        s.x = c.ident();
        if (c.eat("[")) {
            require_declared(s.x, s.line);
            s.extent = parse_extent(c);
            c.expect("]");
            c.expect("=");
            parse_write_rhs(c, s);
            out.push_back(std::move(s));
            return;
        }
        c.expect("=");
        require_declared(s.x, s.line);
        c.skip_ws();
        if (c.eat("malloc(")) {
            s.kind = SourceStmt::Kind::Malloc;
            s.extent = parse_extent(c);
            c.expect(")");
            c.expect_end();
            out.push_back(std::move(s));
            return;
        }
        if (c.eat("calloc(")) {
            s.kind = SourceStmt::Kind::Calloc;
            s.extent = parse_extent(c);
            c.expect(")");
            c.expect_end();
            out.push_back(std::move(s));
            return;
        }
        if (c.eat("realloc(")) {
            s.kind = SourceStmt::Kind::Realloc;
            s.y = c.ident();
            require_declared(s.y, s.line);
            c.expect(",");
            s.extent = parse_extent(c);
            c.expect(")");
            c.expect_end();
            out.push_back(std::move(s));
            return;
        }
        for (const char* name : {"strstr(", "strtok("}) {
            if (c.eat(name)) {
                s.kind = SourceStmt::Kind::StrStr;
                s.y = c.ident();
                require_declared(s.y, s.line);
                c.expect(",");
                s.z = c.ident();
                require_declared(s.z, s.line);
                c.expect(")");
                c.expect_end();
                out.push_back(std::move(s));
                return;
            }
        }
        c.skip_ws();
        if (c.pos < c.s.size() && c.s[c.pos] == '"') {
            s.kind = SourceStmt::Kind::Literal;
            s.len = parse_string_lit(c);
            c.expect_end();
            out.push_back(std::move(s));
            return;
        }
        s.y = c.ident();
        require_declared(s.y, s.line);
        if (c.eat("+")) {
            s.kind = SourceStmt::Kind::AssignAdd;
            s.extent = parse_extent(c);
        } else {
            s.kind = SourceStmt::Kind::Assign;
        }
        c.expect_end();
        out.push_back(std::move(s));
    }

    static void parse_write_rhs(Cursor& c, SourceStmt& s) {
        if (c.eat("null") || c.eat("'\\0'")) {
            s.kind = SourceStmt::Kind::IndexWriteNull;
        } else if (c.eat("char")) {
            s.kind = SourceStmt::Kind::IndexWriteChar;
        } else if (c.eat("'")) {
            // any quoted single character other than '\0'
            while (c.pos < c.s.size() && c.s[c.pos] != '\'') ++c.pos;
            c.expect("'");
            s.kind = SourceStmt::Kind::IndexWriteChar;
        } else {
            throw SyntaxError(c.line, "expected null or char on right-hand side");
        }
        c.expect_end();
    }
};

} // namespace detail

inline SourceProgram parse(std::istream& in) {
    detail::Parser p(in);
    p.parse_block(p.prog.stmts, false);
    return p.prog;
}

inline SourceProgram parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

// ---- Desugaring into a CFG of core statements ----

struct Program {
    Cfg cfg;
    std::vector<std::string> pointers;
    std::vector<BufferId> buffers; // allocation sites, in statement order
};

namespace detail {

struct LoopCtx {
    std::set<std::string> assigned; // pointers reassigned in the body
    std::vector<std::uint32_t> shifts; // AssignAdd node ids in the body
};

struct Builder {
    Cfg cfg;
    std::uint32_t next_id = 0;
    std::vector<LoopCtx> loops;
    std::map<std::uint32_t, std::string> shift_sources;
    std::vector<Stmt*> all; // for post-pass flag fixup

    std::uint32_t emit(StmtKind kind, const SourceStmt& src, std::string x = {},
                       std::string y = {}, Extent e = Extent::constant(0)) {
        Stmt st;
        st.id = next_id++;
        st.kind = kind;
        st.x = std::move(x);
        st.y = std::move(y);
        st.extent = e;
        st.line = src.line;
        st.in_loop = !loops.empty();
        std::uint32_t id = cfg.add_node(st);
        if (!st.x.empty() &&
            (kind == StmtKind::Malloc || kind == StmtKind::Calloc ||
             kind == StmtKind::Assign || kind == StmtKind::AssignAdd))
            for (LoopCtx& l : loops) l.assigned.insert(st.x);
        if (kind == StmtKind::AssignAdd) {
            for (LoopCtx& l : loops) l.shifts.push_back(id);
            shift_sources[id] = st.y;
        }
        return id;
    }

    using Frontier = std::vector<std::uint32_t>;

    void link(const Frontier& from, std::uint32_t to) {
        for (std::uint32_t f : from) cfg.add_edge(f, to);
    }

    Frontier emit_seq(const std::vector<SourceStmt>& stmts, Frontier frontier) {
        for (const SourceStmt& s : stmts) frontier = emit_stmt(s, frontier);
        return frontier;
    }

    Frontier chain(std::initializer_list<std::uint32_t> ids, Frontier frontier) {
        for (std::uint32_t id : ids) {
            link(frontier, id);
            frontier = {id};
        }
        return frontier;
    }

    Frontier emit_stmt(const SourceStmt& s, Frontier frontier) {
        using K = SourceStmt::Kind;
        switch (s.kind) {
        case K::Malloc:
            return chain({emit(StmtKind::Malloc, s, s.x, {}, s.extent)}, frontier);
        case K::Calloc:
            return chain({emit(StmtKind::Calloc, s, s.x, {}, s.extent)}, frontier);
        case K::Free:
            return chain({emit(StmtKind::Free, s, s.x)}, frontier);
        case K::Assign:
            return chain({emit(StmtKind::Assign, s, s.x, s.y)}, frontier);
        case K::AssignAdd:
            return chain({emit(StmtKind::AssignAdd, s, s.x, s.y, s.extent)},
                         frontier);
        case K::IndexWriteNull:
            return chain({emit(StmtKind::IndexWriteNull, s, s.x, {}, s.extent)},
                         frontier);
        case K::IndexWriteChar:
            return chain({emit(StmtKind::IndexWriteChar, s, s.x, {}, s.extent)},
                         frontier);
        case K::StrCpy:
            return chain({emit(StmtKind::StrCpy, s, s.x, s.y)}, frontier);
        case K::StrCat:
            return chain({emit(StmtKind::StrCat, s, s.x, s.y)}, frontier);
        case K::StrNCpy:
            return chain({emit(StmtKind::StrNCpy, s, s.x, s.y, s.extent)},
                         frontier);
        case K::StrNCat:
            return chain({emit(StmtKind::StrNCat, s, s.x, s.y, s.extent)},
                         frontier);
        case K::MemCpy:
            return chain({emit(StmtKind::MemCpy, s, s.x, s.y, s.extent)},
                         frontier);
        case K::ReadPtr:
            return chain({emit(StmtKind::ReadPtr, s, s.x)}, frontier);
        case K::ReadIndex:
            return chain({emit(StmtKind::ReadIndex, s, s.x, {}, s.extent)},
                         frontier);
        case K::StrLen:
            return chain({emit(StmtKind::StrLen, s, s.x)}, frontier);
        case K::Literal:
            return chain({emit(StmtKind::Malloc, s, s.x, {},
                               Extent::constant(s.len)),
                          emit(StmtKind::IndexWriteNull, s, s.x, {},
                               Extent::constant(s.len))},
                         frontier);
        case K::Realloc:
            return chain({emit(StmtKind::Malloc, s, s.x, {}, s.extent),
                          emit(StmtKind::StrCpy, s, s.x, s.y)},
                         frontier);
        case K::StrCmp:
            return chain({emit(StmtKind::StrLen, s, s.x),
                          emit(StmtKind::StrLen, s, s.y)},
                         frontier);
        case K::StrChr:
            return chain({emit(StmtKind::StrLen, s, s.x)}, frontier);
        case K::StrStr:
            return chain({emit(StmtKind::StrLen, s, s.y),
                          emit(StmtKind::StrLen, s, s.z),
                          emit(StmtKind::Malloc, s, s.x, {}, Extent::unknown())},
                         frontier);
        case K::CharDecl:
            if (s.initialized)
                return chain({emit(StmtKind::Malloc, s, s.x, {},
                                   Extent::constant(s.len)),
                              emit(StmtKind::IndexWriteNull, s, s.x, {},
                                   s.extent)},
                             frontier);
            return chain({emit(StmtKind::Malloc, s, s.x, {},
                               Extent::constant(s.len))},
                         frontier);
        case K::If: {
            Frontier out;
            Frontier t = emit_seq(s.body, frontier);
            Frontier e = emit_seq(s.else_body, frontier);
            if (s.body.empty() && s.else_body.empty()) return frontier;
            out.insert(out.end(), t.begin(), t.end());
            for (std::uint32_t id : e)
                if (std::find(out.begin(), out.end(), id) == out.end())
                    out.push_back(id);
            return out;
        }
        case K::While: {
            // Header node with a forward exit edge; the body re-enters it
            // through latch back edges.
            std::uint32_t header = emit(StmtKind::Nop, s);
            cfg.node_mut(header).loop_header = true;
            link(frontier, header);
            loops.push_back({});
            Frontier tails = emit_seq(s.body, {header});
            LoopCtx ctx = std::move(loops.back());
            loops.pop_back();
            for (std::uint32_t id : ctx.shifts)
                if (ctx.assigned.count(shift_sources.at(id)))
                    loop_variant_ids.insert(id);
            for (std::uint32_t t : tails)
                if (t != header) cfg.add_edge(t, header); // latch
            return {header};
        }
        }
        return frontier;
    }

    std::set<std::uint32_t> loop_variant_ids;
};

} // namespace detail

inline Program desugar(const SourceProgram& src) {
    detail::Builder b;
    SourceStmt entry_src;
    entry_src.line = 0;
    std::uint32_t entry = b.emit(StmtKind::Nop, entry_src);
    b.cfg.set_entry(entry);
    detail::Builder::Frontier tail = b.emit_seq(src.stmts, {entry});
    std::uint32_t exit = b.emit(StmtKind::Nop, entry_src);
    b.link(tail, exit);

    Program p;
    p.cfg = std::move(b.cfg);
    p.pointers = src.pointers;
    for (const Stmt& s : p.cfg.nodes())
        if (s.allocates()) p.buffers.push_back(BufferId::site(s.id));
    // Post-pass: mark loop-variant pointer shifts (x = y + i where y is
    // itself reassigned inside an enclosing loop body).
    for (std::uint32_t id : b.loop_variant_ids)
        p.cfg.node_mut(id).shift_src_loop_variant = true;
    return p;
}

inline Program load_program(const std::string& text) {
    return desugar(parse(text));
}

} // namespace nullscan
