#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nullscan/lattice.hpp"

// Core statement representation and the control flow graph. One statement
// per node; compound surface constructs are desugared before construction.

namespace nullscan {

// A compile-time extent: a constant, a range from a prior range analysis,
// or unknown.
struct Extent {
    enum class Kind { Const, Range, Unknown } kind = Kind::Unknown;
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    static Extent constant(std::uint64_t n) { return {Kind::Const, n, n}; }
    static Extent range(std::uint64_t lo, std::uint64_t hi) {
        return {Kind::Range, lo, hi};
    }
    static Extent unknown() { return {Kind::Unknown, 0, 0}; }

    bool is_const() const { return kind == Kind::Const; }

    friend bool operator==(const Extent&, const Extent&) = default;

    std::string str() const {
        switch (kind) {
        case Kind::Const: return std::to_string(lo);
        case Kind::Range:
            return "@range(" + std::to_string(lo) + "," + std::to_string(hi) + ")";
        case Kind::Unknown: return "?";
        }
        return "?";
    }
};

enum class ExtentCtx { Alloc, IndexOrShift };

// Low limit for allocations, high limit for indices and pointer shifts,
// infinity when nothing is known.
inline Size resolve_extent(const Extent& e, ExtentCtx ctx) {
    switch (e.kind) {
    case Extent::Kind::Const: return Size::finite(e.lo);
    case Extent::Kind::Range:
        return Size::finite(ctx == ExtentCtx::Alloc ? e.lo : e.hi);
    case Extent::Kind::Unknown: return Size::inf();
    }
    return Size::inf();
}

enum class StmtKind {
    Nop,
    Malloc,
    Calloc,
    Free,
    Assign,        // x = y
    AssignAdd,     // x = y + e
    IndexWriteNull, // x[e] = null
    IndexWriteChar, // x[e] = char
    StrCpy,
    StrCat,
    StrNCpy,
    StrNCat,
    MemCpy,
    ReadPtr,
    ReadIndex,
    StrLen,
};

struct Stmt {
    std::uint32_t id = 0;
    StmtKind kind = StmtKind::Nop;
    std::string x; // destination / subject pointer
    std::string y; // source pointer, if any
    Extent extent; // size / index / shift / length, if any
    int line = 0;  // source line
    bool in_loop = false; // lexically inside a while body
    // For x = y + i inside a loop: y is itself reassigned in that loop body,
    // so the offset drifts across iterations.
    bool shift_src_loop_variant = false;
    bool loop_header = false; // synthetic while-header node

    bool allocates() const {
        return kind == StmtKind::Malloc || kind == StmtKind::Calloc;
    }

    bool has_source_ptr() const {
        switch (kind) {
        case StmtKind::Assign:
        case StmtKind::AssignAdd:
        case StmtKind::StrCpy:
        case StmtKind::StrCat:
        case StmtKind::StrNCpy:
        case StmtKind::StrNCat:
        case StmtKind::MemCpy: return true;
        default: return false;
        }
    }
};

struct IrregularCfg : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CycleDetected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// Control flow graph over statements. Node ids are statement ids; the entry
// node is a synthetic Nop carrying the boundary state.
class Cfg {
public:
    std::uint32_t add_node(Stmt s) {
        std::uint32_t id = s.id;
        index_[id] = nodes_.size();
        nodes_.push_back(std::move(s));
        succs_[id];
        preds_[id];
        return id;
    }

    void add_edge(std::uint32_t from, std::uint32_t to) {
        succs_[from].push_back(to);
        preds_[to].push_back(from);
        ++num_edges_;
    }

    void set_entry(std::uint32_t id) { entry_ = id; }
    std::uint32_t entry() const { return entry_; }

    const std::vector<Stmt>& nodes() const { return nodes_; }
    const Stmt& node(std::uint32_t id) const { return nodes_[index_.at(id)]; }
    Stmt& node_mut(std::uint32_t id) { return nodes_[index_.at(id)]; }
    std::size_t num_edges() const { return num_edges_; }

    const std::vector<std::uint32_t>& succs(std::uint32_t id) const {
        return succs_.at(id);
    }
    const std::vector<std::uint32_t>& preds(std::uint32_t id) const {
        return preds_.at(id);
    }

private:
    std::vector<Stmt> nodes_;
    std::map<std::uint32_t, std::size_t> index_;
    std::map<std::uint32_t, std::vector<std::uint32_t>> succs_;
    std::map<std::uint32_t, std::vector<std::uint32_t>> preds_;
    std::uint32_t entry_ = 0;
    std::size_t num_edges_ = 0;
};

namespace detail {

inline void dfs_back_edges(const Cfg& g, std::uint32_t n,
                           std::map<std::uint32_t, int>& color,
                           std::vector<Edge>& back) {
    color[n] = 1; // on stack
    for (std::uint32_t s : g.succs(n)) {
        auto it = color.find(s);
        if (it == color.end()) {
            dfs_back_edges(g, s, color, back);
        } else if (it->second == 1) {
            back.push_back({n, s});
        }
    }
    color[n] = 2;
}

} // namespace detail

// Retreating edges of a depth-first traversal from the entry. On the
// structured CFGs the frontend emits these are exactly the loop latch edges.
inline std::vector<Edge> find_back_edges(const Cfg& g) {
    std::map<std::uint32_t, int> color;
    std::vector<Edge> back;
    detail::dfs_back_edges(g, g.entry(), color, back);
    return back;
}

// Topological order of the graph with the given edges removed; entry first.
// Throws CycleDetected if a cycle survives the removal.
inline std::vector<std::uint32_t> topo_order(const Cfg& g,
                                             const std::vector<Edge>& removed = {}) {
    auto is_removed = [&](std::uint32_t a, std::uint32_t b) {
        for (const Edge& e : removed)
            if (e.first == a && e.second == b) return true;
        return false;
    };
    std::map<std::uint32_t, std::size_t> indeg;
    for (const Stmt& s : g.nodes()) indeg[s.id] = 0;
    for (const Stmt& s : g.nodes())
        for (std::uint32_t t : g.succs(s.id))
            if (!is_removed(s.id, t)) ++indeg[t];

    // Kahn's algorithm; ties broken by statement id for determinism.
    std::set<std::uint32_t> ready;
    for (auto& [id, d] : indeg)
        if (d == 0) ready.insert(id);
    std::vector<std::uint32_t> order;
    while (!ready.empty()) {
        std::uint32_t n = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(n);
        for (std::uint32_t t : g.succs(n)) {
            if (is_removed(n, t)) continue;
            if (--indeg[t] == 0) ready.insert(t);
        }
    }
    if (order.size() != g.nodes().size())
        throw CycleDetected("cycle remains after back-edge removal");
    if (!order.empty() && order.front() != g.entry())
        throw IrregularCfg("entry is not first in topological order");
    return order;
}

// Convenience: back edges plus validation that their removal leaves a DAG.
inline std::vector<Edge> find_back_edges_checked(const Cfg& g) {
    std::vector<Edge> back = find_back_edges(g);
    try {
        topo_order(g, back);
    } catch (const CycleDetected&) {
        throw IrregularCfg("irreducible control flow");
    }
    return back;
}

} // namespace nullscan
