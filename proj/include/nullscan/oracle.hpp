#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nullscan/detect.hpp"
#include "nullscan/ir.hpp"

// Concrete small-step interpreter used as a ground truth for the analyzer.
// A buffer of declared size s has s + 1 addressable cells (indices 0..s);
// anything outside that range is an overflow event. Reads record an event
// and continue; writes record an event and abandon the rest of the
// offending operation. The interpreter never looks at analysis results.

namespace nullscan {

struct OracleEvent {
    std::uint32_t stmt_id = 0;
    bool is_write = false;

    friend auto operator<=>(const OracleEvent&, const OracleEvent&) = default;
};

struct RunReport {
    std::vector<OracleEvent> events;
    bool completed = true;
};

struct PathChoices {
    std::vector<bool> bits; // consumed left to right, false when exhausted
    std::map<std::uint32_t, std::uint64_t> extents; // per-site concrete values
    unsigned loop_bound = 8;

    std::size_t next = 0;
    bool take() { return next < bits.size() ? bits[next++] : false; }
};

namespace oracle_detail {

constexpr std::int64_t kNoNull = -1;

struct ConcreteBuffer {
    std::int64_t size = 0;          // cells 0..size are addressable
    std::vector<bool> null_at;      // size + 1 cells
};

struct PtrVal {
    std::size_t buf; // index into heap
    std::int64_t off;
};

struct Heap {
    std::vector<ConcreteBuffer> buffers;
    std::map<std::string, std::optional<PtrVal>> env;
};

} // namespace oracle_detail

class Interpreter {
public:
    Interpreter(const Cfg& g, PathChoices choices)
        : g_(g), choices_(std::move(choices)), back_(find_back_edges(g)) {}

    RunReport run() {
        std::uint32_t cur = g_.entry();
        std::size_t steps = 0;
        const std::size_t max_steps =
            g_.nodes().size() * (choices_.loop_bound + 2) *
                (choices_.loop_bound + 2) +
            64;
        while (true) {
            if (++steps > max_steps) {
                report_.completed = false;
                return report_;
            }
            exec(g_.node(cur));
            std::optional<std::uint32_t> nxt = advance(cur);
            if (!nxt) return report_;
            cur = *nxt;
        }
    }

private:
    const Cfg& g_;
    PathChoices choices_;
    std::vector<Edge> back_;
    oracle_detail::Heap heap_;
    std::map<std::uint32_t, unsigned> iters_;
    RunReport report_;

    using PtrVal = oracle_detail::PtrVal;

    void event(const Stmt& n, bool is_write) {
        report_.events.push_back({n.id, is_write});
    }

    std::uint64_t extent_value(const Stmt& n) const {
        auto it = choices_.extents.find(n.id);
        if (it != choices_.extents.end()) return it->second;
        return n.extent.lo; // constants; a missing choice defaults to lo
    }

    bool is_back(std::uint32_t a, std::uint32_t b) const {
        for (const Edge& e : back_)
            if (e.first == a && e.second == b) return true;
        return false;
    }

    std::optional<std::uint32_t> advance(std::uint32_t cur) {
        const auto& succs = g_.succs(cur);
        if (succs.empty()) return std::nullopt;
        // A latch re-enters its loop unconditionally.
        for (std::uint32_t s : succs)
            if (is_back(cur, s)) return s;
        std::vector<std::uint32_t> fwd(succs.begin(), succs.end());
        if (fwd.size() == 1) return fwd[0];
        if (g_.node(cur).loop_header) {
            // Successors: loop-body entries first, the loop exit last.
            if (iters_[cur] >= choices_.loop_bound || !choices_.take()) {
                iters_[cur] = 0;
                return fwd.back();
            }
            ++iters_[cur];
            fwd.pop_back();
        }
        std::size_t idx = 0;
        while (idx + 1 < fwd.size() && !choices_.take()) ++idx;
        return fwd[idx];
    }

    std::optional<PtrVal> lookup(const std::string& x) const {
        auto it = heap_.env.find(x);
        return it == heap_.env.end() ? std::nullopt : it->second;
    }

    oracle_detail::ConcreteBuffer& buf(const PtrVal& p) {
        return heap_.buffers[p.buf];
    }

    bool in_bounds(const PtrVal& p, std::int64_t idx) {
        return idx >= 0 && idx <= buf(p).size;
    }

    // First null at or after p.off; kNoNull if the scan leaves the buffer.
    std::int64_t scan_null(const PtrVal& p) {
        if (p.off < 0 || p.off > buf(p).size) return oracle_detail::kNoNull;
        for (std::int64_t i = p.off; i <= buf(p).size; ++i)
            if (buf(p).null_at[static_cast<std::size_t>(i)]) return i;
        return oracle_detail::kNoNull;
    }

    void allocate(const Stmt& n, bool zeroed) {
        oracle_detail::ConcreteBuffer b;
        b.size = static_cast<std::int64_t>(extent_value(n));
        b.null_at.assign(static_cast<std::size_t>(b.size) + 1, zeroed);
        heap_.buffers.push_back(std::move(b));
        heap_.env[n.x] = PtrVal{heap_.buffers.size() - 1, 0};
    }

    // Write one cell; returns false (and records the event) on overflow.
    bool write_cell(const Stmt& n, const PtrVal& p, std::int64_t idx, bool null) {
        if (!in_bounds(p, idx)) {
            event(n, true);
            return false;
        }
        buf(p).null_at[static_cast<std::size_t>(idx)] = null;
        return true;
    }

    void exec(const Stmt& n) {
        switch (n.kind) {
        case StmtKind::Nop: return;
        case StmtKind::Malloc: allocate(n, false); return;
        case StmtKind::Calloc: allocate(n, true); return;
        case StmtKind::Free: {
            auto p = lookup(n.x);
            if (!p) return event(n, true);
            buf(*p).size = 0; // tombstone: cells stay, capacity is gone
            return;
        }
        case StmtKind::Assign:
            heap_.env[n.x] = lookup(n.y);
            return;
        case StmtKind::AssignAdd: {
            auto p = lookup(n.y);
            if (!p) {
                heap_.env[n.x] = std::nullopt;
                return;
            }
            heap_.env[n.x] =
                PtrVal{p->buf, p->off + static_cast<std::int64_t>(extent_value(n))};
            return;
        }
        case StmtKind::IndexWriteNull:
        case StmtKind::IndexWriteChar: {
            auto p = lookup(n.x);
            if (!p) return event(n, true);
            write_cell(n, *p, p->off + static_cast<std::int64_t>(extent_value(n)),
                       n.kind == StmtKind::IndexWriteNull);
            return;
        }
        case StmtKind::StrCpy:
        case StmtKind::StrCat:
        case StmtKind::StrNCpy:
        case StmtKind::StrNCat:
            exec_strfun(n);
            return;
        case StmtKind::MemCpy:
            exec_memcpy(n);
            return;
        case StmtKind::ReadPtr:
        case StmtKind::StrLen: {
            auto p = lookup(n.x);
            if (!p) return event(n, false);
            if (scan_null(*p) == oracle_detail::kNoNull) event(n, false);
            return;
        }
        case StmtKind::ReadIndex: {
            auto p = lookup(n.x);
            if (!p) return event(n, false);
            if (!in_bounds(*p, p->off + static_cast<std::int64_t>(extent_value(n))))
                event(n, false);
            return;
        }
        }
    }

    void exec_strfun(const Stmt& n) {
        const bool cat = n.kind == StmtKind::StrCat || n.kind == StmtKind::StrNCat;
        const bool capped =
            n.kind == StmtKind::StrNCpy || n.kind == StmtKind::StrNCat;
        auto py = lookup(n.y);
        if (!py) return event(n, false);
        auto px = lookup(n.x);
        if (!px) return event(n, true);

        std::int64_t src_null = scan_null(*py);
        if (src_null == oracle_detail::kNoNull) return event(n, false);
        std::int64_t len = src_null - py->off;

        std::int64_t copy_pos = px->off;
        if (cat) {
            std::int64_t dst_null = scan_null(*px);
            if (dst_null == oracle_detail::kNoNull) return event(n, false);
            copy_pos = dst_null;
        }

        // Length-limited copies write min(m + 1, len) characters and then a
        // terminator, mirroring the analyzed semantics of strncpy/strncat.
        std::int64_t chars = len;
        if (capped) {
            std::int64_t m = static_cast<std::int64_t>(extent_value(n));
            chars = std::min(m + 1, len);
        }
        for (std::int64_t k = 0; k < chars; ++k) {
            bool null = buf(*py).null_at[static_cast<std::size_t>(py->off + k)];
            if (!write_cell(n, *px, copy_pos + k, null)) return;
        }
        write_cell(n, *px, copy_pos + chars, true);
    }

    void exec_memcpy(const Stmt& n) {
        auto py = lookup(n.y);
        if (!py) return event(n, false);
        auto px = lookup(n.x);
        if (!px) return event(n, true);
        std::int64_t m = static_cast<std::int64_t>(extent_value(n));
        // The copied block is the inclusive cell range [off, off + m].
        if (py->off < 0 || py->off + m > buf(*py).size) return event(n, false);
        for (std::int64_t k = 0; k <= m; ++k) {
            bool null = buf(*py).null_at[static_cast<std::size_t>(py->off + k)];
            if (!write_cell(n, *px, px->off + k, null)) return;
        }
    }
};

inline RunReport interpret(const Cfg& g, PathChoices choices) {
    return Interpreter(g, std::move(choices)).run();
}

// ---- Soundness check against analyzer diagnostics ----

struct SoundnessVerdict {
    bool pass = true;
    std::string detail; // first counterexample description, empty on pass
    std::uint32_t failing_stmt = 0;
    std::size_t failing_trial = 0;
};

// A concrete write overflow at statement n must be covered by a diagnostic
// at or before n (in topological order); a concrete read overflow must be
// diagnosed at n itself.
inline SoundnessVerdict check_coverage(const Cfg& g,
                                       const std::vector<Diagnostic>& diags,
                                       const RunReport& report,
                                       std::size_t trial) {
    std::vector<Edge> back = find_back_edges_checked(g);
    std::vector<std::uint32_t> order = topo_order(g, back);
    std::map<std::uint32_t, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;

    std::set<std::uint32_t> diag_at;
    for (const Diagnostic& d : diags) diag_at.insert(d.stmt_id);
    SoundnessVerdict v;
    for (const OracleEvent& e : report.events) {
        bool covered;
        if (e.is_write) {
            covered = false;
            for (const Diagnostic& d : diags)
                if (pos.at(d.stmt_id) <= pos.at(e.stmt_id)) covered = true;
        } else {
            covered = diag_at.count(e.stmt_id) > 0;
        }
        if (!covered) {
            v.pass = false;
            v.failing_stmt = e.stmt_id;
            v.failing_trial = trial;
            v.detail = std::string(e.is_write ? "write" : "read") +
                       " overflow at statement " + std::to_string(e.stmt_id) +
                       " (line " + std::to_string(g.node(e.stmt_id).line) +
                       ") not covered by any diagnostic";
            return v;
        }
    }
    return v;
}

} // namespace nullscan
