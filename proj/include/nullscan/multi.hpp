#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "nullscan/detect.hpp"
#include "nullscan/solver.hpp"
#include "nullscan/transfer.hpp"

// Multi-pointee mode: a pointer may point to several buffers, each with at
// most one offset. Rows are partial maps; an absent buffer means "never
// points there", a present entry with an infinite offset means "may point
// there at an unknown offset", and the empty row means the pointer may be
// uninitialized. There is no undefined buffer in this mode.
//
// On pointers with exactly one pointee the transfer routes through the
// single-pointee flow functions, so the two modes coincide on such
// programs. Genuinely multi-pointee rows use the min/max approximation
// (longest source string, smallest destination size, farthest copy
// position) with a single shared result set for all destinations.

namespace nullscan {

struct MultiPtrEntry {
    Size offset = Size::inf();
    bool exact = false;

    friend bool operator==(const MultiPtrEntry&, const MultiPtrEntry&) = default;
};

using MultiRow = std::map<BufferId, MultiPtrEntry>;

class MultiPointerMap {
public:
    void declare(const Pointer& x) { rows_.emplace(x, MultiRow{}); }

    const MultiRow& at(const Pointer& x) const {
        static const MultiRow empty;
        auto it = rows_.find(x);
        return it == rows_.end() ? empty : it->second;
    }

    void set(const Pointer& x, MultiRow row) { rows_[x] = std::move(row); }

    const std::map<Pointer, MultiRow>& rows() const { return rows_; }

    friend bool operator==(const MultiPointerMap&, const MultiPointerMap&) = default;

private:
    std::map<Pointer, MultiRow> rows_;
};

struct MultiState {
    BufferMap alpha;
    MultiPointerMap beta;

    friend bool operator==(const MultiState&, const MultiState&) = default;
};

// A row is a disjunction over possible pointees. The empty row (pointer not
// initialized on some path) absorbs: joining with it loses everything, the
// same way b_inf does in single-pointee mode. Otherwise the rows' pointee
// sets unite; a pointee known on both sides meets its offsets, a pointee
// known on one side keeps its offset (on every path reaching the join where
// x points into that buffer, that is its offset).
inline MultiRow meet_row(const MultiRow& r, const MultiRow& r2) {
    if (r.empty() || r2.empty()) return {};
    MultiRow out = r;
    for (const auto& [buf, e] : r2) {
        auto [it, inserted] = out.emplace(buf, e);
        if (inserted) continue;
        MultiPtrEntry m;
        m.offset = meet_size(it->second.offset, e.offset);
        m.exact = it->second.exact && e.exact &&
                  it->second.offset == e.offset && m.offset.is_finite();
        it->second = m;
    }
    return out;
}

inline MultiPointerMap meet_beta_multi(const MultiPointerMap& m,
                                       const MultiPointerMap& m2) {
    MultiPointerMap out;
    for (const auto& [x, row] : m.rows()) out.set(x, meet_row(row, m2.at(x)));
    for (const auto& [x, row] : m2.rows())
        if (!m.rows().count(x)) out.set(x, meet_row(row, m.at(x)));
    return out;
}

inline MultiState meet_multi_state(const MultiState& s, const MultiState& s2) {
    return {meet_alpha(s.alpha, s2.alpha), meet_beta_multi(s.beta, s2.beta)};
}

// Buffers x certainly-or-possibly points to at a known offset.
inline std::set<BufferId> pt_set(const MultiPointerMap& m, const Pointer& x) {
    std::set<BufferId> out;
    for (const auto& [b, e] : m.at(x))
        if (e.offset.is_finite()) out.insert(b);
    return out;
}

// All known pointees, including unknown-offset ones.
inline std::set<BufferId> pointee_set(const MultiPointerMap& m, const Pointer& x) {
    std::set<BufferId> out;
    for (const auto& [b, e] : m.at(x)) out.insert(b);
    return out;
}

inline MultiState initial_multi_state(const std::vector<BufferId>& buffers,
                                      const std::vector<Pointer>& pointers) {
    MultiState s;
    for (BufferId b : buffers) s.alpha.declare(b);
    for (const Pointer& x : pointers) s.beta.declare(x);
    return s;
}

// ---- String-operation approximation over buffer sets ----

struct StrFunApprox {
    std::set<BufferId> dn;          // destination buffers
    std::map<BufferId, Size> kn;    // per-destination size
    Size length = Size::inf();      // longest source string
    Size size_floor = Size::inf();  // smallest destination size
    Size copy_pos = Size::inf();    // farthest copy position
    Size np_src = Size::inf();
    NullPosSet rn;                  // shared result set
    bool fresh = false;
};

namespace detail {

inline Size end_in_buf(const BufferMap& a, BufferId b, Size off) {
    return glb_le(rnps(a.at(b).nps, a.at(b).size, Size::finite(0), off, Cmp::Ge));
}

} // namespace detail

inline StrFunApprox compute_strfun_multi(const MultiState& s, const Stmt& n) {
    const bool cat = n.kind == StmtKind::StrCat || n.kind == StmtKind::StrNCat;
    const bool capped = n.kind == StmtKind::StrNCpy || n.kind == StmtKind::StrNCat;
    StrFunApprox r;

    // Longest string among the source's pointees; unknown-offset pointees
    // and unknown sources contribute infinity.
    const MultiRow& ry = s.beta.at(n.y);
    if (ry.empty()) {
        r.length = Size::inf();
    } else {
        r.length = Size::finite(0);
        for (const auto& [b, e] : ry) {
            Size len = e.offset.is_finite()
                           ? sat_sub(detail::end_in_buf(s.alpha, b, e.offset),
                                     e.offset)
                           : Size::inf();
            r.length = max_size(r.length, len);
        }
    }
    if (capped) {
        Size m = resolve_extent(n.extent, ExtentCtx::IndexOrShift);
        Size cap = m.is_inf() ? Size::inf() : Size::finite(m.value() + 1);
        r.length = min_size(cap, r.length);
    }

    const MultiRow& rx = s.beta.at(n.x);
    r.dn = pt_set(s.beta, n.x);
    if (r.dn.empty()) r.dn = pointee_set(s.beta, n.x);
    Size start_min = Size::inf();
    r.copy_pos = Size::finite(0);
    NullPosSet nps_comb;
    bool first = true;
    for (BufferId b : r.dn) {
        const BufInfo& info = s.alpha.at(b);
        r.kn[b] = info.size;
        r.size_floor = min_size(r.size_floor, info.size);
        Size off = rx.at(b).offset;
        start_min = min_size(start_min, off);
        Size pos = cat ? detail::end_in_buf(s.alpha, b, off) : off;
        r.copy_pos = max_size(r.copy_pos, pos);
        nps_comb = first ? info.nps : meet_nps(nps_comb, info.nps);
        first = false;
    }
    r.np_src = sat_add(r.length, r.copy_pos, r.size_floor);

    NullPosSet before = rnps_tracked(nps_comb, r.size_floor, Size::finite(0),
                                     start_min, Cmp::Lt, r.fresh);
    NullPosSet after = rnps_tracked(nps_comb, r.size_floor, Size::finite(0),
                                    r.np_src, Cmp::Ge, r.fresh);
    r.rn = before.unite(after);
    if (r.np_src.is_inf()) r.fresh = true;
    r.rn.insert(r.np_src); // infinity is evidence; finite claims are pruned
                           // by the caller when several buffers share rn
    return r;
}

// Recursive accumulation of the shared result set over the destinations.
inline BufferMap update_buf_multi(BufferMap a, const Stmt&,
                                  const std::map<BufferId, Size>& kn,
                                  const NullPosSet& rn,
                                  std::set<BufferId> x) {
    if (x.empty()) return a;
    BufferId b = *x.begin();
    x.erase(x.begin());
    a.set(b, BufInfo{kn.at(b), rn, false});
    return update_buf_multi(std::move(a), Stmt{}, kn, rn, std::move(x));
}

// ---- Transfer ----

struct MultiOutcome {
    MultiState state;
    bool writes = false;
    bool write_through_undef = false;
    std::vector<BufferId> fresh_bufs; // destinations with fresh overflow evidence
};

namespace detail {

// View of a multi row entry as a single-pointee pointer fact.
inline PtrInfo view_entry(const MultiRow& row, BufferId b) {
    auto it = row.find(b);
    if (it == row.end()) return PtrInfo{};
    return PtrInfo{b, it->second.offset, it->second.exact};
}

// For pointers whose row has exactly one pointee the single-pointee flow
// functions apply verbatim; otherwise return the undefined-pointer view
// (only used for sources, where it yields length infinity).
inline PtrInfo singleton_view(const MultiRow& row) {
    if (row.size() == 1) return view_entry(row, row.begin()->first);
    return PtrInfo{};
}

inline MultiRow shift_row(const BufferMap& a, const MultiRow& ry, Size i,
                          bool exact_shift, bool loop_variant) {
    MultiRow out;
    for (const auto& [b, e] : ry) {
        MultiPtrEntry ne;
        if (loop_variant) {
            ne.offset = Size::inf();
            ne.exact = false;
        } else {
            ne.offset = sat_add(e.offset, i, a.at(b).size);
            ne.exact = e.exact && exact_shift && ne.offset.is_finite();
        }
        out[b] = ne;
    }
    return out;
}

} // namespace detail

inline MultiPointerMap update_bpt_multi(const BufferMap& a,
                                        const MultiPointerMap& m, const Stmt& n) {
    MultiPointerMap out = m;
    switch (n.kind) {
    case StmtKind::Malloc:
    case StmtKind::Calloc:
        out.set(n.x, MultiRow{{BufferId::site(n.id),
                               MultiPtrEntry{Size::finite(0), true}}});
        break;
    case StmtKind::Assign: out.set(n.x, m.at(n.y)); break;
    case StmtKind::AssignAdd: {
        Size i = resolve_extent(n.extent, ExtentCtx::IndexOrShift);
        out.set(n.x, detail::shift_row(a, m.at(n.y), i, n.extent.is_const(),
                                       n.shift_src_loop_variant));
        break;
    }
    default: break;
    }
    return out;
}

inline MultiOutcome update_maps_multi(const MultiState& s, const Stmt& n) {
    MultiOutcome out;
    out.state.alpha = s.alpha;
    out.state.beta = update_bpt_multi(s.alpha, s.beta, n);
    if (!has_flow_row(n.kind)) return out;
    out.writes = true;

    auto apply_row = [&](FlowRow row) {
        if (n.in_loop && is_destructive(n.kind)) {
            row.nps = row.nps.inf_part();
            row.exact = false;
        }
        out.state.alpha.set(row.dest, BufInfo{row.new_size, row.nps, row.exact});
        if (row.fresh) out.fresh_bufs.push_back(row.dest);
    };

    if (n.allocates()) {
        apply_row(flow_row(AnalysisState{s.alpha, PointerMap{}}, n));
        return out;
    }

    const MultiRow& rx = s.beta.at(n.x);
    if (rx.empty()) {
        out.write_through_undef = true;
        out.state.alpha = clobber_all(s.alpha, n.kind);
        return out;
    }
    std::set<BufferId> dests = pt_set(s.beta, n.x);
    if (dests.empty()) dests = pointee_set(s.beta, n.x);
    const bool multi_dest = dests.size() > 1;

    switch (n.kind) {
    case StmtKind::Free:
        for (BufferId b : dests) {
            const BufInfo& info = s.alpha.at(b);
            out.state.alpha.set(
                b, BufInfo{Size::finite(0), info.nps, info.exact && !multi_dest});
        }
        return out;
    case StmtKind::IndexWriteNull:
    case StmtKind::IndexWriteChar:
        for (BufferId b : dests) {
            AnalysisState view{s.alpha, PointerMap{}};
            PtrInfo px = detail::view_entry(rx, b);
            if (multi_dest) px.exact = false; // the write may land elsewhere
            view.beta.set(n.x, px);
            apply_row(flow_row(view, n));
        }
        return out;
    case StmtKind::StrCpy:
    case StmtKind::StrCat:
    case StmtKind::StrNCpy:
    case StmtKind::StrNCat:
    case StmtKind::MemCpy: {
        const MultiRow& ry = s.beta.at(n.y);
        if (!multi_dest && ry.size() <= 1) {
            AnalysisState view{s.alpha, PointerMap{}};
            view.beta.set(n.x, detail::view_entry(rx, *dests.begin()));
            view.beta.set(n.y, detail::singleton_view(ry));
            apply_row(flow_row(view, n));
            return out;
        }
        if (n.kind == StmtKind::MemCpy) {
            // Min destination size, max shift distance; overflow when any
            // destination/source pointee pair can saturate.
            Size m = resolve_extent(n.extent, ExtentCtx::IndexOrShift);
            bool fresh = false;
            for (BufferId b : dests) {
                Size off = rx.at(b).offset;
                if (sat_add(m, off, s.alpha.at(b).size).is_inf()) fresh = true;
            }
            for (const auto& [b, e] : ry)
                if (sat_add(m, e.offset, s.alpha.at(b).size).is_inf()) fresh = true;
            std::map<BufferId, Size> kn;
            NullPosSet rn;
            for (BufferId b : dests) {
                kn[b] = s.alpha.at(b).size;
                for (Size p : s.alpha.at(b).nps.elements())
                    if (p.is_inf()) rn.insert(p);
            }
            if (fresh) {
                rn.insert(Size::inf());
                for (BufferId b : dests) out.fresh_bufs.push_back(b);
            }
            out.state.alpha = update_buf_multi(out.state.alpha, n, kn, rn, dests);
            return out;
        }
        StrFunApprox ap = compute_strfun_multi(s, n);
        NullPosSet rn = ap.rn.inf_part(); // finite claims are per-buffer facts;
                                          // a shared set may not assert them
        out.state.alpha = update_buf_multi(out.state.alpha, n, ap.kn, rn, ap.dn);
        if (ap.fresh)
            for (BufferId b : ap.dn) out.fresh_bufs.push_back(b);
        return out;
    }
    default: return out;
    }
}

// ---- Solver ----

struct MultiNodeFacts {
    MultiState in;
    MultiState out;
    bool writes = false;
    bool write_through_undef = false;
    std::vector<BufferId> fresh_bufs;

    friend bool operator==(const MultiNodeFacts&, const MultiNodeFacts&) = default;
};

struct MultiFlowResult {
    std::map<std::uint32_t, MultiNodeFacts> facts;
    std::vector<std::uint32_t> order;
    std::vector<Edge> back_edges;

    friend bool operator==(const MultiFlowResult& a, const MultiFlowResult& b) {
        return a.facts == b.facts;
    }
};

inline MultiFlowResult solve_multi(const Cfg& g, const MultiState& boundary,
                                   SolveMode mode = SolveMode::SinglePass) {
    MultiFlowResult r;
    r.back_edges = find_back_edges_checked(g);
    r.order = topo_order(g, r.back_edges);
    const std::vector<Edge> cut =
        mode == SolveMode::Cyclic ? std::vector<Edge>{} : r.back_edges;

    auto in_state = [&](std::uint32_t id) {
        bool first = true;
        MultiState in;
        for (std::uint32_t p : g.preds(id)) {
            bool dropped = false;
            for (const Edge& e : cut)
                if (e.first == p && e.second == id) dropped = true;
            if (dropped) continue;
            auto it = r.facts.find(p);
            if (it == r.facts.end()) continue;
            in = first ? it->second.out : meet_multi_state(in, it->second.out);
            first = false;
        }
        if (id == g.entry())
            in = first ? boundary : meet_multi_state(in, boundary);
        return in;
    };
    auto step = [&](std::uint32_t id) {
        MultiNodeFacts f;
        f.in = in_state(id);
        MultiOutcome t = update_maps_multi(f.in, g.node(id));
        f.out = std::move(t.state);
        f.writes = t.writes;
        f.write_through_undef = t.write_through_undef;
        f.fresh_bufs = std::move(t.fresh_bufs);
        return f;
    };

    if (mode == SolveMode::SinglePass) {
        for (std::uint32_t id : r.order) r.facts[id] = step(id);
        return r;
    }
    std::set<std::uint32_t> work(r.order.begin(), r.order.end());
    std::size_t budget = (g.nodes().size() + 1) * 4096;
    while (!work.empty()) {
        if (budget-- == 0)
            throw std::runtime_error("data-flow solve did not converge");
        std::uint32_t id = *work.begin();
        work.erase(work.begin());
        MultiNodeFacts f = step(id);
        auto it = r.facts.find(id);
        bool changed = it == r.facts.end() || !(it->second == f);
        r.facts[id] = std::move(f);
        if (changed)
            for (std::uint32_t s : g.succs(id)) {
                bool dropped = false;
                for (const Edge& e : cut)
                    if (e.first == id && e.second == s) dropped = true;
                if (!dropped) work.insert(s);
            }
    }
    return r;
}

// ---- Read checks and diagnostics ----

inline std::optional<Diagnostic> check_read_multi(const MultiState& s,
                                                  const Pointer& x,
                                                  std::optional<Size> idx = {}) {
    const MultiRow& row = s.beta.at(x);
    Diagnostic d;
    d.kind = DiagKind::PotentialReadOverflow;
    if (row.empty()) {
        d.reason = DiagReason::UndefinedBuffer;
        d.message = "read through '" + x + "' which may point to an unknown buffer";
        return d;
    }
    // Every pointee must pass its checks.
    for (const auto& [b, e] : row) {
        d.buffer = b;
        if (size_of(s.alpha, b).is_inf()) {
            d.reason = DiagReason::UndefinedSize;
            d.message =
                "read through '" + x + "' into " + b.str() + " of unknown size";
            return d;
        }
        if (e.offset.is_inf()) {
            d.reason = DiagReason::UndefinedOffset;
            d.message =
                "read through '" + x + "' at an unknown offset in " + b.str();
            return d;
        }
        if (idx) {
            if (sat_add(*idx, e.offset, size_of(s.alpha, b)).is_inf()) {
                d.reason = DiagReason::Saturation;
                d.message = "indexed read through '" + x +
                            "' may run past the end of " + b.str();
                return d;
            }
            continue;
        }
        if (detail::end_in_buf(s.alpha, b, e.offset).is_inf()) {
            d.reason = DiagReason::NoNullTerminator;
            d.message =
                "scan from '" + x + "' may find no terminator within " + b.str();
            return d;
        }
    }
    return std::nullopt;
}

inline std::vector<Diagnostic> collect_multi(const MultiFlowResult& fr,
                                             const Cfg& g,
                                             CollectOptions opts = {}) {
    std::vector<Diagnostic> out;
    auto push_read = [&](const Stmt& n, std::optional<Diagnostic> d) {
        if (!d) return;
        d->stmt_id = n.id;
        d->line = n.line;
        out.push_back(std::move(*d));
    };
    for (const auto& [id, f] : fr.facts) {
        const Stmt& n = g.node(id);
        if (f.writes && f.write_through_undef) {
            Diagnostic d;
            d.stmt_id = id;
            d.line = n.line;
            d.kind = DiagKind::WriteThroughUndefined;
            d.buffer = BufferId::undef();
            d.reason = DiagReason::UndefinedBuffer;
            d.message =
                "write through '" + n.x + "' which may point to an unknown buffer";
            out.push_back(std::move(d));
        }
        for (BufferId b : f.fresh_bufs) {
            Diagnostic d;
            d.stmt_id = id;
            d.line = n.line;
            d.kind = DiagKind::WriteOverflow;
            d.buffer = b;
            d.reason = DiagReason::Saturation;
            d.message = "write at this statement overflows " + b.str();
            out.push_back(std::move(d));
        }
        if (!opts.check_reads) continue;
        switch (n.kind) {
        case StmtKind::ReadPtr:
        case StmtKind::StrLen:
            push_read(n, check_read_multi(f.in, n.x));
            break;
        case StmtKind::ReadIndex:
            push_read(n, check_read_multi(
                             f.in, n.x,
                             resolve_extent(n.extent, ExtentCtx::IndexOrShift)));
            break;
        case StmtKind::StrCpy:
        case StmtKind::StrNCpy:
            push_read(n, check_read_multi(f.in, n.y));
            break;
        case StmtKind::StrCat:
        case StmtKind::StrNCat:
            push_read(n, check_read_multi(f.in, n.y));
            push_read(n, check_read_multi(f.in, n.x));
            break;
        case StmtKind::MemCpy:
            push_read(n, check_read_multi(
                             f.in, n.y,
                             resolve_extent(n.extent, ExtentCtx::IndexOrShift)));
            break;
        default: break;
        }
    }
    return out;
}

// True when no pointer ever has more than one known pointee: on such
// programs this mode must coincide with the single-pointee mode.
inline bool is_single_pointee(const MultiFlowResult& fr) {
    for (const auto& [id, f] : fr.facts)
        for (const auto& [x, row] : f.out.beta.rows())
            if (row.size() > 1) return false;
    return true;
}

} // namespace nullscan
