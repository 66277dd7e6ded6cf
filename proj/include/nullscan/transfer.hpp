#pragma once

#include "nullscan/state.hpp"

// Per-statement flow functions: the destination buffer, its new size and
// its new null position set, plus the pointer map update.
//
// Two conventions harden the paper-style rows against approximation:
//  - A finite null position is only added to a set when the geometry it was
//    derived from is exact (see state.hpp); otherwise the claim is dropped,
//    which can only lengthen strings and is therefore safe.
//  - Any saturation to infinity while computing write geometry marks the
//    outcome as a fresh overflow; infinities merely carried through from an
//    incoming set do not.

namespace nullscan {

// Unbounded addition, absorbing infinity.
inline Size plus(Size a, Size b) {
    if (a.is_inf() || b.is_inf()) return Size::inf();
    return Size::finite(a.value() + b.value());
}

struct TransferOutcome {
    AnalysisState state;
    bool fresh_overflow = false;       // saturation introduced new evidence here
    bool write_through_undef = false;  // writing statement, destination is b_inf
    BufferId dest = BufferId::undef(); // written buffer, when the statement writes
    bool writes = false;
};

// One row of the flow-function table: destination, new size, new nps.
struct FlowRow {
    BufferId dest = BufferId::undef();
    Size new_size = Size::inf();
    NullPosSet nps;
    bool exact = false;
    bool fresh = false;
};

inline FlowRow r_alloc(const Stmt& n) {
    FlowRow r;
    r.dest = BufferId::site(n.id);
    r.new_size = resolve_extent(n.extent, ExtentCtx::Alloc);
    r.exact = true; // malloc'd memory contains no nulls, of any concrete size
    return r;
}

inline FlowRow r_calloc(const Stmt& n) {
    FlowRow r;
    r.dest = BufferId::site(n.id);
    r.new_size = resolve_extent(n.extent, ExtentCtx::Alloc);
    if (r.new_size.is_finite()) {
        for (std::uint64_t i = 0; i <= r.new_size.value(); ++i)
            r.nps.insert(Size::finite(i));
        // A ranged size zeroes more cells than the low limit claims.
        r.exact = n.extent.is_const();
    }
    return r;
}

inline FlowRow r_free(const AnalysisState& s, const Stmt& n) {
    const PtrInfo& px = s.beta.at(n.x);
    FlowRow r;
    r.dest = px.buf;
    r.new_size = Size::finite(0);
    r.nps = nps_of(s.alpha, px.buf);
    r.exact = s.alpha.at(px.buf).exact;
    return r;
}

inline FlowRow r_index_null(const AnalysisState& s, const Stmt& n) {
    const PtrInfo& px = s.beta.at(n.x);
    const BufInfo& ix = s.alpha.at(px.buf);
    FlowRow r;
    r.dest = px.buf;
    r.new_size = ix.size;
    r.nps = ix.nps;
    Size idx = resolve_extent(n.extent, ExtentCtx::IndexOrShift);
    Size pos = sat_add(idx, px.offset, ix.size);
    if (pos.is_inf()) {
        // The write lands outside the buffer on some valuation.
        r.nps.insert(Size::inf());
        r.fresh = true;
        r.exact = false;
    } else if (px.exact && n.extent.is_const()) {
        r.nps.insert(pos);
        r.exact = ix.exact;
    } else {
        // Position not pinned down; asserting it could fabricate a null.
        r.exact = false;
    }
    return r;
}

inline FlowRow r_index_char(const AnalysisState& s, const Stmt& n) {
    const PtrInfo& px = s.beta.at(n.x);
    const BufInfo& ix = s.alpha.at(px.buf);
    FlowRow r;
    r.dest = px.buf;
    r.new_size = ix.size;
    Size hi_idx = resolve_extent(n.extent, ExtentCtx::IndexOrShift);
    Size pos = sat_add(hi_idx, px.offset, ix.size);
    if (px.exact && n.extent.is_const() && pos.is_finite()) {
        r.nps = ix.nps.minus(NullPosSet::single(pos));
        r.exact = ix.exact;
    } else {
        // The overwritten cell ranges over [lo_pos, hi_pos]; drop every null
        // that might be hit.
        Size lo_pos = Size::finite(0);
        if (px.exact && px.offset.is_finite())
            lo_pos = Size::finite(n.extent.lo + px.offset.value());
        for (Size p : ix.nps.elements()) {
            if (p.is_inf()) {
                r.nps.insert(p);
                continue;
            }
            bool may_hit = p >= lo_pos && (pos.is_inf() || p <= pos);
            if (!may_hit) r.nps.insert(p);
        }
        r.exact = false;
    }
    if (pos.is_inf()) {
        // Writing a character past the end is itself an overflow; recording
        // the evidence instead of discarding it keeps reads honest.
        r.nps.insert(Size::inf());
        r.fresh = true;
        r.exact = false;
    }
    return r;
}

inline FlowRow r_strfun(const AnalysisState& s, const Stmt& n) {
    const PtrInfo& px = s.beta.at(n.x);
    const PtrInfo& py = s.beta.at(n.y);
    const BufInfo& ix = s.alpha.at(px.buf);
    const BufInfo& iy = s.alpha.at(py.buf);
    const bool cat = n.kind == StmtKind::StrCat || n.kind == StmtKind::StrNCat;
    const bool capped = n.kind == StmtKind::StrNCpy || n.kind == StmtKind::StrNCat;

    FlowRow r;
    r.dest = px.buf;
    r.new_size = ix.size;

    Size end_y = end_of(s, n.y, py.buf);
    Size length = sat_sub(end_y, py.offset);
    if (capped) {
        Size m = resolve_extent(n.extent, ExtentCtx::IndexOrShift);
        Size cap = m.is_inf() ? Size::inf() : Size::finite(m.value() + 1);
        length = min_size(cap, length);
    }
    Size copy_pos = cat ? end_of(s, n.x, px.buf) : px.offset;
    Size np_src = sat_add(length, copy_pos, ix.size);

    // A source with no terminator in reach makes the whole copy abort
    // before writing anything, so the terminator may never land.
    bool claim_exact = iy.exact && py.exact && px.exact && end_y.is_finite() &&
                       (!cat || ix.exact) && (!capped || n.extent.is_const());

    NullPosSet before =
        px.exact ? rnps_tracked(ix.nps, ix.size, Size::finite(0), px.offset,
                                Cmp::Lt, r.fresh)
                 : NullPosSet{};
    NullPosSet after = rnps_tracked(ix.nps, ix.size, Size::finite(0), np_src,
                                    Cmp::Ge, r.fresh);

    r.nps = before.unite(after);
    if (np_src.is_inf()) {
        r.nps.insert(Size::inf());
        r.fresh = true;
    } else if (claim_exact) {
        r.nps.insert(np_src);
    }
    r.exact = claim_exact && ix.exact && np_src.is_finite() && !r.fresh;
    return r;
}

inline FlowRow r_memcpy(const AnalysisState& s, const Stmt& n) {
    const PtrInfo& px = s.beta.at(n.x);
    const PtrInfo& py = s.beta.at(n.y);
    const BufInfo& ix = s.alpha.at(px.buf);
    const BufInfo& iy = s.alpha.at(py.buf);
    Size m = resolve_extent(n.extent, ExtentCtx::IndexOrShift);

    FlowRow r;
    r.dest = px.buf;
    r.new_size = ix.size;

    bool dst_oflow = sat_add(m, px.offset, ix.size).is_inf();
    bool src_oflow = sat_add(m, py.offset, iy.size).is_inf();

    // Nulls imported from the source block [start_y, start_y + m]. A source
    // block that may leave its buffer aborts the copy before any write, so
    // nothing can be imported in that case.
    NullPosSet nps_src;
    if (px.exact && py.exact && n.extent.is_const() && !src_oflow) {
        Size shift = sat_sub(px.offset, py.offset);
        nps_src = rnps_tracked(iy.nps, ix.size, shift, py.offset, Cmp::Ge, r.fresh)
                      .intersect(rnps(iy.nps, ix.size, shift,
                                      plus(py.offset, m), Cmp::Le));
    }
    NullPosSet before =
        px.exact ? rnps_tracked(ix.nps, ix.size, Size::finite(0), px.offset,
                                Cmp::Lt, r.fresh)
                 : NullPosSet{};
    // Strictly beyond the copied block: the cell at start_x + m is written.
    NullPosSet after = rnps_tracked(ix.nps, ix.size, Size::finite(0),
                                    plus(px.offset, m), Cmp::Gt, r.fresh);

    r.nps = before.unite(after).unite(nps_src);
    if (dst_oflow || src_oflow) {
        r.nps.insert(Size::inf());
        r.fresh = true;
    } else if (ix.nps.has_inf()) {
        r.nps.insert(Size::inf()); // prior evidence survives
    }
    r.exact = px.exact && py.exact && iy.exact && ix.exact &&
              n.extent.is_const() && !r.fresh;
    return r;
}

inline bool has_flow_row(StmtKind k) {
    switch (k) {
    case StmtKind::Malloc:
    case StmtKind::Calloc:
    case StmtKind::Free:
    case StmtKind::IndexWriteNull:
    case StmtKind::IndexWriteChar:
    case StmtKind::StrCpy:
    case StmtKind::StrCat:
    case StmtKind::StrNCpy:
    case StmtKind::StrNCat:
    case StmtKind::MemCpy: return true;
    default: return false;
    }
}

// Statements that may overwrite null characters. Inside a loop their finite
// claims are cleared: a later iteration can hit positions the single
// abstract pass did not see.
inline bool is_destructive(StmtKind k) {
    switch (k) {
    case StmtKind::IndexWriteChar:
    case StmtKind::StrCpy:
    case StmtKind::StrCat:
    case StmtKind::StrNCpy:
    case StmtKind::StrNCat:
    case StmtKind::MemCpy: return true;
    default: return false;
    }
}

inline FlowRow flow_row(const AnalysisState& s, const Stmt& n) {
    switch (n.kind) {
    case StmtKind::Malloc: return r_alloc(n);
    case StmtKind::Calloc: return r_calloc(n);
    case StmtKind::Free: return r_free(s, n);
    case StmtKind::IndexWriteNull: return r_index_null(s, n);
    case StmtKind::IndexWriteChar: return r_index_char(s, n);
    case StmtKind::StrCpy:
    case StmtKind::StrCat:
    case StmtKind::StrNCpy:
    case StmtKind::StrNCat: return r_strfun(s, n);
    case StmtKind::MemCpy: return r_memcpy(s, n);
    default: return FlowRow{};
    }
}

// Offset of y shifted by i within its pointee, saturated at the buffer size.
inline std::pair<BufferId, Size> shift_offset(const BufferMap& a,
                                              const PointerMap& m,
                                              const Pointer& y, Size i) {
    BufferId b = pt_of(m, y);
    Size j = start_of(m, y, b);
    return {b, sat_add(j, i, size_of(a, b))};
}

inline BufferMap update_buf(const BufferMap& a, const PointerMap& m,
                            const Stmt& n) {
    if (!has_flow_row(n.kind)) return a;
    AnalysisState s{a, m};
    FlowRow row = flow_row(s, n);
    if (row.dest.is_undef()) return a;
    BufferMap out = a;
    out.set(row.dest, BufInfo{row.new_size, row.nps, row.exact});
    return out;
}

inline PointerMap update_bpt(const BufferMap& a, const PointerMap& m,
                             const Stmt& n) {
    PointerMap out = m;
    switch (n.kind) {
    case StmtKind::Malloc:
    case StmtKind::Calloc:
        out.set(n.x, PtrInfo{BufferId::site(n.id), Size::finite(0), true});
        break;
    case StmtKind::Assign: out.set(n.x, m.at(n.y)); break;
    case StmtKind::AssignAdd: {
        const PtrInfo& py = m.at(n.y);
        if (n.shift_src_loop_variant) {
            // The base drifts across iterations; the offset is unknowable.
            out.set(n.x, PtrInfo{py.buf, Size::inf(), false});
            break;
        }
        Size i = resolve_extent(n.extent, ExtentCtx::IndexOrShift);
        auto [b, off] = shift_offset(a, m, n.y, i);
        bool exact = py.exact && n.extent.is_const() && off.is_finite();
        out.set(n.x, PtrInfo{b, off, exact});
        break;
    }
    default: break;
    }
    return out;
}

// A write through an unknown pointer may land in any buffer. Free may empty
// any buffer (its cells and their nulls survive as a tombstone), destructive
// copies may overwrite nulls anywhere, and even a stray null write breaks
// the completeness of every null set.
inline BufferMap clobber_all(const BufferMap& a, StmtKind k) {
    BufferMap out;
    for (const auto& [b, info] : a.entries()) {
        if (b.is_undef()) continue;
        BufInfo ni = info;
        if (k == StmtKind::Free) {
            ni.size = Size::inf();
        } else if (is_destructive(k)) {
            ni.nps = info.nps.inf_part();
            ni.exact = false;
        } else {
            ni.exact = false;
        }
        out.set(b, ni);
    }
    return out;
}

inline TransferOutcome update_maps(const AnalysisState& s, const Stmt& n) {
    TransferOutcome out;
    if (has_flow_row(n.kind)) {
        FlowRow row = flow_row(s, n);
        out.writes = true;
        out.dest = row.dest;
        if (row.dest.is_undef()) {
            // The destination is unknown: the undef-write diagnostic covers
            // the statement; saturation against b_inf adds nothing.
            out.write_through_undef = true;
            out.state.alpha = clobber_all(s.alpha, n.kind);
        } else {
            out.fresh_overflow = row.fresh;
            if (n.in_loop && is_destructive(n.kind)) {
                row.nps = row.nps.inf_part();
                row.exact = false;
            }
            BufferMap a = s.alpha;
            a.set(row.dest, BufInfo{row.new_size, row.nps, row.exact});
            out.state.alpha = std::move(a);
        }
    } else {
        out.state.alpha = s.alpha;
    }
    out.state.beta = update_bpt(s.alpha, s.beta, n);
    return out;
}

} // namespace nullscan
