#pragma once

#include <map>
#include <string>
#include <vector>

#include "nullscan/ir.hpp"
#include "nullscan/lattice.hpp"

// Analysis state: the buffer map (alpha) and the pointer-to-buffer map
// (beta), their extractor functions, and null-position arithmetic.
//
// Each map additionally carries exactness marks. A buffer's null position
// set is "exact" when it equals the concrete set of nulls on every path
// reaching the point; a pointer's offset is exact when the concrete offset
// equals it on every path. The transfer functions only assert new null
// positions derived from exact information, which keeps every finite member
// of every nps a real null character -- the property the read checks rely on.

namespace nullscan {

using Pointer = std::string;

struct BufInfo {
    Size size = Size::inf();
    NullPosSet nps;
    bool exact = true; // finite nps members are the complete set of nulls

    friend bool operator==(const BufInfo&, const BufInfo&) = default;
};

struct PtrInfo {
    BufferId buf = BufferId::undef();
    Size offset = Size::inf();
    bool exact = false; // offset matches the concrete offset on every path

    friend bool operator==(const PtrInfo&, const PtrInfo&) = default;
};

// Total map from buffer identities to buffer information. The undefined
// buffer is always present and permanently maps to (inf, {}).
class BufferMap {
public:
    BufferMap() { entries_[BufferId::undef()] = BufInfo{}; }

    void declare(BufferId b) { entries_.emplace(b, BufInfo{}); }

    const BufInfo& at(BufferId b) const {
        auto it = entries_.find(b);
        return it == entries_.end() ? undef_info() : it->second;
    }

    void set(BufferId b, BufInfo info) {
        if (b.is_undef()) return; // the undefined buffer is a permanent sink
        entries_[b] = std::move(info);
    }

    const std::map<BufferId, BufInfo>& entries() const { return entries_; }

    friend bool operator==(const BufferMap&, const BufferMap&) = default;

private:
    static const BufInfo& undef_info() {
        static const BufInfo info{};
        return info;
    }
    std::map<BufferId, BufInfo> entries_;
};

// Total map from pointers to (buffer identity, offset); single-pointee mode.
class PointerMap {
public:
    void declare(const Pointer& x) { entries_.emplace(x, PtrInfo{}); }

    const PtrInfo& at(const Pointer& x) const {
        static const PtrInfo undef{};
        auto it = entries_.find(x);
        return it == entries_.end() ? undef : it->second;
    }

    void set(const Pointer& x, PtrInfo info) { entries_[x] = std::move(info); }

    const std::map<Pointer, PtrInfo>& entries() const { return entries_; }

    friend bool operator==(const PointerMap&, const PointerMap&) = default;

private:
    std::map<Pointer, PtrInfo> entries_;
};

struct AnalysisState {
    BufferMap alpha;
    PointerMap beta;

    friend bool operator==(const AnalysisState&, const AnalysisState&) = default;
};

// ---- Extractors ----

inline Size size_of(const BufferMap& a, BufferId b) { return a.at(b).size; }
inline const NullPosSet& nps_of(const BufferMap& a, BufferId b) {
    return a.at(b).nps;
}

inline BufferId pt_of(const PointerMap& m, const Pointer& x) {
    return m.at(x).buf;
}

// Start offset of x in b; infinity when x does not point to b.
inline Size start_of(const PointerMap& m, const Pointer& x, BufferId b) {
    const PtrInfo& p = m.at(x);
    return p.buf == b ? p.offset : Size::inf();
}

// ---- Meets ----

inline BufInfo meet_bufinfo(const BufInfo& a, const BufInfo& b) {
    BufInfo r;
    r.size = meet_size(a.size, b.size);
    r.nps = meet_nps(a.nps, b.nps);
    r.exact = a.exact && b.exact && a.nps.fin() == b.nps.fin();
    return r;
}

inline BufferMap meet_alpha(const BufferMap& a, const BufferMap& a2) {
    BufferMap r;
    for (const auto& [b, info] : a.entries())
        r.set(b, meet_bufinfo(info, a2.at(b)));
    for (const auto& [b, info] : a2.entries())
        if (!a.entries().count(b)) r.set(b, meet_bufinfo(info, a.at(b)));
    return r;
}

// Per pointer: meet of buffer identities and offsets. A buffer mismatch
// yields the undefined buffer, and the offset is forced to infinity with it.
inline PtrInfo meet_ptrinfo(const PtrInfo& a, const PtrInfo& b) {
    PtrInfo r;
    r.buf = meet_bufid(a.buf, b.buf);
    r.offset = r.buf.is_undef() ? Size::inf() : meet_size(a.offset, b.offset);
    r.exact = a.exact && b.exact && r.offset.is_finite();
    return r;
}

inline PointerMap meet_beta(const PointerMap& m, const PointerMap& m2) {
    PointerMap r;
    for (const auto& [x, info] : m.entries())
        r.set(x, meet_ptrinfo(info, m2.at(x)));
    for (const auto& [x, info] : m2.entries())
        if (!m.entries().count(x)) r.set(x, meet_ptrinfo(info, m.at(x)));
    return r;
}

inline AnalysisState meet_state(const AnalysisState& s, const AnalysisState& s2) {
    return {meet_alpha(s.alpha, s2.alpha), meet_beta(s.beta, s2.beta)};
}

// ---- Null position arithmetic ----

// Relevant null positions: filter X against the pivot with the given
// comparison, then shift the survivors with saturation at sat.
inline NullPosSet rnps(const NullPosSet& x, Size sat, Size shift, Size pivot,
                       Cmp op) {
    NullPosSet r;
    for (Size i : x.elements())
        if (cmp_size(i, op, pivot)) r.insert(sat_add(i, shift, sat));
    return r;
}

// rnps that also reports saturation of a finite member (fresh overflow
// evidence, as opposed to an infinity that was already in the set).
inline NullPosSet rnps_tracked(const NullPosSet& x, Size sat, Size shift,
                               Size pivot, Cmp op, bool& fresh_inf) {
    NullPosSet r;
    for (Size i : x.elements())
        if (cmp_size(i, op, pivot)) r.insert(sat_add_tracked(i, shift, sat, fresh_inf));
    return r;
}

// First null position at or after the start of x in b; infinity when a scan
// would run off the end of the buffer.
inline Size end_of(const AnalysisState& s, const Pointer& x, BufferId b) {
    return glb_le(rnps(nps_of(s.alpha, b), size_of(s.alpha, b), Size::finite(0),
                       start_of(s.beta, x, b), Cmp::Ge));
}

// Boundary state: every buffer undefined, every pointer pointing to the
// undefined buffer.
inline AnalysisState initial_state(const std::vector<BufferId>& buffers,
                                   const std::vector<Pointer>& pointers) {
    AnalysisState s;
    for (BufferId b : buffers) s.alpha.declare(b);
    for (const Pointer& x : pointers) s.beta.declare(x);
    return s;
}

} // namespace nullscan
