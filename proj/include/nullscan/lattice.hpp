#pragma once

#include <algorithm>
#include <cassert>
#include <compare>
#include <cstdint>
#include <set>
#include <string>

// Value domains for the analysis: sizes/offsets with an infinity element,
// buffer identities with an "undefined" element, and finite sets of null
// character positions. All meets here are meet-semilattice operations
// (commutative, associative, idempotent) with the infinite element as bottom.

namespace nullscan {

// A natural number or infinity. Doubles as buffer size, pointer offset and
// null-character position. Ordered totally with every finite value below inf.
class Size {
public:
    constexpr Size() = default;
    static constexpr Size finite(std::uint64_t n) { return Size(n); }
    static constexpr Size inf() { return Size(kInf); }

    constexpr bool is_inf() const { return v_ == kInf; }
    constexpr bool is_finite() const { return v_ != kInf; }
    constexpr std::uint64_t value() const {
        assert(is_finite());
        return v_;
    }

    friend constexpr bool operator==(Size a, Size b) { return a.v_ == b.v_; }
    // Total order: finite ascending, inf greatest.
    friend constexpr auto operator<=>(Size a, Size b) { return a.v_ <=> b.v_; }

    std::string str() const { return is_inf() ? "inf" : std::to_string(v_); }

private:
    static constexpr std::uint64_t kInf = ~std::uint64_t{0};
    constexpr explicit Size(std::uint64_t v) : v_(v) {}
    std::uint64_t v_ = kInf;
};

// Saturated addition bounded by k: i + j if everything is finite and the sum
// does not exceed k, infinity otherwise.
inline Size sat_add(Size i, Size j, Size k) {
    if (i.is_inf() || j.is_inf() || k.is_inf()) return Size::inf();
    std::uint64_t sum = i.value() + j.value();
    if (sum > k.value()) return Size::inf();
    return Size::finite(sum);
}

// sat_add that reports whether it manufactured infinity out of finite
// operands, as opposed to propagating one that was already infinite.
inline Size sat_add_tracked(Size i, Size j, Size k, bool& fresh_inf) {
    Size r = sat_add(i, j, k);
    if (r.is_inf() && i.is_finite() && j.is_finite()) fresh_inf = true;
    return r;
}

// Difference of sizes. Any undefined geometry (either side infinite, or a
// result that would be negative) collapses to infinity.
inline Size sat_sub(Size i, Size j) {
    if (i.is_inf() || j.is_inf() || i.value() < j.value()) return Size::inf();
    return Size::finite(i.value() - j.value());
}

inline Size meet_size(Size i, Size j) { return i == j ? i : Size::inf(); }

inline Size min_size(Size i, Size j) { return std::min(i, j); }
inline Size max_size(Size i, Size j) { return std::max(i, j); }

// A buffer identity: the statement site that allocated it, or the
// distinguished undefined buffer.
class BufferId {
public:
    constexpr BufferId() = default;
    static constexpr BufferId site(std::uint32_t n) { return BufferId(n); }
    static constexpr BufferId undef() { return BufferId(kUndef); }

    constexpr bool is_undef() const { return site_ == kUndef; }
    constexpr std::uint32_t site_id() const {
        assert(!is_undef());
        return site_;
    }

    friend constexpr bool operator==(BufferId, BufferId) = default;
    friend constexpr auto operator<=>(BufferId, BufferId) = default;

    std::string str() const {
        return is_undef() ? "b_inf" : "b" + std::to_string(site_);
    }

private:
    static constexpr std::uint32_t kUndef = ~std::uint32_t{0};
    constexpr explicit BufferId(std::uint32_t s) : site_(s) {}
    std::uint32_t site_ = kUndef;
};

inline BufferId meet_bufid(BufferId b, BufferId b2) {
    return b == b2 ? b : BufferId::undef();
}

enum class Cmp { Lt, Le, Gt, Ge, Eq, Ne };

// Comparison under the total order of Size (inf greatest). In particular
// inf >= p for all p, and inf <= p only for p = inf.
inline bool cmp_size(Size a, Cmp op, Size b) {
    switch (op) {
    case Cmp::Lt: return a < b;
    case Cmp::Le: return a <= b;
    case Cmp::Gt: return a > b;
    case Cmp::Ge: return a >= b;
    case Cmp::Eq: return a == b;
    case Cmp::Ne: return a != b;
    }
    return false;
}

// A finite set of null-character positions within a buffer. Membership of
// inf records that a write overflow has occurred on some path.
class NullPosSet {
public:
    NullPosSet() = default;
    NullPosSet(std::initializer_list<Size> xs) : elems_(xs) {}

    static NullPosSet single(Size s) { return NullPosSet{s}; }

    bool empty() const { return elems_.empty(); }
    std::size_t size() const { return elems_.size(); }
    bool contains(Size s) const { return elems_.count(s) != 0; }
    bool has_inf() const { return contains(Size::inf()); }

    void insert(Size s) { elems_.insert(s); }
    void erase(Size s) { elems_.erase(s); }

    const std::set<Size>& elements() const { return elems_; }

    NullPosSet fin() const {
        NullPosSet r = *this;
        r.erase(Size::inf());
        return r;
    }

    NullPosSet inf_part() const {
        return has_inf() ? NullPosSet{Size::inf()} : NullPosSet{};
    }

    NullPosSet unite(const NullPosSet& o) const {
        NullPosSet r = *this;
        r.elems_.insert(o.elems_.begin(), o.elems_.end());
        return r;
    }

    NullPosSet intersect(const NullPosSet& o) const {
        NullPosSet r;
        for (Size s : elems_)
            if (o.contains(s)) r.insert(s);
        return r;
    }

    NullPosSet minus(const NullPosSet& o) const {
        NullPosSet r;
        for (Size s : elems_)
            if (!o.contains(s)) r.insert(s);
        return r;
    }

    friend bool operator==(const NullPosSet&, const NullPosSet&) = default;

    std::string str() const {
        std::string s = "{";
        bool first = true;
        for (Size e : elems_) {
            if (!first) s += ",";
            s += e.str();
            first = false;
        }
        return s + "}";
    }

private:
    std::set<Size> elems_;
};

// Intersection on the finite parts, union on the infinity markers: overflow
// evidence from either side is never lost.
inline NullPosSet meet_nps(const NullPosSet& x, const NullPosSet& y) {
    NullPosSet r = x.fin().intersect(y.fin());
    if (x.has_inf() || y.has_inf()) r.insert(Size::inf());
    return r;
}

// Minimum of the set under the Size order; inf for the empty set (no null
// position ahead means the scan runs forever).
inline Size glb_le(const NullPosSet& x) {
    if (x.empty()) return Size::inf();
    return *x.elements().begin();
}

} // namespace nullscan
