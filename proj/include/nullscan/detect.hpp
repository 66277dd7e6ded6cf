#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nullscan/solver.hpp"

// Diagnostics. Writing statements report overflows found by the transfer
// functions (fresh saturation, or writing through the undefined buffer);
// reading statements are checked against the in-state. Statements that scan
// a string (strlen, reads through a pointer, the source of a string copy)
// must find a terminator before the end of the buffer; indexed accesses
// must stay within the buffer.

namespace nullscan {

enum class DiagKind { WriteOverflow, PotentialReadOverflow, WriteThroughUndefined };
enum class DiagReason {
    UndefinedBuffer,
    UndefinedSize,
    UndefinedOffset,
    NoNullTerminator,
    Saturation,
};

inline std::string str(DiagKind k) {
    switch (k) {
    case DiagKind::WriteOverflow: return "write_overflow";
    case DiagKind::PotentialReadOverflow: return "potential_read_overflow";
    case DiagKind::WriteThroughUndefined: return "write_through_undefined";
    }
    return "?";
}

inline std::string str(DiagReason r) {
    switch (r) {
    case DiagReason::UndefinedBuffer: return "undefined_buffer";
    case DiagReason::UndefinedSize: return "undefined_size";
    case DiagReason::UndefinedOffset: return "undefined_offset";
    case DiagReason::NoNullTerminator: return "no_null_terminator";
    case DiagReason::Saturation: return "saturation";
    }
    return "?";
}

struct Diagnostic {
    std::uint32_t stmt_id = 0;
    int line = 0;
    DiagKind kind = DiagKind::PotentialReadOverflow;
    BufferId buffer = BufferId::undef();
    DiagReason reason = DiagReason::UndefinedBuffer;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

// Ordered checks for a read through x; `idx` present for indexed reads
// (x[i] does not scan for a terminator, so its check is offset arithmetic
// instead of the end-of-string check). Returns the first failing check.
inline std::optional<Diagnostic> check_read(const AnalysisState& s,
                                            const Pointer& x,
                                            std::optional<Size> idx = {}) {
    Diagnostic d;
    d.kind = DiagKind::PotentialReadOverflow;
    BufferId b = pt_of(s.beta, x);
    d.buffer = b;
    if (b.is_undef()) {
        d.reason = DiagReason::UndefinedBuffer;
        d.message = "read through '" + x + "' which may point to an unknown buffer";
        return d;
    }
    if (size_of(s.alpha, b).is_inf()) {
        d.reason = DiagReason::UndefinedSize;
        d.message = "read through '" + x + "' into " + b.str() + " of unknown size";
        return d;
    }
    if (start_of(s.beta, x, b).is_inf()) {
        d.reason = DiagReason::UndefinedOffset;
        d.message = "read through '" + x + "' at an unknown offset in " + b.str();
        return d;
    }
    if (idx) {
        if (sat_add(*idx, start_of(s.beta, x, b), size_of(s.alpha, b)).is_inf()) {
            d.reason = DiagReason::Saturation;
            d.message = "indexed read through '" + x + "' may run past the end of " +
                        b.str();
            return d;
        }
        return std::nullopt;
    }
    if (end_of(s, x, b).is_inf()) {
        d.reason = DiagReason::NoNullTerminator;
        d.message = "scan from '" + x + "' may find no terminator within " + b.str();
        return d;
    }
    return std::nullopt;
}

struct CollectOptions {
    bool check_reads = true;
};

inline std::vector<Diagnostic> collect(const FlowResult& fr, const Cfg& g,
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
            d.message = "write through '" + n.x + "' which may point to an unknown buffer";
            out.push_back(std::move(d));
        }
        if (f.writes && f.fresh_overflow) {
            Diagnostic d;
            d.stmt_id = id;
            d.line = n.line;
            d.kind = DiagKind::WriteOverflow;
            d.buffer = f.dest;
            d.reason = DiagReason::Saturation;
            d.message = "write at this statement overflows " + f.dest.str();
            out.push_back(std::move(d));
        }
        if (!opts.check_reads) continue;
        switch (n.kind) {
        case StmtKind::ReadPtr:
        case StmtKind::StrLen:
            push_read(n, check_read(f.in, n.x));
            break;
        case StmtKind::ReadIndex:
            push_read(n, check_read(f.in, n.x,
                                    resolve_extent(n.extent, ExtentCtx::IndexOrShift)));
            break;
        case StmtKind::StrCpy:
        case StmtKind::StrNCpy:
            push_read(n, check_read(f.in, n.y));
            break;
        case StmtKind::StrCat:
        case StmtKind::StrNCat:
            // Both strings are scanned: the source is read out and the
            // destination is scanned for its current terminator.
            push_read(n, check_read(f.in, n.y));
            push_read(n, check_read(f.in, n.x));
            break;
        case StmtKind::MemCpy:
            push_read(n, check_read(f.in, n.y,
                                    resolve_extent(n.extent, ExtentCtx::IndexOrShift)));
            break;
        default: break;
        }
    }
    return out;
}

inline bool is_error(const Diagnostic& d) {
    return d.kind != DiagKind::PotentialReadOverflow;
}

// ---- Reporters ----

inline std::string report_text(const std::vector<Diagnostic>& ds) {
    std::ostringstream os;
    for (const Diagnostic& d : ds)
        os << d.line << ':' << str(d.kind) << ':' << d.buffer.str() << ':'
           << str(d.reason) << ':' << d.message << '\n';
    return os.str();
}

inline nlohmann::ordered_json to_json(const Diagnostic& d) {
    return nlohmann::ordered_json{
        {"stmt_id", d.stmt_id}, {"line", d.line},     {"kind", str(d.kind)},
        {"buffer", d.buffer.str()}, {"reason", str(d.reason)},
        {"message", d.message},
    };
}

inline nlohmann::ordered_json report_json(const std::vector<Diagnostic>& ds) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Diagnostic& d : ds) arr.push_back(to_json(d));
    return arr;
}

} // namespace nullscan
