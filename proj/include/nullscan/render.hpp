#pragma once

#include <sstream>
#include <string>

#include <json.hpp>

#include "nullscan/multi.hpp"
#include "nullscan/solver.hpp"

// Human-readable and JSON renderings of statements and per-point states.

namespace nullscan {

inline std::string stmt_str(const Stmt& n) {
    switch (n.kind) {
    case StmtKind::Nop: return n.loop_header ? "loop" : "nop";
    case StmtKind::Malloc: return n.x + " = malloc(" + n.extent.str() + ")";
    case StmtKind::Calloc: return n.x + " = calloc(" + n.extent.str() + ")";
    case StmtKind::Free: return "free(" + n.x + ")";
    case StmtKind::Assign: return n.x + " = " + n.y;
    case StmtKind::AssignAdd: return n.x + " = " + n.y + " + " + n.extent.str();
    case StmtKind::IndexWriteNull: return n.x + "[" + n.extent.str() + "] = null";
    case StmtKind::IndexWriteChar: return n.x + "[" + n.extent.str() + "] = char";
    case StmtKind::StrCpy: return "strcpy(" + n.x + ", " + n.y + ")";
    case StmtKind::StrCat: return "strcat(" + n.x + ", " + n.y + ")";
    case StmtKind::StrNCpy:
        return "strncpy(" + n.x + ", " + n.y + ", " + n.extent.str() + ")";
    case StmtKind::StrNCat:
        return "strncat(" + n.x + ", " + n.y + ", " + n.extent.str() + ")";
    case StmtKind::MemCpy:
        return "memcpy(" + n.x + ", " + n.y + ", " + n.extent.str() + ")";
    case StmtKind::ReadPtr: return "read " + n.x;
    case StmtKind::ReadIndex: return "read " + n.x + "[" + n.extent.str() + "]";
    case StmtKind::StrLen: return "strlen(" + n.x + ")";
    }
    return "?";
}

// Core-statement listing in topological order; fixture expectations for the
// desugared surface forms are written against this format.
inline std::string dump_core(const Program& p) {
    std::ostringstream os;
    for (std::uint32_t id : topo_order(p.cfg, find_back_edges_checked(p.cfg))) {
        const Stmt& n = p.cfg.node(id);
        if (n.kind == StmtKind::Nop && !n.loop_header) continue;
        os << 'n' << id << " line " << n.line << ": " << stmt_str(n) << '\n';
    }
    return os.str();
}

inline std::string str(const AnalysisState& s) {
    std::ostringstream os;
    os << "  alpha:";
    for (const auto& [b, info] : s.alpha.entries()) {
        if (b.is_undef()) continue;
        os << ' ' << b.str() << "=(" << info.size.str() << ',' << info.nps.str()
           << ')';
    }
    os << "\n  beta:";
    for (const auto& [x, info] : s.beta.entries())
        os << ' ' << x << "=(" << info.buf.str() << ',' << info.offset.str()
           << ')';
    os << '\n';
    return os.str();
}

inline std::string str(const MultiState& s) {
    std::ostringstream os;
    os << "  alpha:";
    for (const auto& [b, info] : s.alpha.entries()) {
        if (b.is_undef()) continue;
        os << ' ' << b.str() << "=(" << info.size.str() << ',' << info.nps.str()
           << ')';
    }
    os << "\n  beta:";
    for (const auto& [x, row] : s.beta.rows()) {
        os << ' ' << x << "={";
        bool first = true;
        for (const auto& [b, e] : row) {
            if (!first) os << ',';
            os << b.str() << ':' << e.offset.str();
            first = false;
        }
        os << '}';
    }
    os << '\n';
    return os.str();
}

inline std::string dump_text(const Program& p, const FlowResult& fr) {
    std::ostringstream os;
    for (std::uint32_t id : fr.order) {
        const Stmt& n = p.cfg.node(id);
        os << 'n' << id << " line " << n.line << ": " << stmt_str(n) << '\n';
        os << " in\n" << str(fr.facts.at(id).in);
        os << " out\n" << str(fr.facts.at(id).out);
    }
    return os.str();
}

inline std::string dump_text(const Program& p, const MultiFlowResult& fr) {
    std::ostringstream os;
    for (std::uint32_t id : fr.order) {
        const Stmt& n = p.cfg.node(id);
        os << 'n' << id << " line " << n.line << ": " << stmt_str(n) << '\n';
        os << " in\n" << str(fr.facts.at(id).in);
        os << " out\n" << str(fr.facts.at(id).out);
    }
    return os.str();
}

// ---- JSON (sizes as numbers, infinity as the string "inf") ----

inline nlohmann::json to_json(Size s) {
    if (s.is_inf()) return "inf";
    return s.value();
}

inline nlohmann::json to_json(const NullPosSet& nps) {
    nlohmann::json arr = nlohmann::json::array();
    for (Size p : nps.elements()) arr.push_back(to_json(p));
    return arr;
}

inline nlohmann::json to_json(const AnalysisState& s) {
    nlohmann::json alpha = nlohmann::json::object();
    for (const auto& [b, info] : s.alpha.entries()) {
        if (b.is_undef()) continue;
        alpha[b.str()] = {{"size", to_json(info.size)}, {"nps", to_json(info.nps)}};
    }
    nlohmann::json beta = nlohmann::json::object();
    for (const auto& [x, info] : s.beta.entries())
        beta[x] = {{"buf", info.buf.str()}, {"offset", to_json(info.offset)}};
    return {{"alpha", alpha}, {"beta", beta}};
}

inline nlohmann::json to_json(const MultiState& s) {
    nlohmann::json alpha = nlohmann::json::object();
    for (const auto& [b, info] : s.alpha.entries()) {
        if (b.is_undef()) continue;
        alpha[b.str()] = {{"size", to_json(info.size)}, {"nps", to_json(info.nps)}};
    }
    nlohmann::json beta = nlohmann::json::object();
    for (const auto& [x, row] : s.beta.rows()) {
        nlohmann::json r = nlohmann::json::object();
        for (const auto& [b, e] : row) r[b.str()] = to_json(e.offset);
        beta[x] = r;
    }
    return {{"alpha", alpha}, {"beta", beta}};
}

template <class Result>
inline nlohmann::json dump_json(const Program& p, const Result& fr) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::uint32_t id : fr.order) {
        const Stmt& n = p.cfg.node(id);
        nodes.push_back({{"id", id},
                         {"line", n.line},
                         {"stmt", stmt_str(n)},
                         {"in", to_json(fr.facts.at(id).in)},
                         {"out", to_json(fr.facts.at(id).out)}});
    }
    return {{"nodes", nodes}};
}

} // namespace nullscan
