#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "nullscan/ir.hpp"
#include "nullscan/transfer.hpp"

// Forward data-flow solver. Back edges are dropped before solving; on the
// resulting DAG a single pass in topological order reaches the fixed point,
// and an optional worklist mode recomputes the same solution iteratively as
// a cross-check.

namespace nullscan {

enum class SolveMode { SinglePass, Worklist, Cyclic };

struct NodeFacts {
    AnalysisState in;
    AnalysisState out;
    bool fresh_overflow = false;
    bool write_through_undef = false;
    bool writes = false;
    BufferId dest = BufferId::undef();

    friend bool operator==(const NodeFacts&, const NodeFacts&) = default;
};

struct FlowResult {
    std::map<std::uint32_t, NodeFacts> facts;
    std::vector<std::uint32_t> order;   // topological order used
    std::vector<Edge> back_edges;       // dropped loop latches

    friend bool operator==(const FlowResult& a, const FlowResult& b) {
        return a.facts == b.facts;
    }
};

namespace detail {

inline AnalysisState meet_preds(const Cfg& g, std::uint32_t id,
                                const std::vector<Edge>& dropped,
                                const std::map<std::uint32_t, NodeFacts>& facts,
                                const AnalysisState& boundary) {
    bool first = true;
    AnalysisState in;
    for (std::uint32_t p : g.preds(id)) {
        bool is_dropped = false;
        for (const Edge& e : dropped)
            if (e.first == p && e.second == id) is_dropped = true;
        if (is_dropped) continue;
        auto it = facts.find(p);
        if (it == facts.end()) continue; // worklist: predecessor not seen yet
        in = first ? it->second.out : meet_state(in, it->second.out);
        first = false;
    }
    if (id == g.entry()) in = first ? boundary : meet_state(in, boundary);
    return in;
}

} // namespace detail

inline FlowResult solve(const Cfg& g, const AnalysisState& boundary,
                        SolveMode mode = SolveMode::SinglePass) {
    FlowResult r;
    r.back_edges = find_back_edges_checked(g);
    r.order = topo_order(g, r.back_edges);
    // Cyclic mode keeps the latches: node facts then approximate every loop
    // iteration rather than just the first, at the cost of iterating to a
    // fixed point over the cyclic graph.
    const std::vector<Edge> dropped =
        mode == SolveMode::Cyclic ? std::vector<Edge>{} : r.back_edges;

    if (mode == SolveMode::SinglePass) {
        for (std::uint32_t id : r.order) {
            NodeFacts f;
            f.in = detail::meet_preds(g, id, dropped, r.facts, boundary);
            TransferOutcome t = update_maps(f.in, g.node(id));
            f.out = std::move(t.state);
            f.fresh_overflow = t.fresh_overflow;
            f.write_through_undef = t.write_through_undef;
            f.writes = t.writes;
            f.dest = t.dest;
            r.facts[id] = std::move(f);
        }
        return r;
    }

    // Worklist: iterate until no out-state changes. Since the graph is a
    // DAG this converges; the fixed point is unique, so the result must
    // agree with the single pass.
    std::set<std::uint32_t> work(r.order.begin(), r.order.end());
    std::size_t budget = (g.nodes().size() + 1) * 4096;
    while (!work.empty()) {
        if (budget-- == 0)
            throw std::runtime_error("data-flow solve did not converge");
        std::uint32_t id = *work.begin();
        work.erase(work.begin());
        NodeFacts f;
        f.in = detail::meet_preds(g, id, dropped, r.facts, boundary);
        TransferOutcome t = update_maps(f.in, g.node(id));
        f.out = std::move(t.state);
        f.fresh_overflow = t.fresh_overflow;
        f.write_through_undef = t.write_through_undef;
        f.writes = t.writes;
        f.dest = t.dest;
        auto it = r.facts.find(id);
        bool changed = it == r.facts.end() || !(it->second == f);
        r.facts[id] = std::move(f);
        if (changed)
            for (std::uint32_t s : g.succs(id)) {
                bool is_dropped = false;
                for (const Edge& e : dropped)
                    if (e.first == id && e.second == s) is_dropped = true;
                if (!is_dropped) work.insert(s);
            }
    }
    return r;
}

// Verify that the computed facts are a fixed point: each node's in-state is
// the meet of its (non-dropped) predecessors' out-states and its out-state
// is the transfer of its in-state.
inline bool verify_fixed_point(const Cfg& g, const AnalysisState& boundary,
                               const FlowResult& r,
                               SolveMode mode = SolveMode::SinglePass) {
    const std::vector<Edge> dropped =
        mode == SolveMode::Cyclic ? std::vector<Edge>{} : r.back_edges;
    for (const Stmt& s : g.nodes()) {
        auto it = r.facts.find(s.id);
        if (it == r.facts.end()) return false;
        AnalysisState in =
            detail::meet_preds(g, s.id, dropped, r.facts, boundary);
        if (!(in == it->second.in)) return false;
        TransferOutcome t = update_maps(in, s);
        if (!(t.state == it->second.out)) return false;
    }
    return true;
}

} // namespace nullscan
