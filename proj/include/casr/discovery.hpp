#pragma once

#include "casr/ci.hpp"
#include "casr/dataset.hpp"
#include "casr/error.hpp"
#include "casr/graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace casr {

enum class DiscoveryAlgorithm { Pc, Fci };

inline std::string to_string(DiscoveryAlgorithm a) {
    return a == DiscoveryAlgorithm::Pc ? "pc" : "fci";
}

inline DiscoveryAlgorithm discovery_algorithm_from_string(const std::string& s) {
    if (s == "pc") return DiscoveryAlgorithm::Pc;
    if (s == "fci") return DiscoveryAlgorithm::Fci;
    throw ConfigError("unknown discovery algorithm: " + s + " (expected pc or fci)");
}

struct DiscoveryConfig {
    DiscoveryAlgorithm algorithm = DiscoveryAlgorithm::Pc;
    CiTestConfig ci;
    std::optional<int> max_cond_set;   // cap on conditioning-set size
    std::optional<MixedGraph> oracle;  // ground-truth DAG replaces statistical tests
    int jobs = 1;

    void validate() const {
        ci.validate();
        if (max_cond_set && *max_cond_set < 0)
            throw ConfigError("discovery.max_cond_set must be >= 0");
        if (jobs < 1) throw ConfigError("discovery.jobs must be >= 1");
    }
};

struct DiscoveryEvent {
    std::string event;  // remove | orient | conflict
    std::string x, y;
    std::string z;      // third node of a triple, when applicable
    std::vector<std::string> sepset;
    std::optional<double> p;
    std::string rule;   // v-structure | meek-r1..r4 | fci-r0..r4 | pds
};

inline nlohmann::json to_json(const DiscoveryEvent& e) {
    nlohmann::json j;
    j["event"] = e.event;
    j["x"] = e.x;
    j["y"] = e.y;
    if (!e.z.empty()) j["z"] = e.z;
    if (e.event == "remove") j["sepset"] = e.sepset;
    if (e.p) j["p"] = *e.p;
    if (!e.rule.empty()) j["rule"] = e.rule;
    return j;
}

struct DiscoveryOutput {
    MixedGraph graph;  // CPDAG for PC, PAG for FCI
    SepsetMap sepsets;
    std::vector<DiscoveryEvent> log;
};

// CI abstraction consumed by the skeleton search: statistical tests on data,
// or d-separation on a ground-truth DAG. Must be pure and thread-safe.
using CiFunction =
    std::function<CiResult(const std::string&, const std::string&, const std::set<std::string>&)>;

inline CiFunction make_data_ci(const DiscreteDataset& data, const CiTestConfig& config) {
    return [&data, config](const std::string& x, const std::string& y,
                           const std::set<std::string>& z) { return ci_test(data, x, y, z, config); };
}

// Oracle: x indep y | z iff d-separated in the true DAG. The DAG may contain
// extra (latent) nodes beyond the observed set under search.
inline CiFunction make_oracle_ci(const MixedGraph& truth) {
    if (!truth.is_dag()) throw ConfigError("oracle graph must be a fully directed DAG");
    return [&truth](const std::string& x, const std::string& y, const std::set<std::string>& z) {
        CiResult r;
        r.independent = truth.d_separated(x, y, z);
        r.p_value = r.independent ? 1.0 : 0.0;
        r.reliable = true;
        return r;
    };
}

namespace detail {

struct RemovalDecision {
    bool found = false;
    std::set<std::string> sepset;
    double p = 1.0;
};

// First size-k subset combination walker over a sorted candidate list.
inline bool next_combination(std::vector<int>& idx, int n) {
    const int k = static_cast<int>(idx.size());
    for (int i = k - 1; i >= 0; --i) {
        if (idx[static_cast<std::size_t>(i)] < n - (k - i)) {
            ++idx[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j)
                idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
            return true;
        }
    }
    return false;
}

template <typename Fn>
void for_each_subset_of_size(const std::vector<std::string>& candidates, int k, Fn fn) {
    const int n = static_cast<int>(candidates.size());
    if (k > n) return;
    if (k == 0) {
        fn(std::set<std::string>{});
        return;
    }
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    do {
        std::set<std::string> s;
        for (int i : idx) s.insert(candidates[static_cast<std::size_t>(i)]);
        if (fn(s)) return;  // fn returns true to stop
    } while (next_combination(idx, n));
}

// Evaluate removal decisions for a list of ordered pairs; parallelizable
// because every test depends only on the frozen level-start state.
inline std::vector<RemovalDecision> evaluate_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::map<std::string, std::vector<std::string>>& frozen_adj, int level,
    const CiFunction& ci, int jobs) {
    std::vector<RemovalDecision> decisions(pairs.size());
    auto eval_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& [x, y] = pairs[i];
            std::vector<std::string> candidates;
            for (const auto& c : frozen_adj.at(x))
                if (c != y) candidates.push_back(c);
            if (static_cast<int>(candidates.size()) < level) continue;
            for_each_subset_of_size(candidates, level, [&](const std::set<std::string>& s) {
                const CiResult r = ci(x, y, s);
                if (r.independent) {
                    decisions[i] = {true, s, r.p_value};
                    return true;
                }
                return false;
            });
        }
    };
    if (jobs <= 1 || pairs.size() < 2) {
        eval_range(0, pairs.size());
    } else {
        const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(jobs), pairs.size());
        std::vector<std::future<void>> futures;
        const std::size_t chunk = (pairs.size() + nw - 1) / nw;
        for (std::size_t w = 0; w < nw; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(pairs.size(), lo + chunk);
            if (lo >= hi) break;
            futures.push_back(std::async(std::launch::async, eval_range, lo, hi));
        }
        for (auto& f : futures) f.get();
    }
    return decisions;
}

inline void require_all_discrete(const DiscreteDataset& data) {
    for (const auto& v : data.schema())
        if (!v.discrete())
            throw DataError("discovery: variable '" + v.name +
                            "' is numeric-outcome; bin it first (features module)");
}

}  // namespace detail

// PC-stable skeleton search: start from the complete undirected graph; at
// level d test every ordered adjacent pair (x, y) against all size-d subsets
// of adj(x)\{y}, with adjacency sets frozen per level. First independence
// removes the edge and records the separating set.
inline std::pair<MixedGraph, SepsetMap> pc_skeleton_from_ci(
    const std::vector<std::string>& variables, const CiFunction& ci, const DiscoveryConfig& config,
    std::vector<DiscoveryEvent>* log = nullptr) {
    config.validate();
    if (variables.size() < 2) throw DataError("discovery needs at least 2 variables");
    MixedGraph g = MixedGraph::complete_undirected(variables);
    SepsetMap sepsets;

    for (int level = 0;; ++level) {
        if (config.max_cond_set && level > *config.max_cond_set) break;

        // freeze adjacency sets for this level
        std::map<std::string, std::vector<std::string>> frozen;
        for (const auto& n : g.nodes()) {
            std::vector<std::string> adj;
            for (int j : g.adjacent_idx(g.index_of(n))) adj.push_back(g.node_name(j));
            frozen[n] = std::move(adj);
        }

        std::vector<std::pair<std::string, std::string>> pairs;
        bool any_candidate = false;
        for (const auto& x : g.nodes()) {
            for (const auto& y : frozen[x]) {
                pairs.emplace_back(x, y);
                if (static_cast<int>(frozen[x].size()) - 1 >= level) any_candidate = true;
            }
        }
        if (!any_candidate) break;

        const auto decisions = detail::evaluate_pairs(pairs, frozen, level, ci, config.jobs);

        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (!decisions[i].found) continue;
            const auto& [x, y] = pairs[i];
            if (!g.has_edge(x, y)) continue;  // already removed via the mirrored pair
            g.remove_edge(x, y);
            sepsets.set(x, y, decisions[i].sepset);
            if (log) {
                DiscoveryEvent e;
                e.event = "remove";
                e.x = std::min(x, y);
                e.y = std::max(x, y);
                e.sepset.assign(decisions[i].sepset.begin(), decisions[i].sepset.end());
                e.p = decisions[i].p;
                log->push_back(std::move(e));
            }
        }
    }
    return {std::move(g), std::move(sepsets)};
}

inline std::pair<MixedGraph, SepsetMap> pc_skeleton(const DiscreteDataset& data,
                                                    const DiscoveryConfig& config) {
    config.validate();
    if (config.oracle)
        return pc_skeleton_from_ci(data.variable_names(), make_oracle_ci(*config.oracle), config);
    detail::require_all_discrete(data);
    return pc_skeleton_from_ci(data.variable_names(), make_data_ci(data, config.ci), config);
}

// Collider orientation: for each unshielded triple x - z - y with
// z not in sepset(x, y), demand x -> z <- y. Conflicting arrowhead demands on
// one edge leave that edge undirected (logged).
inline MixedGraph orient_v_structures(const MixedGraph& skeleton, const SepsetMap& sepsets,
                                      std::vector<DiscoveryEvent>* log = nullptr) {
    MixedGraph g = skeleton;
    // demanded arrowheads per edge: key (a, b) a < b -> {at_a, at_b}
    std::map<std::pair<int, int>, std::pair<bool, bool>> demands;
    auto demand_arrow = [&](int frm, int at) {
        int a = frm, b = at;
        bool at_b = true;
        if (a > b) { std::swap(a, b); at_b = false; }
        auto& d = demands[{a, b}];
        (at_b ? d.second : d.first) = true;
    };

    const int n = g.node_count();
    for (int z = 0; z < n; ++z) {
        const auto& adj = g.adjacent_idx(z);
        for (auto xit = adj.begin(); xit != adj.end(); ++xit) {
            for (auto yit = std::next(xit); yit != adj.end(); ++yit) {
                const int x = *xit, y = *yit;
                if (g.has_edge_idx(x, y)) continue;  // shielded
                const std::string& xn = g.node_name(x);
                const std::string& yn = g.node_name(y);
                const std::string& zn = g.node_name(z);
                if (!sepsets.contains(xn, yn)) continue;
                if (sepsets.get(xn, yn).count(zn)) continue;
                demand_arrow(x, z);
                demand_arrow(y, z);
                if (log) {
                    DiscoveryEvent e;
                    e.event = "orient";
                    e.rule = "v-structure";
                    e.x = xn;
                    e.y = yn;
                    e.z = zn;
                    log->push_back(std::move(e));
                }
            }
        }
    }

    for (const auto& [edge, d] : demands) {
        const auto& [a, b] = edge;
        if (d.first && d.second) {
            if (log) {
                DiscoveryEvent e;
                e.event = "conflict";
                e.rule = "v-structure";
                e.x = g.node_name(a);
                e.y = g.node_name(b);
                log->push_back(std::move(e));
            }
            continue;  // left undirected
        }
        if (d.second) {
            g.set_mark_idx(b, a, Mark::Tail);
            g.set_mark_idx(a, b, Mark::Arrow);
        } else {
            g.set_mark_idx(a, b, Mark::Tail);
            g.set_mark_idx(b, a, Mark::Arrow);
        }
    }
    return g;
}

// Meek orientation-propagation rules applied to a fixpoint.
//   R1: a -> b, b - c, a not adjacent c        =>  b -> c
//   R2: a -> c -> b, a - b                     =>  a -> b
//   R3: a - b, a - c, a - d, c -> b, d -> b, c not adjacent d  =>  a -> b
//   R4: a - b, a - c, c -> d, d -> b, c not adjacent b, a adjacent d  =>  a -> b
inline MixedGraph meek_closure(const MixedGraph& pdag, std::vector<DiscoveryEvent>* log = nullptr) {
    MixedGraph g = pdag;
    if (g.has_directed_cycle()) throw DataError("meek_closure: input has a directed cycle");

    const int n = g.node_count();
    auto nonadjacent = [&](int u, int v) { return u != v && !g.has_edge_idx(u, v); };

    auto try_orient = [&](int a, int b) -> const char* {
        // R1
        for (int c : g.adjacent_idx(a))
            if (g.is_directed_idx(c, a) && nonadjacent(c, b)) return "meek-r1";
        // R2
        for (int c : g.adjacent_idx(a))
            if (g.is_directed_idx(a, c) && g.is_directed_idx(c, b)) return "meek-r2";
        // R3
        {
            std::vector<int> into_b;
            for (int c : g.adjacent_idx(a))
                if (g.is_undirected_idx(a, c) && g.is_directed_idx(c, b)) into_b.push_back(c);
            for (std::size_t i = 0; i < into_b.size(); ++i)
                for (std::size_t j = i + 1; j < into_b.size(); ++j)
                    if (nonadjacent(into_b[i], into_b[j])) return "meek-r3";
        }
        // R4
        for (int c : g.adjacent_idx(a)) {
            if (!g.is_undirected_idx(a, c) || !nonadjacent(c, b)) continue;
            for (int d : g.adjacent_idx(c))
                if (g.is_directed_idx(c, d) && g.is_directed_idx(d, b) && g.has_edge_idx(a, d))
                    return "meek-r4";
        }
        return nullptr;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < n && !changed; ++a) {
            for (int b : g.adjacent_idx(a)) {
                if (!g.is_undirected_idx(a, b)) continue;
                const char* rule = try_orient(a, b);
                if (!rule) continue;
                g.set_mark_idx(b, a, Mark::Tail);
                g.set_mark_idx(a, b, Mark::Arrow);
                if (log) {
                    DiscoveryEvent e;
                    e.event = "orient";
                    e.rule = rule;
                    e.x = g.node_name(a);
                    e.y = g.node_name(b);
                    log->push_back(std::move(e));
                }
                changed = true;
                break;
            }
        }
    }
    if (g.has_directed_cycle())
        throw DataError("meek_closure: orientation produced a cycle (inconsistent input)");
    return g;
}

inline DiscoveryOutput pc_from_ci(const std::vector<std::string>& variables, const CiFunction& ci,
                                  const DiscoveryConfig& config) {
    DiscoveryOutput out{MixedGraph{}, SepsetMap{}, {}};
    auto [skeleton, sepsets] = pc_skeleton_from_ci(variables, ci, config, &out.log);
    out.graph = meek_closure(orient_v_structures(skeleton, sepsets, &out.log), &out.log);
    out.sepsets = std::move(sepsets);
    return out;
}

// Peter-Clark algorithm; returns a CPDAG.
inline DiscoveryOutput pc(const DiscreteDataset& data, const DiscoveryConfig& config) {
    config.validate();
    if (config.oracle)
        return pc_from_ci(data.variable_names(), make_oracle_ci(*config.oracle), config);
    detail::require_all_discrete(data);
    return pc_from_ci(data.variable_names(), make_data_ci(data, config.ci), config);
}

// The CPDAG of a DAG: its skeleton plus v-structures, closed under the Meek
// rules. Used as the ground-truth representative of the Markov class.
inline MixedGraph dag_to_cpdag(const MixedGraph& dag) {
    if (!dag.is_dag()) throw DataError("dag_to_cpdag: input must be a fully directed DAG");
    MixedGraph skeleton(dag.nodes());
    for (const auto& e : dag.edges())
        skeleton.add_edge_idx(e.a, e.b, Mark::Tail, Mark::Tail);
    MixedGraph oriented = skeleton;
    const int n = dag.node_count();
    for (int z = 0; z < n; ++z) {
        const std::set<int> parent_set = dag.parents_idx(z);
        std::vector<int> pa(parent_set.begin(), parent_set.end());
        for (std::size_t i = 0; i < pa.size(); ++i) {
            for (std::size_t j = i + 1; j < pa.size(); ++j) {
                if (dag.has_edge_idx(pa[i], pa[j])) continue;
                for (int x : {pa[i], pa[j]}) {
                    if (!oriented.is_directed_idx(x, z)) {
                        oriented.set_mark_idx(z, x, Mark::Tail);
                        oriented.set_mark_idx(x, z, Mark::Arrow);
                    }
                }
            }
        }
    }
    return meek_closure(oriented);
}

namespace detail {

// Possible-D-Sep(x): nodes reachable by a path on which every inner vertex is
// either a collider or part of a triangle with its path neighbours.
inline std::set<int> possible_d_sep(const MixedGraph& g, int x) {
    std::set<int> pds;
    std::set<std::pair<int, int>> visited;  // (prev, cur)
    std::deque<std::pair<int, int>> frontier;
    for (int n : g.adjacent_idx(x)) {
        frontier.push_back({x, n});
        pds.insert(n);
    }
    while (!frontier.empty()) {
        auto [prev, cur] = frontier.front();
        frontier.pop_front();
        if (!visited.insert({prev, cur}).second) continue;
        for (int next : g.adjacent_idx(cur)) {
            if (next == prev || next == x) continue;
            const bool collider = g.mark_at_idx(prev, cur) == Mark::Arrow &&
                                  g.mark_at_idx(next, cur) == Mark::Arrow;
            const bool triangle = g.has_edge_idx(prev, next);
            if (collider || triangle) {
                pds.insert(next);
                frontier.push_back({cur, next});
            }
        }
    }
    pds.erase(x);
    return pds;
}

inline void circle_all_marks(MixedGraph& g) {
    for (const auto& e : g.edges()) {
        g.set_mark_idx(e.b, e.a, Mark::Circle);
        g.set_mark_idx(e.a, e.b, Mark::Circle);
    }
}

// R0 for FCI: arrowheads at unshielded colliders, leaving the far ends as
// they are (circles after re-initialization).
inline void fci_r0(MixedGraph& g, const SepsetMap& sepsets, std::vector<DiscoveryEvent>* log) {
    const int n = g.node_count();
    for (int z = 0; z < n; ++z) {
        const auto& adj = g.adjacent_idx(z);
        for (auto xit = adj.begin(); xit != adj.end(); ++xit) {
            for (auto yit = std::next(xit); yit != adj.end(); ++yit) {
                const int x = *xit, y = *yit;
                if (g.has_edge_idx(x, y)) continue;
                const std::string& xn = g.node_name(x);
                const std::string& yn = g.node_name(y);
                if (!sepsets.contains(xn, yn)) continue;
                if (sepsets.get(xn, yn).count(g.node_name(z))) continue;
                g.set_mark_idx(x, z, Mark::Arrow);
                g.set_mark_idx(y, z, Mark::Arrow);
                if (log) {
                    DiscoveryEvent e;
                    e.event = "orient";
                    e.rule = "fci-r0";
                    e.x = xn;
                    e.y = yn;
                    e.z = g.node_name(z);
                    log->push_back(std::move(e));
                }
            }
        }
    }
}

// FCI orientation rules R1-R4 (selection-bias rules R5-R10 are out of scope).
inline void fci_rules(MixedGraph& g, const SepsetMap& sepsets,
                      std::vector<DiscoveryEvent>* log) {
    const int n = g.node_count();
    auto note = [&](const char* rule, int a, int b) {
        if (!log) return;
        DiscoveryEvent e;
        e.event = "orient";
        e.rule = rule;
        e.x = g.node_name(a);
        e.y = g.node_name(b);
        log->push_back(std::move(e));
    };
    auto arrow_into = [&](int frm, int at) {
        return g.has_edge_idx(frm, at) && g.mark_at_idx(frm, at) == Mark::Arrow;
    };
    auto directed = [&](int a, int b) {
        return g.has_edge_idx(a, b) && g.mark_at_idx(b, a) == Mark::Tail &&
               g.mark_at_idx(a, b) == Mark::Arrow;
    };

    bool changed = true;
    while (changed) {
        changed = false;

        // R1: a *-> b o-* c, a not adjacent c  =>  b -> c
        for (int b = 0; b < n && !changed; ++b) {
            for (int c : g.adjacent_idx(b)) {
                if (g.mark_at_idx(c, b) != Mark::Circle) continue;
                for (int a : g.adjacent_idx(b)) {
                    if (a == c || g.has_edge_idx(a, c)) continue;
                    if (!arrow_into(a, b)) continue;
                    g.set_mark_idx(c, b, Mark::Tail);
                    g.set_mark_idx(b, c, Mark::Arrow);
                    note("fci-r1", b, c);
                    changed = true;
                    break;
                }
                if (changed) break;
            }
        }
        if (changed) continue;

        // R2: (a -> b *-> c or a *-> b -> c) and a *-o c  =>  a *-> c
        for (int a = 0; a < n && !changed; ++a) {
            for (int c : g.adjacent_idx(a)) {
                if (g.mark_at_idx(a, c) != Mark::Circle) continue;
                for (int b : g.adjacent_idx(a)) {
                    if (b == c || !g.has_edge_idx(b, c)) continue;
                    const bool chain1 = directed(a, b) && arrow_into(b, c);
                    const bool chain2 = arrow_into(a, b) && directed(b, c);
                    if (chain1 || chain2) {
                        g.set_mark_idx(a, c, Mark::Arrow);
                        note("fci-r2", a, c);
                        changed = true;
                        break;
                    }
                }
                if (changed) break;
            }
        }
        if (changed) continue;

        // R3: a *-> b <-* c, a *-o d o-* c, a not adjacent c, d *-o b  =>  d *-> b
        for (int d = 0; d < n && !changed; ++d) {
            for (int b : g.adjacent_idx(d)) {
                if (g.mark_at_idx(d, b) != Mark::Circle) continue;
                const auto& adj_d = g.adjacent_idx(d);
                for (int a : adj_d) {
                    if (a == b || g.mark_at_idx(a, d) != Mark::Circle) continue;
                    if (!arrow_into(a, b)) continue;
                    for (int c : adj_d) {
                        if (c == b || c == a || g.mark_at_idx(c, d) != Mark::Circle) continue;
                        if (!arrow_into(c, b)) continue;
                        if (g.has_edge_idx(a, c)) continue;
                        g.set_mark_idx(d, b, Mark::Arrow);
                        note("fci-r3", d, b);
                        changed = true;
                        break;
                    }
                    if (changed) break;
                }
                if (changed) break;
            }
        }
        if (changed) continue;

        // R4: discriminating path <t, ..., a, b, c> for b with b o-* c:
        // orient b -> c if b is in sepset(t, c), else a <-> b <-> c.
        for (int b = 0; b < n && !changed; ++b) {
            for (int c : g.adjacent_idx(b)) {
                if (g.mark_at_idx(c, b) != Mark::Circle) continue;
                for (int a : g.adjacent_idx(b)) {
                    if (a == c) continue;
                    if (!arrow_into(c, a) && g.mark_at_idx(b, a) != Mark::Arrow) continue;
                    if (g.mark_at_idx(b, a) != Mark::Arrow) continue;  // collider end at a
                    if (!directed(a, c)) continue;                     // a is a parent of c
                    // DFS leftwards over interior colliders that parent c.
                    std::set<int> seen{a, b, c};
                    std::vector<int> stack{a};
                    int theta = -1;
                    while (!stack.empty() && theta < 0) {
                        const int u = stack.back();
                        stack.pop_back();
                        for (int t : g.adjacent_idx(u)) {
                            if (seen.count(t)) continue;
                            if (g.mark_at_idx(t, u) != Mark::Arrow) continue;
                            if (!g.has_edge_idx(t, c)) {
                                theta = t;
                                break;
                            }
                            if (directed(t, c) && g.mark_at_idx(u, t) == Mark::Arrow) {
                                seen.insert(t);
                                stack.push_back(t);
                            }
                        }
                    }
                    if (theta < 0) continue;
                    const std::string& tn = g.node_name(theta);
                    const std::string& cn = g.node_name(c);
                    const bool b_separates = sepsets.contains(tn, cn) &&
                                             sepsets.get(tn, cn).count(g.node_name(b));
                    if (b_separates) {
                        g.set_mark_idx(c, b, Mark::Tail);
                        g.set_mark_idx(b, c, Mark::Arrow);
                    } else {
                        g.set_mark_idx(b, a, Mark::Arrow);
                        g.set_mark_idx(a, b, Mark::Arrow);
                        g.set_mark_idx(c, b, Mark::Arrow);
                        g.set_mark_idx(b, c, Mark::Arrow);
                    }
                    note("fci-r4", b, c);
                    changed = true;
                    break;
                }
                if (changed) break;
            }
        }
    }
}

}  // namespace detail

// Fast Causal Inference. Runs the PC-stable skeleton, prunes edges against
// Possible-D-Sep sets, then re-orients from circles with R0 and rules R1-R4.
// Returns a PAG over circle/arrow/tail marks.
inline DiscoveryOutput fci_from_ci(const std::vector<std::string>& variables, const CiFunction& ci,
                                   const DiscoveryConfig& config) {
    DiscoveryOutput out{MixedGraph{}, SepsetMap{}, {}};
    auto [skeleton, sepsets] = pc_skeleton_from_ci(variables, ci, config, &out.log);

    // Provisional colliders over circle marks, to delimit Possible-D-Sep.
    MixedGraph g = skeleton;
    detail::circle_all_marks(g);
    detail::fci_r0(g, sepsets, nullptr);

    // Possible-D-Sep pruning: re-test every remaining edge against subsets of
    // pds(x) and pds(y).
    for (const auto& e : skeleton.edges()) {
        const std::string xn = skeleton.node_name(e.a);
        const std::string yn = skeleton.node_name(e.b);
        if (!g.has_edge(xn, yn)) continue;
        bool removed = false;
        for (const auto& [from, other] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
            if (removed) break;
            std::vector<std::string> candidates;
            for (int i : detail::possible_d_sep(g, from))
                if (i != other) candidates.push_back(g.node_name(i));
            const int cap = config.max_cond_set
                                ? std::min<int>(*config.max_cond_set,
                                                static_cast<int>(candidates.size()))
                                : static_cast<int>(candidates.size());
            for (int k = 0; k <= cap && !removed; ++k) {
                detail::for_each_subset_of_size(candidates, k, [&](const std::set<std::string>& s) {
                    const CiResult r = ci(xn, yn, s);
                    if (r.independent) {
                        g.remove_edge(xn, yn);
                        sepsets.set(xn, yn, s);
                        DiscoveryEvent ev;
                        ev.event = "remove";
                        ev.rule = "pds";
                        ev.x = std::min(xn, yn);
                        ev.y = std::max(xn, yn);
                        ev.sepset.assign(s.begin(), s.end());
                        ev.p = r.p_value;
                        out.log.push_back(std::move(ev));
                        removed = true;
                        return true;
                    }
                    return false;
                });
            }
        }
    }

    // Re-initialize all endpoint marks and orient from scratch.
    detail::circle_all_marks(g);
    detail::fci_r0(g, sepsets, &out.log);
    detail::fci_rules(g, sepsets, &out.log);

    out.graph = std::move(g);
    out.sepsets = std::move(sepsets);
    return out;
}

inline DiscoveryOutput fci(const DiscreteDataset& data, const DiscoveryConfig& config) {
    config.validate();
    if (config.oracle)
        return fci_from_ci(data.variable_names(), make_oracle_ci(*config.oracle), config);
    detail::require_all_discrete(data);
    return fci_from_ci(data.variable_names(), make_data_ci(data, config.ci), config);
}

inline DiscoveryOutput discover(const DiscreteDataset& data, const DiscoveryConfig& config) {
    return config.algorithm == DiscoveryAlgorithm::Pc ? pc(data, config) : fci(data, config);
}

}  // namespace casr
