#pragma once

#include "casr/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace casr {

// Endpoint mark of a mixed-graph edge. tail--tail is an undirected edge,
// tail->arrow a directed one; circle marks appear in PAGs.
enum class Mark { Tail, Arrow, Circle };

inline std::string to_string(Mark m) {
    switch (m) {
        case Mark::Tail: return "tail";
        case Mark::Arrow: return "arrow";
        case Mark::Circle: return "circle";
    }
    return "?";
}

inline Mark mark_from_string(const std::string& s) {
    if (s == "tail") return Mark::Tail;
    if (s == "arrow") return Mark::Arrow;
    if (s == "circle") return Mark::Circle;
    throw DataError("unknown endpoint mark: " + s);
}

// One graph type serves skeleton, DAG, CPDAG and PAG views: every edge is an
// unordered node pair with a mark at each end. Nodes are kept sorted so any
// iteration over the graph is reproducible.
class MixedGraph {
public:
    struct Edge {
        int a, b;          // a < b (internal indices)
        Mark at_a, at_b;   // mark at each endpoint
    };

    MixedGraph() = default;

    explicit MixedGraph(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
        std::sort(nodes_.begin(), nodes_.end());
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            if (nodes_[i] == nodes_[i - 1]) throw DataError("duplicate node: " + nodes_[i]);
        adj_.assign(nodes_.size(), {});
    }

    static MixedGraph complete_undirected(std::vector<std::string> nodes) {
        MixedGraph g(std::move(nodes));
        const int n = g.node_count();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) g.add_edge_idx(i, j, Mark::Tail, Mark::Tail);
        return g;
    }

    int node_count() const { return static_cast<int>(nodes_.size()); }
    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::string& node_name(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }

    bool has_node(const std::string& name) const {
        return std::binary_search(nodes_.begin(), nodes_.end(), name);
    }

    int index_of(const std::string& name) const {
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), name);
        if (it == nodes_.end() || *it != name) throw DataError("unknown node: " + name);
        return static_cast<int>(it - nodes_.begin());
    }

    std::size_t edge_count() const { return edges_.size(); }

    // --- edge mutation (index form) ---

    void add_edge_idx(int a, int b, Mark at_a, Mark at_b) {
        check_idx(a);
        check_idx(b);
        if (a == b) throw DataError("self edge on node " + nodes_[static_cast<std::size_t>(a)]);
        if (a > b) { std::swap(a, b); std::swap(at_a, at_b); }
        if (edges_.count({a, b}))
            throw DataError("duplicate edge " + nodes_[static_cast<std::size_t>(a)] + " - " +
                            nodes_[static_cast<std::size_t>(b)]);
        edges_[{a, b}] = {at_a, at_b};
        adj_[static_cast<std::size_t>(a)].insert(b);
        adj_[static_cast<std::size_t>(b)].insert(a);
    }

    void remove_edge_idx(int a, int b) {
        if (a > b) std::swap(a, b);
        if (!edges_.erase({a, b})) return;
        adj_[static_cast<std::size_t>(a)].erase(b);
        adj_[static_cast<std::size_t>(b)].erase(a);
    }

    bool has_edge_idx(int a, int b) const {
        if (a > b) std::swap(a, b);
        return edges_.count({a, b}) != 0;
    }

    // Mark at the `at` end of the edge between `frm` and `at`.
    Mark mark_at_idx(int frm, int at) const {
        const Edge e = edge_idx(frm, at);
        return (at == e.b) ? e.at_b : e.at_a;
    }

    void set_mark_idx(int frm, int at, Mark m) {
        int a = frm, b = at;
        bool at_is_b = true;
        if (a > b) { std::swap(a, b); at_is_b = false; }
        auto it = edges_.find({a, b});
        if (it == edges_.end()) throw DataError("no such edge");
        if (at_is_b)
            it->second.at_b = m;
        else
            it->second.at_a = m;
    }

    Edge edge_idx(int a, int b) const {
        bool flip = a > b;
        if (flip) std::swap(a, b);
        auto it = edges_.find({a, b});
        if (it == edges_.end())
            throw DataError("no edge between " + nodes_[static_cast<std::size_t>(a)] + " and " +
                            nodes_[static_cast<std::size_t>(b)]);
        return {a, b, it->second.at_a, it->second.at_b};
    }

    bool is_directed_idx(int a, int b) const {  // a -> b
        if (!has_edge_idx(a, b)) return false;
        return mark_at_idx(b, a) == Mark::Tail && mark_at_idx(a, b) == Mark::Arrow;
    }

    bool is_undirected_idx(int a, int b) const {
        if (!has_edge_idx(a, b)) return false;
        return mark_at_idx(b, a) == Mark::Tail && mark_at_idx(a, b) == Mark::Tail;
    }

    const std::set<int>& adjacent_idx(int i) const {
        check_idx(i);
        return adj_[static_cast<std::size_t>(i)];
    }

    std::set<int> parents_idx(int i) const {
        std::set<int> out;
        for (int j : adjacent_idx(i))
            if (is_directed_idx(j, i)) out.insert(j);
        return out;
    }

    std::set<int> children_idx(int i) const {
        std::set<int> out;
        for (int j : adjacent_idx(i))
            if (is_directed_idx(i, j)) out.insert(j);
        return out;
    }

    // --- name-based convenience API ---

    void add_edge(const std::string& a, const std::string& b, Mark at_a, Mark at_b) {
        add_edge_idx(index_of(a), index_of(b), at_a, at_b);
    }
    void add_directed(const std::string& a, const std::string& b) {
        add_edge(a, b, Mark::Tail, Mark::Arrow);
    }
    void add_undirected(const std::string& a, const std::string& b) {
        add_edge(a, b, Mark::Tail, Mark::Tail);
    }
    void remove_edge(const std::string& a, const std::string& b) {
        remove_edge_idx(index_of(a), index_of(b));
    }
    bool has_edge(const std::string& a, const std::string& b) const {
        return has_node(a) && has_node(b) && has_edge_idx(index_of(a), index_of(b));
    }
    bool is_directed(const std::string& a, const std::string& b) const {
        return has_edge(a, b) && is_directed_idx(index_of(a), index_of(b));
    }
    bool is_undirected(const std::string& a, const std::string& b) const {
        return has_edge(a, b) && is_undirected_idx(index_of(a), index_of(b));
    }
    Mark mark_at(const std::string& frm, const std::string& at) const {
        return mark_at_idx(index_of(frm), index_of(at));
    }

    std::set<std::string> parents(const std::string& node) const {
        return names(parents_idx(index_of(node)));
    }

    std::set<std::string> children(const std::string& node) const {
        return names(children_idx(index_of(node)));
    }

    std::set<std::string> adjacent(const std::string& node) const {
        return names(adjacent_idx(index_of(node)));
    }

    // Transitive closure over directed (tail->arrow) edges, excluding the
    // node itself. Requires the directed part to be acyclic.
    std::set<std::string> descendants(const std::string& node) const {
        if (has_directed_cycle()) throw DataError("descendants: directed part has a cycle");
        return names(reach_directed(index_of(node), /*down=*/true));
    }

    std::set<std::string> ancestors(const std::string& node) const {
        if (has_directed_cycle()) throw DataError("ancestors: directed part has a cycle");
        return names(reach_directed(index_of(node), /*down=*/false));
    }

    // All edges, ordered by (a, b); stable across equal graphs.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edges_.size());
        for (const auto& [k, m] : edges_) out.push_back({k.first, k.second, m.at_a, m.at_b});
        return out;
    }

    bool fully_directed() const {
        for (const auto& [k, m] : edges_) {
            const bool fwd = m.at_a == Mark::Tail && m.at_b == Mark::Arrow;
            const bool bwd = m.at_a == Mark::Arrow && m.at_b == Mark::Tail;
            if (!fwd && !bwd) return false;
        }
        return true;
    }

    bool has_directed_cycle() const {
        // Kahn over the directed sub-relation.
        const int n = node_count();
        std::vector<int> indeg(static_cast<std::size_t>(n), 0);
        for (int v = 0; v < n; ++v) indeg[static_cast<std::size_t>(v)] = static_cast<int>(parents_idx(v).size());
        std::deque<int> q;
        for (int v = 0; v < n; ++v)
            if (indeg[static_cast<std::size_t>(v)] == 0) q.push_back(v);
        int seen = 0;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            ++seen;
            for (int c : children_idx(v))
                if (--indeg[static_cast<std::size_t>(c)] == 0) q.push_back(c);
        }
        return seen != n;
    }

    bool is_dag() const { return fully_directed() && !has_directed_cycle(); }

    // Deterministic topological order (lexicographic tie-break).
    std::vector<int> topological_order() const {
        if (!is_dag()) throw DataError("topological_order: graph is not a DAG");
        const int n = node_count();
        std::vector<int> indeg(static_cast<std::size_t>(n), 0);
        for (int v = 0; v < n; ++v) indeg[static_cast<std::size_t>(v)] = static_cast<int>(parents_idx(v).size());
        std::set<int> ready;
        for (int v = 0; v < n; ++v)
            if (indeg[static_cast<std::size_t>(v)] == 0) ready.insert(v);
        std::vector<int> order;
        order.reserve(static_cast<std::size_t>(n));
        while (!ready.empty()) {
            int v = *ready.begin();
            ready.erase(ready.begin());
            order.push_back(v);
            for (int c : children_idx(v))
                if (--indeg[static_cast<std::size_t>(c)] == 0) ready.insert(c);
        }
        return order;
    }

    // d-separation of x and y given z, by the reachable-set (ball traversal)
    // method: a trail continues through a non-collider not in z, and through
    // a collider whose descendants meet z.
    bool d_separated(const std::string& x, const std::string& y,
                     const std::set<std::string>& z) const {
        if (!is_dag()) throw DataError("d_separated: graph must be a DAG");
        const int xi = index_of(x);
        const int yi = index_of(y);
        if (xi == yi) throw DataError("d_separated: x and y must differ");
        std::set<int> zi;
        for (const auto& name : z) {
            int i = index_of(name);
            if (i == xi || i == yi)
                throw DataError("d_separated: conditioning set contains an endpoint");
            zi.insert(i);
        }

        // ancestors of z (including z)
        std::set<int> anz = zi;
        {
            std::deque<int> q(zi.begin(), zi.end());
            while (!q.empty()) {
                int v = q.front();
                q.pop_front();
                for (int p : parents_idx(v))
                    if (anz.insert(p).second) q.push_back(p);
            }
        }

        // state: (node, entered-from-child?)
        std::set<std::pair<int, bool>> visited;
        std::deque<std::pair<int, bool>> frontier;
        frontier.push_back({xi, true});
        while (!frontier.empty()) {
            auto [v, up] = frontier.front();
            frontier.pop_front();
            if (!visited.insert({v, up}).second) continue;
            if (v == yi) return false;
            if (up) {
                if (!zi.count(v)) {
                    for (int p : parents_idx(v)) frontier.push_back({p, true});
                    for (int c : children_idx(v)) frontier.push_back({c, false});
                }
            } else {
                if (!zi.count(v))
                    for (int c : children_idx(v)) frontier.push_back({c, false});
                if (anz.count(v))
                    for (int p : parents_idx(v)) frontier.push_back({p, true});
            }
        }
        return true;
    }

    bool operator==(const MixedGraph& other) const {
        if (nodes_ != other.nodes_) return false;
        if (edges_.size() != other.edges_.size()) return false;
        for (const auto& [k, m] : edges_) {
            auto it = other.edges_.find(k);
            if (it == other.edges_.end()) return false;
            if (it->second.at_a != m.at_a || it->second.at_b != m.at_b) return false;
        }
        return true;
    }

private:
    struct EdgeMarks {
        Mark at_a, at_b;
    };

    void check_idx(int i) const {
        if (i < 0 || i >= node_count()) throw DataError("node index out of range");
    }

    std::set<int> reach_directed(int start, bool down) const {
        std::set<int> out;
        std::deque<int> q{start};
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int w : down ? children_idx(v) : parents_idx(v))
                if (out.insert(w).second) q.push_back(w);
        }
        out.erase(start);
        return out;
    }

    std::set<std::string> names(const std::set<int>& idx) const {
        std::set<std::string> out;
        for (int i : idx) out.insert(nodes_[static_cast<std::size_t>(i)]);
        return out;
    }

    std::vector<std::string> nodes_;
    std::map<std::pair<int, int>, EdgeMarks> edges_;
    std::vector<std::set<int>> adj_;
};

// Conditioning set that rendered a node pair independent during skeleton
// search; keyed by the unordered pair.
class SepsetMap {
public:
    void set(const std::string& x, const std::string& y, std::set<std::string> s) {
        if (s.count(x) || s.count(y)) throw DataError("sepset must exclude its endpoints");
        map_[key(x, y)] = std::move(s);
    }

    bool contains(const std::string& x, const std::string& y) const {
        return map_.count(key(x, y)) != 0;
    }

    const std::set<std::string>& get(const std::string& x, const std::string& y) const {
        auto it = map_.find(key(x, y));
        if (it == map_.end()) throw DataError("no sepset recorded for (" + x + ", " + y + ")");
        return it->second;
    }

    std::size_t size() const { return map_.size(); }

    const std::map<std::pair<std::string, std::string>, std::set<std::string>>& entries() const {
        return map_;
    }

private:
    static std::pair<std::string, std::string> key(const std::string& x, const std::string& y) {
        return x < y ? std::make_pair(x, y) : std::make_pair(y, x);
    }

    std::map<std::pair<std::string, std::string>, std::set<std::string>> map_;
};

namespace detail {

inline bool plain_dot_id(const std::string& s) {
    static const std::set<std::string> kKeywords = {"graph", "digraph", "node",
                                                    "edge",  "subgraph", "strict"};
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return !kKeywords.count(lower);
}

inline std::string dot_id(const std::string& s) {
    if (plain_dot_id(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline const char* dot_arrow_shape(Mark m) {
    switch (m) {
        case Mark::Tail: return "none";
        case Mark::Arrow: return "normal";
        case Mark::Circle: return "odot";
    }
    return "none";
}

}  // namespace detail

// DOT export. Directed edges render plainly, undirected ones with dir=none,
// circle marks as "odot" endpoints. Output is byte-stable for equal graphs.
inline std::string to_dot(const MixedGraph& g, const std::string& header_comment = "") {
    std::ostringstream os;
    if (!header_comment.empty()) os << "// " << header_comment << "\n";
    os << "digraph {\n";
    for (const auto& n : g.nodes()) os << "  " << detail::dot_id(n) << ";\n";
    for (const auto& e : g.edges()) {
        const std::string& a = g.node_name(e.a);
        const std::string& b = g.node_name(e.b);
        os << "  " << detail::dot_id(a) << " -> " << detail::dot_id(b);
        if (e.at_a == Mark::Tail && e.at_b == Mark::Arrow) {
            // plain directed edge
        } else if (e.at_a == Mark::Tail && e.at_b == Mark::Tail) {
            os << " [dir=none]";
        } else {
            os << " [dir=both, arrowtail=" << detail::dot_arrow_shape(e.at_a)
               << ", arrowhead=" << detail::dot_arrow_shape(e.at_b) << "]";
        }
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

inline nlohmann::json graph_to_json(const MixedGraph& g) {
    nlohmann::json j;
    j["nodes"] = g.nodes();
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges()) {
        edges.push_back({{"a", g.node_name(e.a)},
                         {"b", g.node_name(e.b)},
                         {"mark_a", to_string(e.at_a)},
                         {"mark_b", to_string(e.at_b)}});
    }
    j["edges"] = std::move(edges);
    return j;
}

inline MixedGraph graph_from_json(const nlohmann::json& j) {
    if (!j.contains("nodes") || !j.contains("edges"))
        throw DataError("graph JSON needs 'nodes' and 'edges'");
    MixedGraph g(j.at("nodes").get<std::vector<std::string>>());
    for (const auto& e : j.at("edges")) {
        g.add_edge(e.at("a").get<std::string>(), e.at("b").get<std::string>(),
                   mark_from_string(e.at("mark_a").get<std::string>()),
                   mark_from_string(e.at("mark_b").get<std::string>()));
    }
    return g;
}

// Count of node pairs whose edge differs between the two graphs: presence,
// absence, or endpoint marks.
inline int structural_hamming_distance(const MixedGraph& g1, const MixedGraph& g2) {
    if (g1.nodes() != g2.nodes()) throw DataError("SHD: graphs have different node sets");
    int shd = 0;
    const int n = g1.node_count();
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const bool e1 = g1.has_edge_idx(a, b);
            const bool e2 = g2.has_edge_idx(a, b);
            if (e1 != e2) {
                ++shd;
            } else if (e1 && e2) {
                const auto x = g1.edge_idx(a, b);
                const auto y = g2.edge_idx(a, b);
                if (x.at_a != y.at_a || x.at_b != y.at_b) ++shd;
            }
        }
    }
    return shd;
}

}  // namespace casr
