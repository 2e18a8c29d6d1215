#pragma once

#include "casr/bayes.hpp"
#include "casr/dataset.hpp"
#include "casr/discovery.hpp"
#include "casr/error.hpp"
#include "casr/features.hpp"
#include "casr/graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace casr {

// Counter-friendly generator used for all sampling; the algorithm name is
// recorded in output metadata so runs are reproducible per implementation.
struct SplitMix64 {
    uint64_t state = 0;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    uint64_t next_below(uint64_t n) { return next() % n; }
};

constexpr const char* kRngAlgorithm = "splitmix64";

// Derived per-stream seed; rows sample from independent substreams so row
// order and worker count cannot change the output.
inline uint64_t substream_seed(uint64_t seed, uint64_t stream) {
    SplitMix64 g(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    g.next();
    return g.next();
}

struct ScmNode {
    std::string name;
    VariableRole role = VariableRole::Extrinsic;
    std::vector<std::string> levels;       // empty => numeric outcome
    std::vector<std::vector<double>> cpt;  // [parent config][level]
    std::vector<double> means;             // [parent config]
    double noise = 0.0;                    // uniform half-width of additive noise

    bool discrete() const { return !levels.empty(); }
};

// Ground-truth model: a DAG plus per-node tables. Numeric-outcome nodes are
// sinks computed as mean(parent config) + uniform noise on [-b, b].
struct ScmSpec {
    std::string name;
    MixedGraph dag;
    std::map<std::string, ScmNode> nodes;
    uint64_t default_seed = 1;

    const ScmNode& node(const std::string& n) const {
        auto it = nodes.find(n);
        if (it == nodes.end()) throw DataError("SCM has no node '" + n + "'");
        return it->second;
    }

    std::vector<std::string> sorted_parents(const std::string& n) const {
        const auto p = dag.parents(n);
        return {p.begin(), p.end()};
    }

    std::vector<int> parent_levels(const std::string& n) const {
        std::vector<int> out;
        for (const auto& p : sorted_parents(n))
            out.push_back(static_cast<int>(node(p).levels.size()));
        return out;
    }
};

struct Violation {
    std::string node;  // empty for whole-spec problems
    std::string message;
};

// Structural checks; violations are returned as data, not thrown.
inline std::vector<Violation> validate(const ScmSpec& spec) {
    std::vector<Violation> out;
    if (!spec.dag.fully_directed()) {
        out.push_back({"", "graph must be fully directed"});
        return out;
    }
    if (spec.dag.has_directed_cycle()) {
        std::ostringstream os;
        os << "graph has a directed cycle among:";
        for (const auto& n : spec.dag.nodes()) os << " " << n;
        out.push_back({"", os.str()});
        return out;
    }
    for (const auto& n : spec.dag.nodes())
        if (!spec.nodes.count(n)) out.push_back({n, "node has no table"});
    for (const auto& [name, node] : spec.nodes)
        if (!spec.dag.has_node(name)) out.push_back({name, "table for unknown graph node"});
    if (!out.empty()) return out;

    for (const auto& [name, node] : spec.nodes) {
        const auto plevels = spec.parent_levels(name);
        bool parents_ok = true;
        for (const auto& p : spec.sorted_parents(name)) {
            if (!spec.node(p).discrete()) {
                out.push_back({name, "parent '" + p + "' is a numeric outcome (must be a sink)"});
                parents_ok = false;
            }
        }
        if (!parents_ok) continue;
        const auto n_configs = static_cast<std::size_t>(mixed_radix_count(plevels));
        if (node.discrete()) {
            if (node.levels.size() < 2) out.push_back({name, "needs >= 2 levels"});
            std::set<std::string> uniq(node.levels.begin(), node.levels.end());
            if (uniq.size() != node.levels.size()) out.push_back({name, "duplicate level labels"});
            if (node.cpt.size() != n_configs) {
                out.push_back({name, "CPT must have " + std::to_string(n_configs) + " rows, has " +
                                         std::to_string(node.cpt.size())});
                continue;
            }
            for (std::size_t r = 0; r < node.cpt.size(); ++r) {
                const auto& row = node.cpt[r];
                if (row.size() != node.levels.size()) {
                    out.push_back({name, "CPT row " + std::to_string(r) + " has wrong arity"});
                    continue;
                }
                double sum = 0.0;
                bool neg = false;
                for (double p : row) {
                    sum += p;
                    neg = neg || p < 0.0;
                }
                if (neg) out.push_back({name, "CPT row " + std::to_string(r) + " has negative entries"});
                if (std::abs(sum - 1.0) > 1e-9)
                    out.push_back({name, "CPT row " + std::to_string(r) + " sums to " +
                                             std::to_string(sum) + ", not 1"});
            }
        } else {
            if (node.means.size() != n_configs)
                out.push_back({name, "mean table must have " + std::to_string(n_configs) +
                                         " cells, has " + std::to_string(node.means.size())});
            if (!(node.noise >= 0.0) || !std::isfinite(node.noise))
                out.push_back({name, "noise half-width must be finite and >= 0"});
            if (!spec.dag.children(name).empty())
                out.push_back({name, "numeric outcome must be a sink"});
        }
    }
    return out;
}

inline void require_valid(const ScmSpec& spec) {
    const auto v = validate(spec);
    if (v.empty()) return;
    std::ostringstream os;
    os << "invalid SCM spec '" << spec.name << "':";
    for (const auto& violation : v)
        os << "\n  " << (violation.node.empty() ? "(spec)" : violation.node) << ": "
           << violation.message;
    throw DataError(os.str());
}

// Forward (ancestral) sampling in topological order; deterministic per seed,
// rows drawn from per-row substreams.
inline DiscreteDataset forward_sample(const ScmSpec& spec, int64_t n, uint64_t seed,
                                      int jobs = 1) {
    require_valid(spec);
    if (n <= 0) throw DataError("forward_sample: n must be positive");

    const std::vector<int> topo = spec.dag.topological_order();
    struct NodePlan {
        const ScmNode* node;
        std::vector<int> parent_positions;  // positions in topo-local value array
        std::vector<int> parent_levels;
    };
    std::vector<NodePlan> plan;
    std::map<std::string, int> topo_pos;
    for (std::size_t k = 0; k < topo.size(); ++k) {
        const std::string& name = spec.dag.node_name(topo[k]);
        topo_pos[name] = static_cast<int>(k);
        NodePlan p;
        p.node = &spec.node(name);
        for (const auto& parent : spec.sorted_parents(name)) {
            p.parent_positions.push_back(topo_pos.at(parent));
            p.parent_levels.push_back(static_cast<int>(spec.node(parent).levels.size()));
        }
        plan.push_back(std::move(p));
    }

    // columns in lexicographic node order
    const auto& names = spec.dag.nodes();
    std::vector<DiscreteDataset::Column> columns;
    std::vector<VariableSchema> schema;
    for (const auto& name : names) {
        const ScmNode& node = spec.node(name);
        if (node.discrete()) {
            schema.push_back({name, VariableKind::Ordinal, node.levels, node.role});
            columns.emplace_back(DiscreteDataset::DiscreteColumn(static_cast<std::size_t>(n), 0));
        } else {
            schema.push_back({name, VariableKind::NumericOutcome, {}, node.role});
            columns.emplace_back(DiscreteDataset::NumericColumn(static_cast<std::size_t>(n), 0.0));
        }
    }
    std::vector<int> col_of_topo;
    for (std::size_t k = 0; k < topo.size(); ++k) col_of_topo.push_back(topo[k]);

    auto sample_rows = [&](int64_t lo, int64_t hi) {
        std::vector<double> values(plan.size());
        std::vector<int> pvals;
        for (int64_t r = lo; r < hi; ++r) {
            SplitMix64 rng(substream_seed(seed, static_cast<uint64_t>(r)));
            for (std::size_t k = 0; k < plan.size(); ++k) {
                const NodePlan& p = plan[k];
                pvals.clear();
                for (int pos : p.parent_positions)
                    pvals.push_back(static_cast<int>(values[static_cast<std::size_t>(pos)]));
                const auto cfg = static_cast<std::size_t>(
                    mixed_radix_index(pvals, p.parent_levels));
                const double u = rng.next_double();
                if (p.node->discrete()) {
                    const auto& row = p.node->cpt[cfg];
                    double acc = 0.0;
                    int drawn = static_cast<int>(row.size()) - 1;
                    for (std::size_t l = 0; l < row.size(); ++l) {
                        acc += row[l];
                        if (u < acc) {
                            drawn = static_cast<int>(l);
                            break;
                        }
                    }
                    values[k] = drawn;
                    std::get<DiscreteDataset::DiscreteColumn>(
                        columns[static_cast<std::size_t>(col_of_topo[k])])[static_cast<std::size_t>(r)] =
                        drawn;
                } else {
                    const double v = p.node->means[cfg] + (2.0 * u - 1.0) * p.node->noise;
                    values[k] = v;
                    std::get<DiscreteDataset::NumericColumn>(
                        columns[static_cast<std::size_t>(col_of_topo[k])])[static_cast<std::size_t>(r)] =
                        v;
                }
            }
        }
    };

    if (jobs <= 1 || n < 1000) {
        sample_rows(0, n);
    } else {
        const int64_t nw = std::min<int64_t>(jobs, n);
        const int64_t chunk = (n + nw - 1) / nw;
        std::vector<std::future<void>> futures;
        for (int64_t w = 0; w < nw; ++w) {
            const int64_t lo = w * chunk;
            const int64_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            futures.push_back(std::async(std::launch::async, sample_rows, lo, hi));
        }
        for (auto& f : futures) f.get();
    }

    return DiscreteDataset(std::move(schema), std::move(columns));
}

// Markov-equivalence representative of the generating DAG, used as the
// discovery ground truth.
inline MixedGraph true_cpdag(const ScmSpec& spec) {
    require_valid(spec);
    return dag_to_cpdag(spec.dag);
}

// Exact ACE from the spec's own tables by full-joint enumeration over all
// discrete nodes (no estimation, no pruning). Kept independent of the
// fitted-network enumerator on purpose: the two routes must agree.
inline double closed_form_ace(const ScmSpec& spec, const std::string& cause,
                              const std::string& effect, const std::string& x0,
                              const std::string& x1) {
    require_valid(spec);
    if (cause == effect) throw DataError("closed_form_ace: cause equals effect");
    if (x0 == x1) throw DataError("closed_form_ace: contrast levels must differ");
    const ScmNode& cause_node = spec.node(cause);
    if (!cause_node.discrete()) throw DataError("closed_form_ace: cause must be discrete");
    const ScmNode& effect_node = spec.node(effect);

    std::vector<std::string> disc;
    for (const auto& n : spec.dag.nodes())
        if (spec.node(n).discrete()) disc.push_back(n);
    std::map<std::string, int> pos;
    for (std::size_t i = 0; i < disc.size(); ++i) pos[disc[i]] = static_cast<int>(i);

    struct Table {
        std::vector<int> parent_pos;
        std::vector<int> parent_levels;
    };
    std::map<std::string, Table> tables;
    for (const auto& n : spec.dag.nodes()) {
        Table t;
        for (const auto& p : spec.sorted_parents(n)) {
            t.parent_pos.push_back(pos.at(p));
            t.parent_levels.push_back(static_cast<int>(spec.node(p).levels.size()));
        }
        tables[n] = std::move(t);
    }

    auto expectation = [&](int clamp_level) {
        std::vector<int> assign(disc.size(), 0);
        const int cause_pos = pos.at(cause);
        double total = 0.0;
        // odometer over all discrete configurations
        while (true) {
            assign[static_cast<std::size_t>(cause_pos)] = clamp_level;
            double prob = 1.0;
            for (const auto& n : disc) {
                if (n == cause) continue;  // do() removes this factor
                const Table& t = tables.at(n);
                std::vector<int> pv;
                for (int pp : t.parent_pos) pv.push_back(assign[static_cast<std::size_t>(pp)]);
                const auto cfg = static_cast<std::size_t>(mixed_radix_index(pv, t.parent_levels));
                prob *= spec.node(n).cpt[cfg][static_cast<std::size_t>(
                    assign[static_cast<std::size_t>(pos.at(n))])];
            }
            double value;
            if (effect_node.discrete()) {
                value = assign[static_cast<std::size_t>(pos.at(effect))];
            } else {
                const Table& t = tables.at(effect);
                std::vector<int> pv;
                for (int pp : t.parent_pos) pv.push_back(assign[static_cast<std::size_t>(pp)]);
                value = effect_node.means[static_cast<std::size_t>(
                    mixed_radix_index(pv, t.parent_levels))];
            }
            total += prob * value;
            // advance odometer, skipping the clamped position
            std::size_t k = 0;
            for (; k < disc.size(); ++k) {
                if (static_cast<int>(k) == cause_pos) continue;
                const int levels = static_cast<int>(spec.node(disc[k]).levels.size());
                if (++assign[k] < levels) break;
                assign[k] = 0;
            }
            if (k == disc.size()) break;
        }
        return total;
    };

    const int l0 = [&] {
        for (std::size_t i = 0; i < cause_node.levels.size(); ++i)
            if (cause_node.levels[i] == x0) return static_cast<int>(i);
        throw DataError("closed_form_ace: '" + x0 + "' is not a level of " + cause);
    }();
    const int l1 = [&] {
        for (std::size_t i = 0; i < cause_node.levels.size(); ++i)
            if (cause_node.levels[i] == x1) return static_cast<int>(i);
        throw DataError("closed_form_ace: '" + x1 + "' is not a level of " + cause);
    }();
    return expectation(l1) - expectation(l0);
}

// --- JSON schema ---

namespace detail {

inline std::string config_key(const ScmSpec& spec, const std::string& node, int64_t cfg) {
    const auto parents = spec.sorted_parents(node);
    const auto plevels = spec.parent_levels(node);
    std::string key;
    int64_t rest = cfg;
    for (std::size_t i = 0; i < parents.size(); ++i) {
        const int lvl = static_cast<int>(rest % plevels[i]);
        rest /= plevels[i];
        if (i) key += ",";
        key += spec.node(parents[i]).levels[static_cast<std::size_t>(lvl)];
    }
    return key;
}

inline int64_t config_from_key(const ScmSpec& spec, const std::string& node,
                               const std::string& key) {
    const auto parents = spec.sorted_parents(node);
    const auto plevels = spec.parent_levels(node);
    std::vector<std::string> parts;
    if (!key.empty()) {
        std::string cur;
        for (char c : key) {
            if (c == ',') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        parts.push_back(cur);
    }
    if (parts.size() != parents.size())
        throw DataError("SCM JSON: key '" + key + "' does not match parents of " + node);
    std::vector<int> vals;
    for (std::size_t i = 0; i < parents.size(); ++i) {
        const auto& levels = spec.node(parents[i]).levels;
        const auto it = std::find(levels.begin(), levels.end(), parts[i]);
        if (it == levels.end())
            throw DataError("SCM JSON: '" + parts[i] + "' is not a level of " + parents[i]);
        vals.push_back(static_cast<int>(it - levels.begin()));
    }
    return mixed_radix_index(vals, plevels);
}

}  // namespace detail

inline nlohmann::json scm_to_json(const ScmSpec& spec) {
    require_valid(spec);
    nlohmann::json j;
    j["name"] = spec.name;
    j["seed"] = spec.default_seed;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : spec.dag.edges()) {
        if (e.at_a == Mark::Tail && e.at_b == Mark::Arrow)
            edges.push_back({spec.dag.node_name(e.a), spec.dag.node_name(e.b)});
        else
            edges.push_back({spec.dag.node_name(e.b), spec.dag.node_name(e.a)});
    }
    j["edges"] = std::move(edges);
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& name : spec.dag.nodes()) {
        const ScmNode& node = spec.node(name);
        nlohmann::json nj;
        nj["name"] = name;
        nj["role"] = to_string(node.role);
        if (node.discrete()) {
            nj["levels"] = node.levels;
            nlohmann::json cpt = nlohmann::json::object();
            for (std::size_t cfg = 0; cfg < node.cpt.size(); ++cfg)
                cpt[detail::config_key(spec, name, static_cast<int64_t>(cfg))] = node.cpt[cfg];
            nj["cpt"] = std::move(cpt);
        } else {
            nlohmann::json means = nlohmann::json::object();
            for (std::size_t cfg = 0; cfg < node.means.size(); ++cfg)
                means[detail::config_key(spec, name, static_cast<int64_t>(cfg))] = node.means[cfg];
            nj["means"] = std::move(means);
            nj["noise"] = node.noise;
        }
        nodes.push_back(std::move(nj));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

inline ScmSpec scm_from_json(const nlohmann::json& j) {
    ScmSpec spec;
    spec.name = j.value("name", "unnamed");
    spec.default_seed = j.value("seed", uint64_t{1});
    std::vector<std::string> names;
    for (const auto& nj : j.at("nodes")) names.push_back(nj.at("name").get<std::string>());
    spec.dag = MixedGraph(names);
    for (const auto& e : j.at("edges"))
        spec.dag.add_directed(e.at(0).get<std::string>(), e.at(1).get<std::string>());

    // two passes: levels first so parent keys can be decoded
    for (const auto& nj : j.at("nodes")) {
        ScmNode node;
        node.name = nj.at("name").get<std::string>();
        node.role = role_from_string(nj.value("role", std::string("extrinsic")));
        if (nj.contains("levels")) node.levels = nj.at("levels").get<std::vector<std::string>>();
        spec.nodes[node.name] = std::move(node);
    }
    for (const auto& nj : j.at("nodes")) {
        const std::string name = nj.at("name").get<std::string>();
        ScmNode& node = spec.nodes[name];
        const auto n_configs =
            static_cast<std::size_t>(mixed_radix_count(spec.parent_levels(name)));
        if (node.discrete()) {
            if (!nj.contains("cpt")) throw DataError("SCM JSON: node " + name + " lacks cpt");
            node.cpt.assign(n_configs, {});
            for (const auto& [key, row] : nj.at("cpt").items())
                node.cpt[static_cast<std::size_t>(detail::config_from_key(spec, name, key))] =
                    row.get<std::vector<double>>();
        } else {
            if (!nj.contains("means")) throw DataError("SCM JSON: node " + name + " lacks means");
            node.means.assign(n_configs, 0.0);
            for (const auto& [key, v] : nj.at("means").items())
                node.means[static_cast<std::size_t>(detail::config_from_key(spec, name, key))] =
                    v.get<double>();
            node.noise = nj.value("noise", 0.0);
        }
    }
    require_valid(spec);
    return spec;
}

// --- shipped fixtures ---

// Structural fixture mirroring the data-driven graph of the ASR error study:
// Age -> {GoP, Subs}; VocabDifficulty -> GoP; NumWords -> {GoP, Subs, Del};
// GoP -> {Subs, Ins}; SNR -> Ins; Gender isolated. Conditional distributions
// are separated by at least 0.2 across extreme parent levels so that
// finite-sample recovery is testable.
inline ScmSpec asr_error_fixture() {
    ScmSpec spec;
    spec.name = "asr-error-fixture";
    spec.default_seed = 1;
    spec.dag = MixedGraph({"Age", "Del", "Gender", "GoP", "Ins", "NumWords", "SNR", "Subs",
                           "VocabDifficulty"});
    for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{
             {"Age", "GoP"}, {"Age", "Subs"}, {"VocabDifficulty", "GoP"}, {"NumWords", "GoP"},
             {"GoP", "Subs"}, {"GoP", "Ins"}, {"SNR", "Ins"}, {"NumWords", "Subs"},
             {"NumWords", "Del"}})
        spec.dag.add_directed(a, b);

    auto root = [&](const std::string& name, VariableRole role, std::vector<std::string> levels,
                    std::vector<double> p) {
        ScmNode n;
        n.name = name;
        n.role = role;
        n.levels = std::move(levels);
        n.cpt = {std::move(p)};
        spec.nodes[name] = std::move(n);
    };
    root("Age", VariableRole::Physiological, {"Young", "Mid", "Old"}, {0.33, 0.34, 0.33});
    root("Gender", VariableRole::Physiological, {"F", "M"}, {0.49, 0.51});
    root("VocabDifficulty", VariableRole::Extrinsic, {"Low", "Average", "High"},
         {0.35, 0.35, 0.30});
    root("NumWords", VariableRole::Extrinsic, {"Short", "Medium", "Long"}, {0.30, 0.40, 0.30});
    root("SNR", VariableRole::Extrinsic, {"Noisy", "Average", "Clean"}, {0.30, 0.40, 0.30});

    {
        // parents sorted: Age, NumWords, VocabDifficulty
        ScmNode gop;
        gop.name = "GoP";
        gop.role = VariableRole::Cognitive;
        gop.levels = {"Low", "Average", "High"};
        gop.cpt.assign(27, {});
        for (int vocab = 0; vocab < 3; ++vocab) {
            for (int words = 0; words < 3; ++words) {
                for (int age = 0; age < 3; ++age) {
                    const double ease =
                        (0.295 * age + 0.175 * (2 - words) + 0.21 * (2 - vocab)) / 1.36;
                    const double p_low = 0.82 - 0.80 * ease;
                    const double p_high = 0.03 + 0.80 * ease;
                    const double p_avg = 1.0 - p_low - p_high;
                    gop.cpt[static_cast<std::size_t>(age + 3 * words + 9 * vocab)] = {
                        p_low, p_avg, p_high};
                }
            }
        }
        spec.nodes["GoP"] = std::move(gop);
    }
    {
        // parents sorted: Age, GoP, NumWords
        ScmNode subs;
        subs.name = "Subs";
        subs.role = VariableRole::Error;
        subs.noise = 0.6;
        subs.means.assign(27, 0.0);
        for (int words = 0; words < 3; ++words)
            for (int gop = 0; gop < 3; ++gop)
                for (int age = 0; age < 3; ++age)
                    subs.means[static_cast<std::size_t>(age + 3 * gop + 9 * words)] =
                        3.0 - 0.4 * age - 0.5 * gop - 0.6 * words;
        spec.nodes["Subs"] = std::move(subs);
    }
    {
        ScmNode del;
        del.name = "Del";
        del.role = VariableRole::Error;
        del.noise = 0.4;
        del.means = {0.4, 0.9, 1.4};  // parent: NumWords
        spec.nodes["Del"] = std::move(del);
    }
    {
        // parents sorted: GoP, SNR
        ScmNode ins;
        ins.name = "Ins";
        ins.role = VariableRole::Error;
        ins.noise = 0.6;
        ins.means.assign(9, 0.0);
        for (int snr = 0; snr < 3; ++snr)
            for (int gop = 0; gop < 3; ++gop)
                ins.means[static_cast<std::size_t>(gop + 3 * snr)] = 3.4 - 0.8 * gop - 0.9 * snr;
        spec.nodes["Ins"] = std::move(ins);
    }
    require_valid(spec);
    return spec;
}

// L confounds A and B; X is an independent observed cause of A. Dropping L
// gives FCI something PC cannot represent.
inline ScmSpec hidden_confounder_fixture() {
    ScmSpec spec;
    spec.name = "hidden-confounder-fixture";
    spec.default_seed = 1;
    spec.dag = MixedGraph({"A", "B", "L", "X"});
    spec.dag.add_directed("L", "A");
    spec.dag.add_directed("L", "B");
    spec.dag.add_directed("X", "A");

    auto binary = [&](const std::string& name, std::vector<std::vector<double>> cpt) {
        ScmNode n;
        n.name = name;
        n.role = VariableRole::Extrinsic;
        n.levels = {"0", "1"};
        n.cpt = std::move(cpt);
        spec.nodes[name] = std::move(n);
    };
    binary("L", {{0.5, 0.5}});
    binary("X", {{0.5, 0.5}});
    // parents sorted: L, X; config = l + 2x
    binary("A", {{0.90, 0.10}, {0.45, 0.55}, {0.40, 0.60}, {0.08, 0.92}});
    binary("B", {{0.85, 0.15}, {0.15, 0.85}});
    require_valid(spec);
    return spec;
}

// Strong binary chain X -> Z -> Y.
inline ScmSpec chain_fixture() {
    ScmSpec spec;
    spec.name = "chain-fixture";
    spec.default_seed = 1;
    spec.dag = MixedGraph({"X", "Y", "Z"});
    spec.dag.add_directed("X", "Z");
    spec.dag.add_directed("Z", "Y");
    auto binary = [&](const std::string& name, std::vector<std::vector<double>> cpt) {
        ScmNode n;
        n.name = name;
        n.role = VariableRole::Extrinsic;
        n.levels = {"0", "1"};
        n.cpt = std::move(cpt);
        spec.nodes[name] = std::move(n);
    };
    binary("X", {{0.5, 0.5}});
    binary("Z", {{0.85, 0.15}, {0.15, 0.85}});
    binary("Y", {{0.85, 0.15}, {0.15, 0.85}});
    require_valid(spec);
    return spec;
}

// Strong binary collider X -> Z <- Y.
inline ScmSpec collider_fixture() {
    ScmSpec spec;
    spec.name = "collider-fixture";
    spec.default_seed = 1;
    spec.dag = MixedGraph({"X", "Y", "Z"});
    spec.dag.add_directed("X", "Z");
    spec.dag.add_directed("Y", "Z");
    auto binary = [&](const std::string& name, std::vector<std::vector<double>> cpt) {
        ScmNode n;
        n.name = name;
        n.role = VariableRole::Extrinsic;
        n.levels = {"0", "1"};
        n.cpt = std::move(cpt);
        spec.nodes[name] = std::move(n);
    };
    binary("X", {{0.5, 0.5}});
    binary("Y", {{0.5, 0.5}});
    // parents sorted: X, Y; config = x + 2y
    binary("Z", {{0.92, 0.08}, {0.40, 0.60}, {0.35, 0.65}, {0.05, 0.95}});
    require_valid(spec);
    return spec;
}

}  // namespace casr
