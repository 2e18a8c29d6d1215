#pragma once

#include "casr/dataset.hpp"
#include "casr/error.hpp"
#include "casr/graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace casr {

// Mixed-radix index of a parent-value assignment; the first parent is the
// least significant digit. Shared by fitting, enumeration and the SCM tables.
inline int64_t mixed_radix_index(const std::vector<int>& values, const std::vector<int>& radices) {
    int64_t idx = 0;
    int64_t base = 1;
    for (std::size_t i = 0; i < values.size(); ++i) {
        idx += base * values[i];
        base *= radices[i];
    }
    return idx;
}

inline int64_t mixed_radix_count(const std::vector<int>& radices) {
    int64_t c = 1;
    for (int r : radices) c *= r;
    return c;
}

struct FitConfig {
    double smoothing = 1.0;  // Laplace s; must stay positive for exact enumeration

    void validate() const {
        if (!(smoothing > 0.0)) throw ConfigError("fit.smoothing must be positive");
    }
};

// P(node | parents) with Laplace smoothing; rows indexed by the mixed-radix
// parent configuration.
struct CptNode {
    std::vector<std::string> parents;  // sorted by name
    std::vector<int> parent_levels;
    int levels = 0;
    std::vector<std::vector<double>> rows;
};

// E[node | parents] for a numeric outcome, with per-cell counts. Cells with
// no data fall back to the global mean and are flagged.
struct OutcomeNode {
    std::vector<std::string> parents;
    std::vector<int> parent_levels;
    std::vector<double> means;
    std::vector<int64_t> counts;
    std::vector<int64_t> empty_cells;
    double global_mean = 0.0;
};

class FittedNetwork {
public:
    FittedNetwork(MixedGraph dag, std::vector<VariableSchema> schema,
                  std::map<std::string, CptNode> cpts, std::map<std::string, OutcomeNode> outcomes)
        : dag_(std::move(dag)),
          cpts_(std::move(cpts)),
          outcomes_(std::move(outcomes)) {
        for (auto& v : schema) schema_[v.name] = std::move(v);
    }

    const MixedGraph& dag() const { return dag_; }

    const VariableSchema& variable(const std::string& name) const {
        auto it = schema_.find(name);
        if (it == schema_.end()) throw DataError("network has no node '" + name + "'");
        return it->second;
    }

    bool is_outcome(const std::string& name) const { return outcomes_.count(name) != 0; }

    const CptNode& cpt(const std::string& name) const {
        auto it = cpts_.find(name);
        if (it == cpts_.end()) throw DataError("no CPT for node '" + name + "'");
        return it->second;
    }

    const OutcomeNode& outcome(const std::string& name) const {
        auto it = outcomes_.find(name);
        if (it == outcomes_.end()) throw DataError("no outcome table for node '" + name + "'");
        return it->second;
    }

private:
    MixedGraph dag_;
    std::map<std::string, CptNode> cpts_;
    std::map<std::string, OutcomeNode> outcomes_;
    std::map<std::string, VariableSchema> schema_;
};

// Fit CPTs and outcome-mean tables on a given fully directed DAG.
// CPT cell = (count + s) / (row_total + s * levels).
inline FittedNetwork fit(const DiscreteDataset& data, const MixedGraph& dag,
                         const FitConfig& config = {}) {
    config.validate();
    if (!dag.fully_directed())
        throw DataError(
            "fit: graph is partially directed; resolve orientation first "
            "(cmd_quantify offers --orient-rest)");
    if (dag.has_directed_cycle()) throw DataError("fit: graph has a directed cycle");
    const std::size_t n = data.n_rows();
    if (n == 0) throw DataError("fit: empty dataset");

    std::map<std::string, CptNode> cpts;
    std::map<std::string, OutcomeNode> outcomes;
    std::vector<VariableSchema> schema;

    for (const auto& name : dag.nodes()) {
        const VariableSchema& var = data.variable(name);
        schema.push_back(var);
        const std::set<std::string> parent_set = dag.parents(name);
        std::vector<std::string> parents(parent_set.begin(), parent_set.end());
        std::vector<int> plevels;
        std::vector<const DiscreteDataset::DiscreteColumn*> pcols;
        for (const auto& p : parents) {
            const VariableSchema& pv = data.variable(p);
            if (!pv.discrete())
                throw DataError("fit: numeric-outcome node '" + p +
                                "' has children; outcomes must be sinks");
            plevels.push_back(pv.n_levels());
            pcols.push_back(&data.discrete_column(p));
        }
        const int64_t n_configs = mixed_radix_count(plevels);
        std::vector<int> pvals(parents.size());
        auto row_of = [&](std::size_t r) {
            for (std::size_t k = 0; k < pcols.size(); ++k) pvals[k] = (*pcols[k])[r];
            return mixed_radix_index(pvals, plevels);
        };

        if (var.discrete()) {
            CptNode node;
            node.parents = parents;
            node.parent_levels = plevels;
            node.levels = var.n_levels();
            std::vector<std::vector<int64_t>> counts(
                static_cast<std::size_t>(n_configs),
                std::vector<int64_t>(static_cast<std::size_t>(node.levels), 0));
            const auto& col = data.discrete_column(name);
            for (std::size_t r = 0; r < n; ++r)
                ++counts[static_cast<std::size_t>(row_of(r))][static_cast<std::size_t>(col[r])];
            const double s = config.smoothing;
            node.rows.reserve(static_cast<std::size_t>(n_configs));
            for (const auto& c : counts) {
                int64_t total = 0;
                for (int64_t v : c) total += v;
                std::vector<double> row(static_cast<std::size_t>(node.levels));
                const double denom = static_cast<double>(total) + s * node.levels;
                for (int l = 0; l < node.levels; ++l)
                    row[static_cast<std::size_t>(l)] =
                        (static_cast<double>(c[static_cast<std::size_t>(l)]) + s) / denom;
                node.rows.push_back(std::move(row));
            }
            cpts[name] = std::move(node);
        } else {
            if (!dag.children(name).empty())
                throw DataError("fit: numeric-outcome node '" + name + "' must be a sink");
            OutcomeNode node;
            node.parents = parents;
            node.parent_levels = plevels;
            node.means.assign(static_cast<std::size_t>(n_configs), 0.0);
            node.counts.assign(static_cast<std::size_t>(n_configs), 0);
            const auto& col = data.numeric_column(name);
            double grand = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const auto cfg = static_cast<std::size_t>(row_of(r));
                node.means[cfg] += col[r];
                ++node.counts[cfg];
                grand += col[r];
            }
            node.global_mean = grand / static_cast<double>(n);
            for (std::size_t cfg = 0; cfg < node.means.size(); ++cfg) {
                if (node.counts[cfg] > 0) {
                    node.means[cfg] /= static_cast<double>(node.counts[cfg]);
                } else {
                    node.means[cfg] = node.global_mean;
                    node.empty_cells.push_back(static_cast<int64_t>(cfg));
                }
            }
            outcomes[name] = std::move(node);
        }
    }
    return FittedNetwork(dag, std::move(schema), std::move(cpts), std::move(outcomes));
}

struct InterventionQuery {
    std::string target;
    std::string do_node;
    std::string do_value;  // level label of do_node
};

namespace detail {

// Parent values in mixed-radix order, read from the running assignment.
inline int64_t assignment_config(const std::vector<std::string>& parents,
                                 const std::vector<int>& parent_levels,
                                 const std::map<std::string, int>& assignment) {
    std::vector<int> vals;
    vals.reserve(parents.size());
    for (const auto& p : parents) vals.push_back(assignment.at(p));
    return mixed_radix_index(vals, parent_levels);
}

}  // namespace detail

// E[target | do(do_node = v)] by truncated factorization: the intervened
// node loses its incoming edges and is clamped; the joint over the remaining
// discrete ancestors of the target is enumerated exactly (no sampling).
// Discrete targets use the ordinal value map (level index 0, 1, 2, ...).
inline double interventional_expectation(const FittedNetwork& net, const InterventionQuery& q,
                                         int64_t state_cap = 10'000'000) {
    if (q.target == q.do_node)
        throw DataError("interventional_expectation: target equals do-node");
    const VariableSchema& target_var = net.variable(q.target);
    const VariableSchema& do_var = net.variable(q.do_node);
    if (!do_var.discrete()) throw DataError("cannot intervene on numeric-outcome node");
    const int do_level = do_var.level_index(q.do_value);
    const MixedGraph& dag = net.dag();

    // Ancestors of the target after truncation (do-node keeps no parents).
    std::set<std::string> kept{q.target};
    {
        std::vector<std::string> frontier{q.target};
        while (!frontier.empty()) {
            const std::string cur = frontier.back();
            frontier.pop_back();
            if (cur == q.do_node) continue;  // incoming edges removed by do()
            for (const auto& p : dag.parents(cur))
                if (kept.insert(p).second) frontier.push_back(p);
        }
    }

    // Deterministic topological order restricted to the kept set.
    std::vector<std::string> order;
    for (int i : dag.topological_order()) {
        const std::string& name = dag.node_name(i);
        if (kept.count(name)) order.push_back(name);
    }

    int64_t states = 1;
    for (const auto& name : order) {
        if (name == q.do_node || name == q.target) continue;
        states *= net.variable(name).n_levels();
        if (states > state_cap)
            throw DataError("interventional_expectation: state space exceeds cap; "
                            "bin variables more coarsely");
    }

    const bool numeric_target = !target_var.discrete();
    double total = 0.0;
    std::map<std::string, int> assignment;

    auto value_of_target = [&]() {
        if (numeric_target) {
            const OutcomeNode& node = net.outcome(q.target);
            return node.means[static_cast<std::size_t>(
                detail::assignment_config(node.parents, node.parent_levels, assignment))];
        }
        return static_cast<double>(assignment.at(q.target));
    };

    const std::function<void(std::size_t, double)> recurse = [&](std::size_t k, double prob) {
        if (k == order.size()) {
            total += prob * value_of_target();
            return;
        }
        const std::string& name = order[k];
        if (name == q.do_node) {
            assignment[name] = do_level;
            recurse(k + 1, prob);
            return;
        }
        if (name == q.target && numeric_target) {
            recurse(k + 1, prob);
            return;
        }
        const CptNode& node = net.cpt(name);
        const auto& row = node.rows[static_cast<std::size_t>(
            detail::assignment_config(node.parents, node.parent_levels, assignment))];
        for (int lvl = 0; lvl < node.levels; ++lvl) {
            assignment[name] = lvl;
            recurse(k + 1, prob * row[static_cast<std::size_t>(lvl)]);
        }
        assignment.erase(name);
    };
    recurse(0, 1.0);
    return total;
}

// ACE(cause -> effect) = E[effect | do(cause = x1)] - E[effect | do(cause = x0)].
inline double ace(const FittedNetwork& net, const std::string& cause, const std::string& effect,
                  const std::string& x0, const std::string& x1, int64_t state_cap = 10'000'000) {
    if (x0 == x1) throw DataError("ace: contrast levels must differ");
    const double e1 = interventional_expectation(net, {effect, cause, x1}, state_cap);
    const double e0 = interventional_expectation(net, {effect, cause, x0}, state_cap);
    return e1 - e0;
}

// Associational (non-causal) comparison value: difference of sample
// conditional means, no adjustment.
inline std::optional<double> conditional_ace(const DiscreteDataset& data, const std::string& cause,
                                             const std::string& effect, const std::string& x0,
                                             const std::string& x1) {
    const VariableSchema& cv = data.variable(cause);
    const VariableSchema& ev = data.variable(effect);
    const auto& cc = data.discrete_column(cause);
    const int l0 = cv.level_index(x0);
    const int l1 = cv.level_index(x1);
    double s0 = 0.0, s1 = 0.0;
    int64_t n0 = 0, n1 = 0;
    const std::size_t n = data.n_rows();
    for (std::size_t r = 0; r < n; ++r) {
        double v;
        if (ev.discrete())
            v = static_cast<double>(data.discrete_column(effect)[r]);
        else
            v = data.numeric_column(effect)[r];
        if (cc[r] == l0) { s0 += v; ++n0; }
        if (cc[r] == l1) { s1 += v; ++n1; }
    }
    if (n0 == 0 || n1 == 0) return std::nullopt;
    return s1 / static_cast<double>(n1) - s0 / static_cast<double>(n0);
}

enum class ContrastPolicy { Extreme, Adjacent };

inline std::string to_string(ContrastPolicy p) {
    return p == ContrastPolicy::Extreme ? "extreme" : "adjacent";
}

inline ContrastPolicy contrast_policy_from_string(const std::string& s) {
    if (s == "extreme") return ContrastPolicy::Extreme;
    if (s == "adjacent") return ContrastPolicy::Adjacent;
    throw ConfigError("unknown contrast policy: " + s + " (expected extreme or adjacent)");
}

struct AceCell {
    std::string cause;
    std::string effect;
    bool populated = false;
    std::string reason;  // "no-edge" / "not-in-dag" when unpopulated
    std::string x0, x1;  // headline contrast
    double ace_value = 0.0;
    // adjacent-level contrasts (l_k -> l_{k+1})
    std::vector<std::tuple<std::string, std::string, double>> per_level;
    std::optional<double> conditional;  // associational comparison, non-causal
};

struct AceReportOptions {
    ContrastPolicy contrast = ContrastPolicy::Extreme;
    std::string model_tag = "unspecified";
    std::string dag_source = "hardcoded";  // or "data-driven"
    std::string units = "errors-per-utterance";
    int64_t state_cap = 10'000'000;
};

struct AceReport {
    std::vector<AceCell> rows;
    std::vector<std::string> effects;  // column order of the text table
    AceReportOptions options;
};

// One row per (cause, error outcome). A cell is populated only when the DAG
// carries a direct edge cause -> effect, mirroring the report convention that
// empty cells correspond to absent edges. Under the adjacent policy the
// headline value is the mean per-level step (the extreme ACE divided by the
// number of steps, by telescoping).
inline AceReport ace_report(const FittedNetwork& net, const DiscreteDataset& data,
                            const AceReportOptions& options = {}) {
    AceReport report;
    report.options = options;
    std::vector<std::string> causes;
    for (const auto& v : data.schema()) {
        if (v.discrete() && v.role != VariableRole::Error) causes.push_back(v.name);
        if (!v.discrete() && v.role == VariableRole::Error) report.effects.push_back(v.name);
    }
    const MixedGraph& dag = net.dag();
    for (const auto& cause : causes) {
        for (const auto& effect : report.effects) {
            AceCell cell;
            cell.cause = cause;
            cell.effect = effect;
            const VariableSchema& cv = data.variable(cause);
            cell.x0 = cv.levels.front();
            cell.x1 = cv.levels.back();
            const bool in_dag = dag.has_node(cause) && dag.has_node(effect);
            if (!in_dag) {
                cell.reason = "not-in-dag";
            } else if (!dag.is_directed(cause, effect)) {
                cell.reason = "no-edge";
            } else {
                cell.populated = true;
                const double extreme =
                    ace(net, cause, effect, cell.x0, cell.x1, options.state_cap);
                const int steps = cv.n_levels() - 1;
                for (int k = 0; k < steps; ++k) {
                    const auto& a = cv.levels[static_cast<std::size_t>(k)];
                    const auto& b = cv.levels[static_cast<std::size_t>(k + 1)];
                    cell.per_level.emplace_back(a, b, ace(net, cause, effect, a, b,
                                                          options.state_cap));
                }
                cell.ace_value = options.contrast == ContrastPolicy::Extreme
                                     ? extreme
                                     : extreme / static_cast<double>(steps);
                cell.conditional = conditional_ace(data, cause, effect, cell.x0, cell.x1);
            }
            report.rows.push_back(std::move(cell));
        }
    }
    return report;
}

inline nlohmann::json ace_report_to_json(const AceReport& report) {
    nlohmann::json j;
    j["metadata"] = {{"model", report.options.model_tag},
                     {"dag_source", report.options.dag_source},
                     {"units", report.options.units},
                     {"contrast_policy", to_string(report.options.contrast)},
                     {"note", "conditional_ace is associational (non-causal), for comparison"}};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : report.rows) {
        nlohmann::json r;
        r["cause"] = c.cause;
        r["effect"] = c.effect;
        r["populated"] = c.populated;
        r["contrast"] = {c.x0, c.x1};
        if (c.populated) {
            r["ace"] = c.ace_value;
            nlohmann::json pl = nlohmann::json::array();
            for (const auto& [a, b, v] : c.per_level) pl.push_back({{"x0", a}, {"x1", b}, {"ace", v}});
            r["per_level"] = std::move(pl);
            if (c.conditional) r["conditional_ace"] = *c.conditional;
        } else {
            r["reason"] = c.reason;
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

// Aligned text table: causes as rows, error outcomes as columns, "--" where
// the DAG has no direct edge.
inline std::string ace_report_to_text(const AceReport& report) {
    std::map<std::string, std::map<std::string, std::string>> cells;
    std::vector<std::string> causes;
    for (const auto& c : report.rows) {
        if (cells.find(c.cause) == cells.end()) causes.push_back(c.cause);
        std::string text = "--";
        if (c.populated) {
            std::ostringstream os;
            os << std::fixed << std::setprecision(4) << c.ace_value;
            text = os.str();
        }
        cells[c.cause][c.effect] = text;
    }
    std::size_t w0 = std::string("Cause").size();
    for (const auto& c : causes) w0 = std::max(w0, c.size());
    std::vector<std::size_t> w(report.effects.size());
    for (std::size_t i = 0; i < report.effects.size(); ++i) {
        w[i] = report.effects[i].size();
        for (const auto& c : causes) w[i] = std::max(w[i], cells[c][report.effects[i]].size());
    }
    std::ostringstream os;
    os << "model: " << report.options.model_tag << "  dag: " << report.options.dag_source
       << "  units: " << report.options.units
       << "  contrast: " << to_string(report.options.contrast) << "\n";
    os << std::left << std::setw(static_cast<int>(w0 + 2)) << "Cause";
    for (std::size_t i = 0; i < report.effects.size(); ++i)
        os << std::setw(static_cast<int>(w[i] + 2)) << report.effects[i];
    os << "\n";
    for (const auto& c : causes) {
        os << std::setw(static_cast<int>(w0 + 2)) << c;
        for (std::size_t i = 0; i < report.effects.size(); ++i)
            os << std::setw(static_cast<int>(w[i] + 2)) << cells[c][report.effects[i]];
        os << "\n";
    }
    return os.str();
}

}  // namespace casr
