#pragma once

#include "casr/dataset.hpp"
#include "casr/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace casr {

enum class CiTestKind { G2, Chi2 };

inline std::string to_string(CiTestKind k) { return k == CiTestKind::G2 ? "g2" : "chi2"; }

inline CiTestKind ci_test_kind_from_string(const std::string& s) {
    if (s == "g2") return CiTestKind::G2;
    if (s == "chi2") return CiTestKind::Chi2;
    throw ConfigError("unknown CI test: " + s + " (expected g2 or chi2)");
}

struct CiTestConfig {
    CiTestKind test = CiTestKind::G2;
    double alpha = 0.05;
    double min_samples_per_df = 10.0;  // reliability heuristic: n >= this * dof

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("ci.alpha must be in (0,1)");
        if (!(min_samples_per_df > 0.0))
            throw ConfigError("ci.min_samples_per_df must be positive");
    }
};

struct CiResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    bool independent = false;
    bool reliable = true;

    bool operator==(const CiResult&) const = default;
};

// Counts of (x, y) level combinations, stratified by the joint configuration
// of the conditioning variables. Strata are keyed by the mixed-radix index of
// the z configuration; only observed strata are stored.
struct ContingencyTable {
    int x_levels = 0;
    int y_levels = 0;
    // stratum key -> row-major x_levels * y_levels counts
    std::map<int64_t, std::vector<int64_t>> strata;

    int64_t total() const {
        int64_t t = 0;
        for (const auto& [k, cells] : strata)
            for (int64_t c : cells) t += c;
        return t;
    }
};

inline ContingencyTable contingency(const DiscreteDataset& data, const std::string& x,
                                    const std::string& y, const std::set<std::string>& z) {
    if (x == y) throw DataError("contingency: x and y must differ");
    if (z.count(x) || z.count(y))
        throw DataError("contingency: conditioning set contains x or y");
    auto require_discrete = [&](const std::string& name) {
        const auto& v = data.variable(name);
        if (!v.discrete())
            throw DataError("contingency: variable '" + name +
                            "' is numeric-outcome; bin it first (features module)");
        return data.var_index(name);
    };
    const int xi = require_discrete(x);
    const int yi = require_discrete(y);
    std::vector<int> zi;
    std::vector<int64_t> zbase;
    int64_t radix = 1;
    for (const auto& name : z) {  // std::set iterates lexicographically
        int i = require_discrete(name);
        zi.push_back(i);
        zbase.push_back(radix);
        radix *= data.schema()[static_cast<std::size_t>(i)].n_levels();
    }

    ContingencyTable t;
    t.x_levels = data.schema()[static_cast<std::size_t>(xi)].n_levels();
    t.y_levels = data.schema()[static_cast<std::size_t>(yi)].n_levels();
    const auto& xc = data.discrete_column(xi);
    const auto& yc = data.discrete_column(yi);
    std::vector<const DiscreteDataset::DiscreteColumn*> zc;
    zc.reserve(zi.size());
    for (int i : zi) zc.push_back(&data.discrete_column(i));

    const std::size_t n = data.n_rows();
    for (std::size_t r = 0; r < n; ++r) {
        int64_t key = 0;
        for (std::size_t k = 0; k < zc.size(); ++k) key += zbase[k] * (*zc[k])[r];
        auto& cells = t.strata[key];
        if (cells.empty()) cells.assign(static_cast<std::size_t>(t.x_levels * t.y_levels), 0);
        ++cells[static_cast<std::size_t>(xc[r] * t.y_levels + yc[r])];
    }
    return t;
}

namespace detail {

// Per-stratum statistic plus the nonzero-margin dof correction:
// dof_stratum = max(r_nz - 1, 0) * max(c_nz - 1, 0).
template <typename CellFn>
std::pair<double, int> accumulate_stratified(const ContingencyTable& t, CellFn cell_term) {
    double stat = 0.0;
    int dof = 0;
    const int R = t.x_levels, C = t.y_levels;
    std::vector<double> row(static_cast<std::size_t>(R));
    std::vector<double> col(static_cast<std::size_t>(C));
    for (const auto& [key, cells] : t.strata) {
        std::fill(row.begin(), row.end(), 0.0);
        std::fill(col.begin(), col.end(), 0.0);
        double total = 0.0;
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < C; ++j) {
                const double o = static_cast<double>(cells[static_cast<std::size_t>(i * C + j)]);
                row[static_cast<std::size_t>(i)] += o;
                col[static_cast<std::size_t>(j)] += o;
                total += o;
            }
        if (total <= 0.0) continue;
        int r_nz = 0, c_nz = 0;
        for (double v : row) r_nz += v > 0.0;
        for (double v : col) c_nz += v > 0.0;
        dof += std::max(r_nz - 1, 0) * std::max(c_nz - 1, 0);
        for (int i = 0; i < R; ++i) {
            if (row[static_cast<std::size_t>(i)] <= 0.0) continue;
            for (int j = 0; j < C; ++j) {
                if (col[static_cast<std::size_t>(j)] <= 0.0) continue;
                const double o = static_cast<double>(cells[static_cast<std::size_t>(i * C + j)]);
                const double e =
                    row[static_cast<std::size_t>(i)] * col[static_cast<std::size_t>(j)] / total;
                stat += cell_term(o, e);
            }
        }
    }
    return {stat, dof};
}

}  // namespace detail

// Likelihood-ratio statistic G^2 = 2 sum O ln(O/E); cells with O = 0
// contribute nothing.
inline std::pair<double, int> g2_statistic(const ContingencyTable& t) {
    auto [stat, dof] = detail::accumulate_stratified(
        t, [](double o, double e) { return o > 0.0 ? 2.0 * o * std::log(o / e) : 0.0; });
    return {std::max(stat, 0.0), dof};
}

// Pearson chi-squared statistic, same dof correction as G^2.
inline std::pair<double, int> chi2_statistic(const ContingencyTable& t) {
    auto [stat, dof] = detail::accumulate_stratified(t, [](double o, double e) {
        const double d = o - e;
        return e > 0.0 ? d * d / e : 0.0;
    });
    return {std::max(stat, 0.0), dof};
}

namespace detail {

// Regularized lower incomplete gamma P(a, x) by series expansion (x < a+1).
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction
// (x >= a+1).
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// Survival function of the chi-squared distribution: Q(dof/2, x/2).
// dof = 0 is defined as p = 1 (no evidence either way).
inline double chi2_sf(double statistic, int dof) {
    if (statistic < 0.0) throw DataError("chi2_sf: statistic must be nonnegative");
    if (dof < 0) throw DataError("chi2_sf: dof must be nonnegative");
    if (dof == 0) return 1.0;
    if (statistic == 0.0) return 1.0;
    const double a = 0.5 * dof;
    const double x = 0.5 * statistic;
    double q = (x < a + 1.0) ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_cf(a, x);
    return std::clamp(q, 0.0, 1.0);
}

// Conditional-independence test on discrete data. Symmetric in (x, y).
// A test is reliable when n >= min_samples_per_df * dof; unreliable tests
// report dependence (the edge is retained downstream).
inline CiResult ci_test(const DiscreteDataset& data, const std::string& x, const std::string& y,
                        const std::set<std::string>& z, const CiTestConfig& config) {
    config.validate();
    // canonical pair order makes the result bit-identical under (x, y) swap
    const ContingencyTable t =
        x <= y ? contingency(data, x, y, z) : contingency(data, y, x, z);
    const auto [stat, dof] =
        config.test == CiTestKind::G2 ? g2_statistic(t) : chi2_statistic(t);
    CiResult r;
    r.statistic = stat;
    r.dof = dof;
    r.p_value = chi2_sf(stat, dof);
    r.reliable =
        static_cast<double>(data.n_rows()) >= config.min_samples_per_df * static_cast<double>(dof);
    r.independent = r.reliable && r.p_value > config.alpha;
    return r;
}

}  // namespace casr
