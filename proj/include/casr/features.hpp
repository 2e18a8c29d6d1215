#pragma once

#include "casr/dataset.hpp"
#include "casr/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace casr {

// One row of raw analysis data; transcripts are stored tokenized.
struct UtteranceRecord {
    std::string utt_id;
    double age_years = 0.0;
    std::string gender;  // "M", "F" or "unknown"
    double snr_db = 0.0;
    std::optional<std::vector<double>> phone_posterior_ratios;  // each in (0,1]
    std::vector<std::string> ref;
    std::vector<std::string> hyp;  // may be empty
    std::optional<double> gop_utt;
};

struct FrequencyLexicon {
    std::map<std::string, int64_t> counts;
    int64_t total_tokens = 0;

    void validate() const {
        if (counts.empty()) throw DataError("lexicon is empty");
        if (total_tokens < 1) throw DataError("lexicon total token count must be positive");
        for (const auto& [w, c] : counts)
            if (c < 1) throw DataError("lexicon count for '" + w + "' must be >= 1");
    }
};

struct AlignmentResult {
    int subs = 0;
    int del = 0;
    int ins = 0;
    int matches = 0;
    double wer = 0.0;
};

// --- pronunciation scores ---

// Posterior of the target phone normalized by the maximum posterior.
inline double gop_phone(std::span<const double> posteriors, std::size_t target) {
    if (posteriors.empty()) throw DataError("gop_phone: empty posterior vector");
    if (target >= posteriors.size()) throw DataError("gop_phone: target index out of range");
    double mx = 0.0;
    for (double p : posteriors) {
        if (p < 0.0) throw DataError("gop_phone: negative posterior");
        mx = std::max(mx, p);
    }
    if (mx <= 0.0) throw DataError("gop_phone: all posteriors are zero");
    return posteriors[target] / mx;
}

// Utterance score: the mean of the per-phone scores.
inline double gop_utterance(std::span<const double> phone_scores) {
    if (phone_scores.empty()) throw DataError("gop_utterance: empty score list");
    double s = 0.0;
    for (double v : phone_scores) s += v;
    return s / static_cast<double>(phone_scores.size());
}

// --- discretization ---

// Bin rule: value v falls into the first bin i with v <= boundaries[i],
// else into the last bin. labels.size() == boundaries.size() + 1.
struct BinSpec {
    std::vector<double> boundaries;
    std::vector<std::string> labels;

    void validate() const {
        if (labels.size() != boundaries.size() + 1)
            throw ConfigError("bin spec: need one more label than boundary");
        for (std::size_t i = 1; i < boundaries.size(); ++i)
            if (!(boundaries[i - 1] <= boundaries[i]))
                throw ConfigError("bin spec: boundaries must be nondecreasing");
    }

    int assign(double v) const {
        for (std::size_t i = 0; i < boundaries.size(); ++i)
            if (v <= boundaries[i]) return static_cast<int>(i);
        return static_cast<int>(boundaries.size());
    }
};

// Nearest-rank percentile breakpoints over the distinct values; ties go to
// the lower bin. Requires at least k distinct values, which guarantees every
// bin is nonempty on the input column.
inline std::vector<double> quantile_breaks(const std::vector<double>& values, int k,
                                           const std::string& variable = "") {
    std::vector<double> d(values.begin(), values.end());
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    const int m = static_cast<int>(d.size());
    if (m < k) {
        const std::string who = variable.empty() ? "input" : "variable '" + variable + "'";
        throw DataError(who + ": fewer than " + std::to_string(k) +
                        " distinct values; cannot form " + std::to_string(k) + " bins");
    }
    std::vector<double> breaks;
    for (int j = 1; j < k; ++j) {
        const int rank = (j * m + k - 1) / k;  // ceil(j*m/k)
        breaks.push_back(d[static_cast<std::size_t>(rank - 1)]);
    }
    return breaks;
}

struct TertileBreaks {
    double t1 = 0.0;
    double t2 = 0.0;
};

// Low (= v <= t1), Average (t1 < v <= t2), High (v > t2).
inline TertileBreaks tertile_bins(const std::vector<double>& values,
                                  const std::string& variable = "") {
    const auto b = quantile_breaks(values, 3, variable);
    return {b[0], b[1]};
}

inline int tertile_assign(double v, const TertileBreaks& t) {
    if (v <= t.t1) return 0;
    if (v <= t.t2) return 1;
    return 2;
}

enum class SnrLevel { Noisy = 0, Average = 1, Clean = 2 };

// Fixed decibel bins; the shared 20 dB and 5 dB boundaries resolve upward
// (20 -> Clean, 5 -> Average).
inline SnrLevel discretize_snr(double snr_db) {
    if (!std::isfinite(snr_db)) throw DataError("discretize_snr: non-finite SNR");
    if (snr_db >= 20.0) return SnrLevel::Clean;
    if (snr_db >= 5.0) return SnrLevel::Average;
    return SnrLevel::Noisy;
}

inline std::string to_string(SnrLevel s) {
    switch (s) {
        case SnrLevel::Noisy: return "Noisy";
        case SnrLevel::Average: return "Average";
        case SnrLevel::Clean: return "Clean";
    }
    return "?";
}

// --- vocabulary difficulty ---

// Case-fold and strip leading/trailing punctuation.
inline std::string normalize_word(const std::string& word) {
    std::size_t lo = 0, hi = word.size();
    auto is_punct = [](unsigned char c) { return std::ispunct(c) != 0; };
    while (lo < hi && is_punct(static_cast<unsigned char>(word[lo]))) ++lo;
    while (hi > lo && is_punct(static_cast<unsigned char>(word[hi - 1]))) --hi;
    std::string out;
    out.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(word[i]))));
    return out;
}

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            std::string w = normalize_word(cur);
            if (!w.empty()) out.push_back(std::move(w));
            cur.clear();
        }
    };
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            cur.push_back(c);
    }
    flush();
    return out;
}

// Add-one smoothed negative log relative frequency; unseen words get count 0
// and therefore the maximal rarity for the lexicon.
inline double word_rarity(const std::string& word, const FrequencyLexicon& lex) {
    lex.validate();
    const std::string w = normalize_word(word);
    if (w.empty()) throw DataError("word_rarity: empty word after normalization");
    const auto it = lex.counts.find(w);
    const int64_t count = it == lex.counts.end() ? 0 : it->second;
    const double denom =
        static_cast<double>(lex.total_tokens) + static_cast<double>(lex.counts.size());
    return -std::log((static_cast<double>(count) + 1.0) / denom);
}

inline double sentence_difficulty(std::span<const std::string> words, const FrequencyLexicon& lex) {
    if (words.empty()) throw DataError("sentence_difficulty: empty word sequence");
    double s = 0.0;
    for (const auto& w : words) s += word_rarity(w, lex);
    return s / static_cast<double>(words.size());
}

// --- word error rate ---

// Unit-cost Levenshtein alignment. Among minimal-cost alignments the one with
// the most matches, then the most substitutions, is chosen (preference order
// match > substitution > deletion > insertion), which makes the returned
// decomposition deterministic.
inline AlignmentResult align_wer(std::span<const std::string> ref,
                                 std::span<const std::string> hyp) {
    if (ref.empty()) throw DataError("align_wer: empty reference (WER undefined)");
    const int n = static_cast<int>(ref.size());
    const int m = static_cast<int>(hyp.size());

    struct Cell {
        int cost, matches, subs;
    };
    auto better = [](const Cell& a, const Cell& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.matches != b.matches) return a.matches > b.matches;
        return a.subs > b.subs;
    };

    std::vector<Cell> prev(static_cast<std::size_t>(m + 1)), cur(static_cast<std::size_t>(m + 1));
    for (int j = 0; j <= m; ++j) prev[static_cast<std::size_t>(j)] = {j, 0, 0};
    for (int i = 1; i <= n; ++i) {
        cur[0] = {i, 0, 0};
        for (int j = 1; j <= m; ++j) {
            const bool eq = ref[static_cast<std::size_t>(i - 1)] == hyp[static_cast<std::size_t>(j - 1)];
            Cell diag = prev[static_cast<std::size_t>(j - 1)];
            if (eq) {
                ++diag.matches;
            } else {
                ++diag.cost;
                ++diag.subs;
            }
            Cell del = prev[static_cast<std::size_t>(j)];
            ++del.cost;
            Cell ins = cur[static_cast<std::size_t>(j - 1)];
            ++ins.cost;
            Cell best = diag;
            if (better(del, best)) best = del;
            if (better(ins, best)) best = ins;
            cur[static_cast<std::size_t>(j)] = best;
        }
        std::swap(prev, cur);
    }
    const Cell& final_cell = prev[static_cast<std::size_t>(m)];
    AlignmentResult r;
    r.matches = final_cell.matches;
    r.subs = final_cell.subs;
    r.del = n - r.matches - r.subs;
    r.ins = m - r.matches - r.subs;
    r.wer = static_cast<double>(r.subs + r.del + r.ins) / static_cast<double>(n);
    return r;
}

// --- dataset assembly ---

struct FeatureConfig {
    std::optional<BinSpec> age_bins;        // default: one ordinal level per integer year
    std::optional<BinSpec> gop_bins;        // default: tertiles Low/Average/High
    std::optional<BinSpec> vocab_bins;      // default: tertiles Low/Average/High
    std::optional<BinSpec> num_words_bins;  // default: quartiles
    int min_records = 30;                   // tertile stability floor
    bool gop_log = false;                   // use log posterior ratios (order-preserving)
    int jobs = 1;                           // workers for per-record extraction

    void validate() const {
        if (min_records < 1) throw ConfigError("features.min_records must be >= 1");
        if (jobs < 1) throw ConfigError("features.jobs must be >= 1");
        for (const auto* b : {&age_bins, &gop_bins, &vocab_bins, &num_words_bins})
            if (*b) (*b)->validate();
    }
};

struct BuildReport {
    std::map<std::string, int> dropped;          // reason -> count
    int used = 0;
    std::map<std::string, BinSpec> resolved_bins;  // sidecar content
};

namespace detail {

inline std::string format_number_label(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    std::ostringstream os;
    os << v;
    return os.str();
}

// Data-driven bins: quantiles when there are enough distinct values, one
// level per distinct value otherwise (natural for small integer counts).
inline BinSpec data_driven_bins(const std::vector<double>& values, int k,
                                const std::vector<std::string>& quantile_labels,
                                const std::string& variable) {
    std::vector<double> d(values.begin(), values.end());
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    if (d.size() < 2)
        throw DataError("variable '" + variable + "': fewer than 2 distinct values");
    BinSpec spec;
    if (static_cast<int>(d.size()) >= k) {
        spec.boundaries = quantile_breaks(values, k, variable);
        spec.labels = quantile_labels;
    } else {
        for (std::size_t i = 0; i + 1 < d.size(); ++i) spec.boundaries.push_back(d[i]);
        for (double v : d) spec.labels.push_back(format_number_label(v));
    }
    return spec;
}

}  // namespace detail

// Derives the Table-1 variables from raw records and discretizes them.
// Binning is a two-pass barrier: all columns are collected, breakpoints
// computed on the full column, then assigned -- so the result is invariant
// under record permutation (up to row order).
inline DiscreteDataset build_discrete_dataset(const std::vector<UtteranceRecord>& records,
                                              const FrequencyLexicon& lexicon,
                                              const FeatureConfig& config = {},
                                              BuildReport* report_out = nullptr) {
    config.validate();
    lexicon.validate();
    BuildReport report;

    struct Row {
        double age, gop, snr, vocab, subs, del, ins;
        int gender;  // 0 = F, 1 = M
        int num_words;
        bool ok = false;
        std::string drop_reason;
    };

    // per-record extraction: embarrassingly parallel, merged in record order
    std::vector<Row> extracted(records.size());
    auto extract_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const UtteranceRecord& rec = records[i];
            Row& row = extracted[i];
            if (!std::isfinite(rec.age_years) || rec.age_years < 0.0) {
                row.drop_reason = "invalid-age";
                continue;
            }
            if (rec.gender == "F") row.gender = 0;
            else if (rec.gender == "M") row.gender = 1;
            else {
                row.drop_reason = "missing-gender";
                continue;
            }
            if (!std::isfinite(rec.snr_db)) {
                row.drop_reason = "invalid-snr";
                continue;
            }
            if (rec.ref.empty()) {
                row.drop_reason = "empty-ref";
                continue;
            }
            double gop;
            if (rec.phone_posterior_ratios && !rec.phone_posterior_ratios->empty()) {
                bool valid = true;
                for (double v : *rec.phone_posterior_ratios)
                    if (!(v > 0.0 && v <= 1.0)) valid = false;
                if (!valid) {
                    row.drop_reason = "invalid-gop";
                    continue;
                }
                gop = gop_utterance(*rec.phone_posterior_ratios);
            } else if (rec.gop_utt) {
                if (!(*rec.gop_utt > 0.0 && *rec.gop_utt <= 1.0)) {
                    row.drop_reason = "invalid-gop";
                    continue;
                }
                gop = *rec.gop_utt;
            } else {
                row.drop_reason = "missing-gop";
                continue;
            }
            if (config.gop_log) gop = std::log(gop);

            row.age = static_cast<double>(std::llround(rec.age_years));
            row.snr = rec.snr_db;
            row.gop = gop;
            row.vocab = sentence_difficulty(rec.ref, lexicon);
            row.num_words = static_cast<int>(rec.ref.size());
            const AlignmentResult a = align_wer(rec.ref, rec.hyp);
            row.subs = a.subs;
            row.del = a.del;
            row.ins = a.ins;
            row.ok = true;
        }
    };
    if (config.jobs <= 1 || records.size() < 64) {
        extract_range(0, records.size());
    } else {
        const std::size_t nw =
            std::min<std::size_t>(static_cast<std::size_t>(config.jobs), records.size());
        const std::size_t chunk = (records.size() + nw - 1) / nw;
        std::vector<std::future<void>> futures;
        for (std::size_t w = 0; w < nw; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(records.size(), lo + chunk);
            if (lo >= hi) break;
            futures.push_back(std::async(std::launch::async, extract_range, lo, hi));
        }
        for (auto& f : futures) f.get();
    }

    std::vector<Row> rows;
    rows.reserve(records.size());
    for (const auto& row : extracted) {
        if (row.ok)
            rows.push_back(row);
        else
            ++report.dropped[row.drop_reason];
    }

    report.used = static_cast<int>(rows.size());
    if (!records.empty() && rows.size() * 2 < records.size())
        throw DataError("more than 50% of records were dropped; inspect the input");
    if (static_cast<int>(rows.size()) < config.min_records)
        throw DataError("need at least " + std::to_string(config.min_records) +
                        " usable records, got " + std::to_string(rows.size()));

    auto column_of = [&](auto getter) {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(getter(r));
        return v;
    };

    // Resolve bins (configured or data-driven).
    BinSpec age_bins;
    if (config.age_bins) {
        age_bins = *config.age_bins;
    } else {
        // one ordinal level per observed integer year
        std::vector<double> years = column_of([](const Row& r) { return r.age; });
        std::sort(years.begin(), years.end());
        years.erase(std::unique(years.begin(), years.end()), years.end());
        if (years.size() < 2) throw DataError("variable 'Age': fewer than 2 distinct values");
        for (std::size_t i = 0; i + 1 < years.size(); ++i) age_bins.boundaries.push_back(years[i]);
        for (double y : years) age_bins.labels.push_back(detail::format_number_label(y));
    }
    const std::vector<std::string> lah = {"Low", "Average", "High"};
    BinSpec gop_bins = config.gop_bins ? *config.gop_bins : [&] {
        const auto b = quantile_breaks(column_of([](const Row& r) { return r.gop; }), 3, "GoP");
        return BinSpec{b, lah};
    }();
    BinSpec vocab_bins = config.vocab_bins ? *config.vocab_bins : [&] {
        const auto b = quantile_breaks(column_of([](const Row& r) { return r.vocab; }), 3,
                                       "VocabDifficulty");
        return BinSpec{b, lah};
    }();
    BinSpec num_words_bins =
        config.num_words_bins
            ? *config.num_words_bins
            : detail::data_driven_bins(
                  column_of([](const Row& r) { return static_cast<double>(r.num_words); }), 4,
                  {"Q1", "Q2", "Q3", "Q4"}, "NumWords");
    BinSpec subs_bins = detail::data_driven_bins(column_of([](const Row& r) { return r.subs; }),
                                                 4, {"Q1", "Q2", "Q3", "Q4"}, "Subs");
    BinSpec del_bins = detail::data_driven_bins(column_of([](const Row& r) { return r.del; }), 4,
                                                {"Q1", "Q2", "Q3", "Q4"}, "Del");
    BinSpec ins_bins = detail::data_driven_bins(column_of([](const Row& r) { return r.ins; }), 4,
                                                {"Q1", "Q2", "Q3", "Q4"}, "Ins");
    report.resolved_bins = {{"Age", age_bins},       {"GoP", gop_bins},
                            {"VocabDifficulty", vocab_bins}, {"NumWords", num_words_bins},
                            {"Subs_bin", subs_bins}, {"Del_bin", del_bins},
                            {"Ins_bin", ins_bins}};

    auto discrete_from = [&](const BinSpec& bins, auto getter) {
        DiscreteDataset::DiscreteColumn col;
        col.reserve(rows.size());
        for (const auto& r : rows) col.push_back(bins.assign(getter(r)));
        return col;
    };
    auto numeric_from = [&](auto getter) {
        DiscreteDataset::NumericColumn col;
        col.reserve(rows.size());
        for (const auto& r : rows) col.push_back(getter(r));
        return col;
    };

    std::vector<VariableSchema> schema;
    std::vector<DiscreteDataset::Column> columns;
    auto add_discrete = [&](const std::string& name, const std::vector<std::string>& levels,
                            VariableRole role, DiscreteDataset::DiscreteColumn col) {
        schema.push_back({name, VariableKind::Ordinal, levels, role});
        columns.emplace_back(std::move(col));
    };

    add_discrete("Age", age_bins.labels, VariableRole::Physiological,
                 discrete_from(age_bins, [](const Row& r) { return r.age; }));
    {
        DiscreteDataset::DiscreteColumn col;
        for (const auto& r : rows) col.push_back(r.gender);
        schema.push_back({"Gender", VariableKind::Categorical, {"F", "M"},
                          VariableRole::Physiological});
        columns.emplace_back(std::move(col));
    }
    add_discrete("GoP", gop_bins.labels, VariableRole::Cognitive,
                 discrete_from(gop_bins, [](const Row& r) { return r.gop; }));
    {
        DiscreteDataset::DiscreteColumn col;
        for (const auto& r : rows) col.push_back(static_cast<int>(discretize_snr(r.snr)));
        schema.push_back({"SNR", VariableKind::Ordinal, {"Noisy", "Average", "Clean"},
                          VariableRole::Extrinsic});
        columns.emplace_back(std::move(col));
    }
    add_discrete("VocabDifficulty", vocab_bins.labels, VariableRole::Extrinsic,
                 discrete_from(vocab_bins, [](const Row& r) { return r.vocab; }));
    add_discrete("NumWords", num_words_bins.labels, VariableRole::Extrinsic,
                 discrete_from(num_words_bins,
                               [](const Row& r) { return static_cast<double>(r.num_words); }));

    schema.push_back({"Subs", VariableKind::NumericOutcome, {}, VariableRole::Error});
    columns.emplace_back(numeric_from([](const Row& r) { return r.subs; }));
    schema.push_back({"Del", VariableKind::NumericOutcome, {}, VariableRole::Error});
    columns.emplace_back(numeric_from([](const Row& r) { return r.del; }));
    schema.push_back({"Ins", VariableKind::NumericOutcome, {}, VariableRole::Error});
    columns.emplace_back(numeric_from([](const Row& r) { return r.ins; }));

    add_discrete("Subs_bin", subs_bins.labels, VariableRole::Error,
                 discrete_from(subs_bins, [](const Row& r) { return r.subs; }));
    add_discrete("Del_bin", del_bins.labels, VariableRole::Error,
                 discrete_from(del_bins, [](const Row& r) { return r.del; }));
    add_discrete("Ins_bin", ins_bins.labels, VariableRole::Error,
                 discrete_from(ins_bins, [](const Row& r) { return r.ins; }));

    if (report_out) *report_out = std::move(report);
    return DiscreteDataset(std::move(schema), std::move(columns));
}

// Adds a quantile-binned ordinal twin "<name>_bin" for every numeric-outcome
// column that lacks one.
inline DiscreteDataset bin_numeric_outcomes(const DiscreteDataset& data, int k = 4) {
    std::vector<VariableSchema> schema;
    std::vector<DiscreteDataset::Column> columns;
    for (const auto& v : data.schema()) {
        schema.push_back(v);
        if (v.discrete())
            columns.emplace_back(data.discrete_column(v.name));
        else
            columns.emplace_back(data.numeric_column(v.name));
    }
    for (const auto& v : data.schema()) {
        if (v.discrete()) continue;
        const std::string bin_name = v.name + "_bin";
        if (data.has_variable(bin_name)) continue;
        const auto& col = data.numeric_column(v.name);
        const BinSpec bins =
            detail::data_driven_bins(col, k, {"Q1", "Q2", "Q3", "Q4"}, v.name);
        DiscreteDataset::DiscreteColumn bcol;
        bcol.reserve(col.size());
        for (double x : col) bcol.push_back(bins.assign(x));
        schema.push_back({bin_name, VariableKind::Ordinal, bins.labels, v.role});
        columns.emplace_back(std::move(bcol));
    }
    return DiscreteDataset(std::move(schema), std::move(columns));
}

// All-discrete view for structure discovery: numeric outcomes are replaced by
// their "<name>_bin" twin, renamed to the plain name so graph nodes match the
// report vocabulary.
inline DiscreteDataset discovery_view(const DiscreteDataset& data) {
    std::vector<std::pair<std::string, std::string>> spec;
    for (const auto& v : data.schema()) {
        if (!v.discrete()) {
            const std::string bin_name = v.name + "_bin";
            if (!data.has_variable(bin_name))
                throw DataError("discovery_view: numeric-outcome '" + v.name +
                                "' has no binned twin '" + bin_name +
                                "'; run bin_numeric_outcomes first");
            spec.emplace_back(bin_name, v.name);
        } else if (!(v.name.size() > 4 && v.name.ends_with("_bin") &&
                     data.has_variable(v.name.substr(0, v.name.size() - 4)))) {
            spec.emplace_back(v.name, v.name);
        }
    }
    return data.select(spec);
}

// Companion view for quantification: keeps numeric outcomes, drops the
// binned twins.
inline DiscreteDataset quantify_view(const DiscreteDataset& data) {
    std::vector<std::pair<std::string, std::string>> spec;
    for (const auto& v : data.schema()) {
        if (v.discrete() && v.name.size() > 4 && v.name.ends_with("_bin") &&
            data.has_variable(v.name.substr(0, v.name.size() - 4)))
            continue;
        spec.emplace_back(v.name, v.name);
    }
    return data.select(spec);
}

}  // namespace casr
