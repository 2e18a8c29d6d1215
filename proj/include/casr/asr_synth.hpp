#pragma once

#include "casr/dataset.hpp"
#include "casr/error.hpp"
#include "casr/features.hpp"
#include "casr/scm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace casr {

// Raw-record rendering of a sample drawn from the ASR error fixture. Every
// derived feature lands strictly inside its bin (ranges keep a margin from
// every boundary), and hypothesis transcripts are constructed so that the
// minimal-edit alignment recovers exactly the written error counts:
// deletions sit in a leading run, substitutions behind a kept guard word,
// insertions are appended, and replacement tokens are globally unique.
struct AsrRecordsBundle {
    std::vector<UtteranceRecord> records;
    std::map<std::string, std::vector<double>> gop_sidecar;  // utt_id -> phone ratios
    FrequencyLexicon lexicon;
    std::map<std::string, BinSpec> bins;  // fixed boundaries for re-discretization
    DiscreteDataset adjusted;             // sample with integerized error counts
};

namespace detail {

inline const std::vector<std::string>& easy_words() {
    static const std::vector<std::string> w = {"the",  "and",  "you",  "was", "for",
                                               "are",  "with", "his",  "they", "this"};
    return w;
}
inline const std::vector<std::string>& medium_words() {
    static const std::vector<std::string> w = {"school", "water",  "happy",  "little", "green",
                                               "story",  "friend", "animal", "window", "garden"};
    return w;
}
inline const std::vector<std::string>& hard_words() {
    static const std::vector<std::string> w = {
        "synthesis", "quarantine",  "algorithm",  "beneficial", "hypothesis",
        "territory", "molecule",    "temperature", "calculator", "encyclopedia"};
    return w;
}

}  // namespace detail

// Synthetic word-frequency lexicon with three well-separated rarity tiers.
inline FrequencyLexicon demo_lexicon() {
    FrequencyLexicon lex;
    for (const auto& w : detail::easy_words()) lex.counts[w] = 5000;
    for (const auto& w : detail::medium_words()) lex.counts[w] = 120;
    for (const auto& w : detail::hard_words()) lex.counts[w] = 4;
    lex.total_tokens = 60000;
    return lex;
}

inline std::map<std::string, BinSpec> asr_fixture_bins() {
    return {{"Age", {{7.5, 10.5}, {"Young", "Mid", "Old"}}},
            {"GoP", {{0.44, 0.66}, {"Low", "Average", "High"}}},
            {"VocabDifficulty", {{4.3, 7.8}, {"Low", "Average", "High"}}},
            {"NumWords", {{6.5, 9.5}, {"Short", "Medium", "Long"}}}};
}

inline AsrRecordsBundle render_asr_records(const DiscreteDataset& sample, uint64_t seed) {
    for (const char* required :
         {"Age", "Gender", "GoP", "SNR", "VocabDifficulty", "NumWords", "Subs", "Del", "Ins"})
        if (!sample.has_variable(required))
            throw DataError(std::string("render_asr_records: sample lacks variable '") + required +
                            "' (expected a draw from the ASR error fixture)");

    AsrRecordsBundle bundle;
    bundle.lexicon = demo_lexicon();
    bundle.bins = asr_fixture_bins();

    const auto& age = sample.discrete_column("Age");
    const auto& gender = sample.discrete_column("Gender");
    const auto& gop = sample.discrete_column("GoP");
    const auto& snr = sample.discrete_column("SNR");
    const auto& vocab = sample.discrete_column("VocabDifficulty");
    const auto& words = sample.discrete_column("NumWords");
    const auto& subs = sample.numeric_column("Subs");
    const auto& del = sample.numeric_column("Del");
    const auto& ins = sample.numeric_column("Ins");

    DiscreteDataset::NumericColumn subs_adj(sample.n_rows());
    DiscreteDataset::NumericColumn del_adj(sample.n_rows());
    DiscreteDataset::NumericColumn ins_adj(sample.n_rows());

    const std::size_t n_rows = sample.n_rows();
    bundle.records.reserve(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        SplitMix64 rng(substream_seed(seed ^ 0x7265636F72647321ULL, r));
        UtteranceRecord rec;
        {
            std::ostringstream os;
            os << "utt" << std::setw(6) << std::setfill('0') << r;
            rec.utt_id = os.str();
        }
        rec.age_years = static_cast<double>(5 + 3 * age[r] + static_cast<int>(rng.next_below(3)));
        rec.gender = gender[r] == 0 ? "F" : "M";
        {
            constexpr double lo[] = {-4.5, 5.5, 20.5};
            constexpr double hi[] = {4.5, 19.0, 29.5};
            rec.snr_db = lo[snr[r]] + rng.next_double() * (hi[snr[r]] - lo[snr[r]]);
        }
        double g;
        {
            constexpr double lo[] = {0.25, 0.48, 0.70};
            constexpr double hi[] = {0.40, 0.62, 0.92};
            g = lo[gop[r]] + rng.next_double() * (hi[gop[r]] - lo[gop[r]]);
        }
        rec.gop_utt = g;
        if (r % 3 == 0) {
            const double d = 0.03;
            bundle.gop_sidecar[rec.utt_id] = {g + d, g - d, g + d, g - d, g};
            rec.phone_posterior_ratios = bundle.gop_sidecar[rec.utt_id];
        }

        int n_words;
        switch (words[r]) {
            case 0: n_words = 5 + static_cast<int>(rng.next_below(2)); break;
            case 1: n_words = 7 + static_cast<int>(rng.next_below(3)); break;
            default: n_words = 10 + static_cast<int>(rng.next_below(4)); break;
        }
        const std::vector<std::string>& pool =
            vocab[r] == 0 ? detail::easy_words()
                          : (vocab[r] == 1 ? detail::medium_words() : detail::hard_words());

        auto to_count = [](double v, int cap) {
            return std::clamp(static_cast<int>(std::llround(v)), 0, cap);
        };
        // deletions are capped first: their counts are small enough that the
        // cap never binds, so the cap cannot couple Del to the Subs causes
        const int k_d = to_count(del[r], std::min<int>(n_words - 1, 6));
        const int k_s = to_count(subs[r], n_words - 1 - k_d);
        const int k_i = to_count(ins[r], 8);

        // Deleted positions use words that occur nowhere else in the
        // sentence; otherwise the aligner could slide a match onto a deleted
        // duplicate and merge a deletion with an insertion into a cheaper
        // substitution. All words of a tier share one rarity, so the
        // partition does not disturb the vocabulary-difficulty score.
        std::vector<std::size_t> perm(pool.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        for (std::size_t i = perm.size() - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.next_below(i + 1)]);
        rec.ref.reserve(static_cast<std::size_t>(n_words));
        for (int i = 0; i < n_words; ++i) {
            if (i < k_d)
                rec.ref.push_back(pool[perm[static_cast<std::size_t>(i)]]);
            else
                rec.ref.push_back(
                    pool[perm[static_cast<std::size_t>(k_d) +
                              rng.next_below(pool.size() - static_cast<std::size_t>(k_d))]]);
        }
        subs_adj[r] = k_s;
        del_adj[r] = k_d;
        ins_adj[r] = k_i;

        rec.hyp.reserve(static_cast<std::size_t>(n_words - k_d + k_i));
        for (int i = 0; i < n_words; ++i) {
            if (i < k_d) continue;  // leading deletion run
            if (i > k_d && i <= k_d + k_s) {
                std::ostringstream os;
                os << "xz" << r << "q" << i;
                rec.hyp.push_back(os.str());
            } else {
                rec.hyp.push_back(rec.ref[static_cast<std::size_t>(i)]);
            }
        }
        for (int j = 0; j < k_i; ++j) {
            std::ostringstream os;
            os << "vv" << r << "q" << j;
            rec.hyp.push_back(os.str());
        }
        bundle.records.push_back(std::move(rec));
    }

    // write the realized counts back so records and discrete data agree
    std::vector<VariableSchema> schema;
    std::vector<DiscreteDataset::Column> columns;
    for (const char* name : {"Age", "Gender", "GoP", "SNR", "VocabDifficulty", "NumWords"}) {
        schema.push_back(sample.variable(name));
        columns.emplace_back(sample.discrete_column(name));
    }
    for (const auto& [name, col] : std::initializer_list<
             std::pair<const char*, const DiscreteDataset::NumericColumn*>>{
             {"Subs", &subs_adj}, {"Del", &del_adj}, {"Ins", &ins_adj}}) {
        schema.push_back(sample.variable(name));
        columns.emplace_back(*col);
    }
    bundle.adjusted = DiscreteDataset(std::move(schema), std::move(columns));
    return bundle;
}

}  // namespace casr
