#include "casr/features.hpp"

#include "casr/asr_synth.hpp"
#include "casr/csv.hpp"
#include "casr/scm.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace casr;

namespace {

std::vector<UtteranceRecord> synthetic_records(int n, uint64_t seed) {
    SplitMix64 rng(seed);
    const FrequencyLexicon lex = demo_lexicon();
    std::vector<std::string> words;
    for (const auto& [w, c] : lex.counts) words.push_back(w);
    std::vector<UtteranceRecord> out;
    for (int i = 0; i < n; ++i) {
        UtteranceRecord r;
        r.utt_id = "s" + std::to_string(i);
        r.age_years = 5.0 + static_cast<double>(rng.next_below(9));
        r.gender = rng.next_below(2) ? "M" : "F";
        r.snr_db = -5.0 + 35.0 * rng.next_double();
        r.gop_utt = 0.05 + 0.9 * rng.next_double();
        const int len = 3 + static_cast<int>(rng.next_below(9));
        for (int k = 0; k < len; ++k) r.ref.push_back(words[rng.next_below(words.size())]);
        r.hyp = r.ref;
        const int n_subs = static_cast<int>(rng.next_below(3));
        for (int k = 0; k < n_subs && k < static_cast<int>(r.hyp.size()); ++k)
            r.hyp[static_cast<std::size_t>(k)] = "sub" + std::to_string(i) + "x" + std::to_string(k);
        for (uint64_t k = 0; k < rng.next_below(3); ++k)
            r.hyp.push_back("extra" + std::to_string(i) + "x" + std::to_string(k));
        if (rng.next_below(3) == 0 && r.hyp.size() > 1) r.hyp.pop_back();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

TEST_CASE("gop_phone") {
    const std::vector<double> p = {0.7, 0.2, 0.1};
    CHECK(gop_phone(p, 0) == doctest::Approx(1.0));
    CHECK(gop_phone(p, 1) == doctest::Approx(0.2 / 0.7).epsilon(1e-12));
    const std::vector<double> uniform = {0.25, 0.25, 0.25, 0.25};
    for (std::size_t t = 0; t < uniform.size(); ++t)
        CHECK(gop_phone(uniform, t) == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)gop_phone(p, 3), DataError);
    const std::vector<double> zeros = {0.0, 0.0};
    CHECK_THROWS_AS((void)gop_phone(zeros, 0), DataError);
    // in (0,1], equal to 1 iff the target attains the max
    SplitMix64 rng(4);
    for (int it = 0; it < 50; ++it) {
        std::vector<double> v(1 + rng.next_below(6));
        for (auto& x : v) x = 0.01 + rng.next_double();
        const std::size_t t = rng.next_below(v.size());
        const double g = gop_phone(v, t);
        CHECK(g > 0.0);
        CHECK(g <= 1.0);
        CHECK((g == 1.0) == (v[t] == *std::max_element(v.begin(), v.end())));
    }
}

TEST_CASE("gop_utterance") {
    CHECK(gop_utterance(std::vector<double>{1.0, 1.0}) == doctest::Approx(1.0));
    CHECK(gop_utterance(std::vector<double>{0.2, 0.4, 0.6}) == doctest::Approx(0.4));
    std::vector<double> a = {0.1, 0.9, 0.5, 0.7};
    std::vector<double> b = {0.7, 0.5, 0.9, 0.1};
    CHECK(gop_utterance(a) == doctest::Approx(gop_utterance(b)));
    CHECK_THROWS_AS((void)gop_utterance(std::vector<double>{}), DataError);
}

TEST_CASE("tertile bins by nearest rank") {
    const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    const TertileBreaks t = tertile_bins(v);
    CHECK(t.t1 == 3.0);
    CHECK(t.t2 == 6.0);
    CHECK(tertile_assign(5.0, t) == 1);
    CHECK(tertile_assign(3.0, t) == 0);  // ties to the lower bin
    CHECK(tertile_assign(9.0, t) == 2);
}

TEST_CASE("tertile bins require three distinct values") {
    // constant plus two equal outliers: only 2 distinct values
    const std::vector<double> v = {5, 5, 5, 5, 9, 9};
    CHECK_THROWS_WITH_AS((void)tertile_bins(v, "GoP"), doctest::Contains("GoP"), DataError);
}

TEST_CASE("tertile bins are nonempty on any input with three distinct values") {
    SplitMix64 rng(6);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> v;
        const int n = 3 + static_cast<int>(rng.next_below(40));
        for (int i = 0; i < n; ++i)
            v.push_back(static_cast<double>(rng.next_below(6)));  // heavy ties
        std::vector<double> d(v);
        std::sort(d.begin(), d.end());
        d.erase(std::unique(d.begin(), d.end()), d.end());
        if (d.size() < 3) continue;
        const TertileBreaks t = tertile_bins(v);
        int count[3] = {0, 0, 0};
        for (double x : v) ++count[tertile_assign(x, t)];
        CHECK(count[0] > 0);
        CHECK(count[1] > 0);
        CHECK(count[2] > 0);
    }
}

TEST_CASE("snr discretization") {
    CHECK(discretize_snr(25.0) == SnrLevel::Clean);
    CHECK(discretize_snr(12.0) == SnrLevel::Average);
    CHECK(discretize_snr(3.0) == SnrLevel::Noisy);
    // boundary rule: the shared endpoints resolve upward
    CHECK(discretize_snr(20.0) == SnrLevel::Clean);
    CHECK(discretize_snr(5.0) == SnrLevel::Average);
    CHECK_THROWS_AS((void)discretize_snr(std::nan("")), DataError);
    // partition: every finite input maps to exactly one level
    for (double x = -40.0; x <= 60.0; x += 0.37) {
        const SnrLevel s = discretize_snr(x);
        CHECK((s == SnrLevel::Noisy || s == SnrLevel::Average || s == SnrLevel::Clean));
    }
}

TEST_CASE("word rarity") {
    FrequencyLexicon lex;
    lex.counts = {{"a", 90}, {"b", 9}, {"c", 1}};
    lex.total_tokens = 100;
    // -ln((count+1)/(total+|vocab|)) with |vocab| = 3
    CHECK(word_rarity("a", lex) == doctest::Approx(-std::log(91.0 / 103.0)).epsilon(1e-12));
    CHECK(word_rarity("b", lex) == doctest::Approx(-std::log(10.0 / 103.0)).epsilon(1e-12));
    CHECK(word_rarity("c", lex) == doctest::Approx(-std::log(2.0 / 103.0)).epsilon(1e-12));
    CHECK(word_rarity("a", lex) < word_rarity("b", lex));
    CHECK(word_rarity("b", lex) < word_rarity("c", lex));
    // unseen words are rarer than anything in the lexicon
    CHECK(word_rarity("zebra", lex) > word_rarity("c", lex));
    // case folding and punctuation stripping
    CHECK(word_rarity("A,", lex) == word_rarity("a", lex));
    CHECK_THROWS_AS((void)word_rarity("!!", lex), DataError);
}

TEST_CASE("sentence difficulty") {
    const FrequencyLexicon lex = demo_lexicon();
    const std::vector<std::string> one = {"school"};
    const std::vector<std::string> repeated = {"school", "school", "school"};
    CHECK(sentence_difficulty(one, lex) == doctest::Approx(word_rarity("school", lex)));
    CHECK(sentence_difficulty(repeated, lex) == doctest::Approx(word_rarity("school", lex)));
    std::vector<std::string> mixed = {"the", "algorithm", "garden"};
    std::vector<std::string> sorted_words = mixed;
    std::sort(sorted_words.begin(), sorted_words.end());
    CHECK(sentence_difficulty(mixed, lex) == doctest::Approx(sentence_difficulty(sorted_words, lex)));
    CHECK_THROWS_AS((void)sentence_difficulty(std::vector<std::string>{}, lex), DataError);
}

TEST_CASE("align_wer on the stated examples") {
    const std::vector<std::string> same = {"the", "cat", "sat"};
    const AlignmentResult r0 = align_wer(same, same);
    CHECK(r0.subs == 0);
    CHECK(r0.del == 0);
    CHECK(r0.ins == 0);
    CHECK(r0.wer == doctest::Approx(0.0));

    const AlignmentResult r1 = align_wer(same, std::vector<std::string>{});
    CHECK(r1.subs == 0);
    CHECK(r1.del == 3);
    CHECK(r1.ins == 0);
    CHECK(r1.wer == doctest::Approx(1.0));

    const std::vector<std::string> ref = {"go", "to", "school"};
    const std::vector<std::string> hyp = {"go", "two", "school", "now"};
    const AlignmentResult r2 = align_wer(ref, hyp);
    CHECK(r2.subs == 1);
    CHECK(r2.del == 0);
    CHECK(r2.ins == 1);
    CHECK(r2.wer == doctest::Approx(2.0 / 3.0));
    const auto oracle = oracles::align_exhaustive(ref, hyp);
    CHECK(r2.subs + r2.del + r2.ins == oracle.cost);
    CHECK(r2.matches == oracle.matches);
    CHECK(r2.subs == oracle.subs);

    CHECK_THROWS_AS((void)align_wer(std::vector<std::string>{}, same), DataError);
}

TEST_CASE("align_wer equals the exhaustive oracle on short pairs") {
    SplitMix64 rng(12);
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
    for (int it = 0; it < 400; ++it) {
        std::vector<std::string> ref(1 + rng.next_below(4));
        std::vector<std::string> hyp(rng.next_below(5));
        for (auto& w : ref) w = vocab[rng.next_below(vocab.size())];
        for (auto& w : hyp) w = vocab[rng.next_below(vocab.size())];
        const AlignmentResult got = align_wer(ref, hyp);
        const auto want = oracles::align_exhaustive(ref, hyp);
        CHECK(got.subs + got.del + got.ins == want.cost);
        CHECK(got.matches == want.matches);
        CHECK(got.subs == want.subs);
    }
}

TEST_CASE("align_wer arithmetic identities hold on random longer pairs") {
    SplitMix64 rng(14);
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
    for (int it = 0; it < 2000; ++it) {
        std::vector<std::string> ref(1 + rng.next_below(12));
        std::vector<std::string> hyp(rng.next_below(13));
        for (auto& w : ref) w = vocab[rng.next_below(vocab.size())];
        for (auto& w : hyp) w = vocab[rng.next_below(vocab.size())];
        const AlignmentResult r = align_wer(ref, hyp);
        CHECK(r.subs + r.del + r.matches == static_cast<int>(ref.size()));
        CHECK(r.subs + r.ins + r.matches == static_cast<int>(hyp.size()));
        CHECK(r.wer ==
              doctest::Approx(static_cast<double>(r.subs + r.del + r.ins) / ref.size()));
    }
}

TEST_CASE("tokenize folds case and strips punctuation") {
    const auto words = tokenize("  The CAT, sat. ");
    CHECK(words == std::vector<std::string>{"the", "cat", "sat"});
    CHECK(tokenize("-- !! --").empty());
}

TEST_CASE("build_discrete_dataset populates the full schema") {
    const auto records = synthetic_records(100, 77);
    BuildReport report;
    const DiscreteDataset ds = build_discrete_dataset(records, demo_lexicon(), {}, &report);
    CHECK(ds.n_rows() == 100);
    CHECK(report.used == 100);
    for (const char* name : {"Age", "Gender", "GoP", "SNR", "VocabDifficulty", "NumWords",
                             "Subs", "Del", "Ins", "Subs_bin", "Del_bin", "Ins_bin"})
        CHECK(ds.has_variable(name));
    // tertile-binned columns have every level occupied
    for (const char* name : {"GoP", "VocabDifficulty"}) {
        const auto& col = ds.discrete_column(name);
        std::set<int32_t> seen(col.begin(), col.end());
        CHECK(seen.size() == 3);
    }
}

TEST_CASE("build_discrete_dataset drops invalid records with warnings") {
    auto records = synthetic_records(60, 78);
    records[3].snr_db = std::nan("");
    records[10].gender = "unknown";
    records[11].ref.clear();
    records[12].gop_utt.reset();
    BuildReport report;
    const DiscreteDataset ds = build_discrete_dataset(records, demo_lexicon(), {}, &report);
    CHECK(ds.n_rows() == 56);
    CHECK(report.dropped.at("invalid-snr") == 1);
    CHECK(report.dropped.at("missing-gender") == 1);
    CHECK(report.dropped.at("empty-ref") == 1);
    CHECK(report.dropped.at("missing-gop") == 1);
}

TEST_CASE("build_discrete_dataset fails when most records are dropped") {
    auto records = synthetic_records(80, 79);
    for (std::size_t i = 0; i < 50; ++i) records[i].gender = "unknown";
    CHECK_THROWS_WITH_AS((void)build_discrete_dataset(records, demo_lexicon(), {}),
                         doctest::Contains("50%"), DataError);
}

TEST_CASE("build_discrete_dataset enforces the record floor") {
    const auto records = synthetic_records(10, 80);
    CHECK_THROWS_WITH_AS((void)build_discrete_dataset(records, demo_lexicon(), {}),
                         doctest::Contains("30"), DataError);
}

TEST_CASE("build_discrete_dataset is independent of the worker count") {
    const auto records = synthetic_records(200, 91);
    FeatureConfig parallel;
    parallel.jobs = 4;
    const DiscreteDataset a = build_discrete_dataset(records, demo_lexicon(), {});
    const DiscreteDataset b = build_discrete_dataset(records, demo_lexicon(), parallel);
    CHECK(dataset_to_csv(a) == dataset_to_csv(b));
}

TEST_CASE("build_discrete_dataset is permutation-equivariant") {
    auto records = synthetic_records(60, 81);
    const DiscreteDataset a = build_discrete_dataset(records, demo_lexicon(), {});
    std::reverse(records.begin(), records.end());
    const DiscreteDataset b = build_discrete_dataset(records, demo_lexicon(), {});
    auto lines = [](const DiscreteDataset& d) {
        std::vector<std::string> out;
        std::istringstream is(dataset_to_csv(d));
        std::string line;
        while (std::getline(is, line)) out.push_back(line);
        std::sort(out.begin() + 1, out.end());
        return out;
    };
    CHECK(lines(a) == lines(b));
}

TEST_CASE("fixture records round-trip to the fixture's discrete levels") {
    const ScmSpec fixture = asr_error_fixture();
    const auto sample = forward_sample(fixture, 400, 2);
    const AsrRecordsBundle bundle = render_asr_records(sample, 9);

    FeatureConfig cfg;
    cfg.age_bins = bundle.bins.at("Age");
    cfg.gop_bins = bundle.bins.at("GoP");
    cfg.vocab_bins = bundle.bins.at("VocabDifficulty");
    cfg.num_words_bins = bundle.bins.at("NumWords");
    const DiscreteDataset rebuilt = build_discrete_dataset(bundle.records, bundle.lexicon, cfg);

    const DiscreteDataset expected = bin_numeric_outcomes(bundle.adjusted);
    CHECK(dataset_to_csv(rebuilt) == dataset_to_csv(expected));
}

TEST_CASE("csv quoting round trip") {
    UtteranceRecord rec;
    rec.utt_id = "u,\"quoted\"";
    rec.age_years = 7;
    rec.gender = "F";
    rec.snr_db = 10.5;
    rec.gop_utt = 0.5;
    rec.ref = {"the", "cat"};
    rec.hyp = {"the", "cat"};
    const std::string csv = records_to_csv({rec});
    const auto back = records_from_csv_lines(
        [&] {
            std::vector<std::string> lines;
            std::istringstream is(csv);
            for (std::string line; std::getline(is, line);) lines.push_back(line);
            return lines;
        }(),
        "test");
    REQUIRE(back.size() == 1);
    CHECK(back[0].utt_id == rec.utt_id);
    CHECK(back[0].ref == rec.ref);
    CHECK(back[0].snr_db == doctest::Approx(10.5));
}

TEST_CASE("discovery and quantify views") {
    const ScmSpec fixture = asr_error_fixture();
    const auto sample = forward_sample(fixture, 200, 3);
    const auto binned = bin_numeric_outcomes(sample);
    CHECK(binned.has_variable("Subs_bin"));

    const auto dview = discovery_view(binned);
    CHECK(dview.has_variable("Subs"));
    CHECK_FALSE(dview.has_variable("Subs_bin"));
    CHECK(dview.variable("Subs").discrete());
    CHECK(dview.n_vars() == 9);

    const auto qview = quantify_view(binned);
    CHECK(qview.has_variable("Subs"));
    CHECK_FALSE(qview.has_variable("Subs_bin"));
    CHECK_FALSE(qview.variable("Subs").discrete());
    CHECK(qview.n_vars() == 9);

    CHECK_THROWS_WITH_AS((void)discovery_view(sample), doctest::Contains("bin"), DataError);
}
