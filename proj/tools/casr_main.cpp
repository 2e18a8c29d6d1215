// casr: causal analysis of ASR error patterns.
//
// Subcommands: simulate, discretize, discover, quantify, align.
// Exit codes: 0 success, 2 usage error, 3 data error, 4 config error.

#include "casr/asr_synth.hpp"
#include "casr/bayes.hpp"
#include "casr/csv.hpp"
#include "casr/dataset.hpp"
#include "casr/discovery.hpp"
#include "casr/error.hpp"
#include "casr/features.hpp"
#include "casr/graph.hpp"
#include "casr/provenance.hpp"
#include "casr/scm.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitConfig = 4;

struct CommonOptions {
    std::string config_path;
    std::string out_dir = ".";
    int jobs = 1;
    uint64_t seed = 1;
};

json load_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw casr::DataError(std::string("cannot open ") + what + ": " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw casr::DataError(std::string("malformed JSON in ") + path + ": " + e.what());
    }
    return j;
}

json load_config(const CommonOptions& common) {
    if (common.config_path.empty()) return json::object();
    const json j = load_json_file(common.config_path, "config");
    if (!j.is_object()) throw casr::ConfigError("config root must be a JSON object");
    return j;
}

template <typename T>
T config_value(const json& cfg, const std::string& section, const std::string& key, T fallback) {
    if (!cfg.contains(section)) return fallback;
    const json& s = cfg.at(section);
    if (!s.contains(key)) return fallback;
    try {
        return s.at(key).get<T>();
    } catch (const json::exception&) {
        throw casr::ConfigError("config " + section + "." + key + " has the wrong type");
    }
}

casr::CiTestConfig ci_config_from(const json& cfg) {
    casr::CiTestConfig ci;
    ci.test = casr::ci_test_kind_from_string(
        config_value<std::string>(cfg, "ci", "test", "g2"));
    ci.alpha = config_value<double>(cfg, "ci", "alpha", ci.alpha);
    ci.min_samples_per_df =
        config_value<double>(cfg, "ci", "min_samples_per_df", ci.min_samples_per_df);
    ci.validate();
    return ci;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw casr::ConfigError("cannot create output directory: " + dir);
}

casr::Provenance make_provenance(const std::string& command, const json& effective,
                                 std::optional<uint64_t> seed) {
    casr::Provenance p;
    json hashed = effective;
    hashed["command"] = command;
    p.config_hash = casr::fnv1a_hash(hashed.dump());
    p.seed = seed;
    p.algorithms = {{"rng", casr::kRngAlgorithm},
                    {"skeleton", "pc-stable"},
                    {"fci-rules", "r0-r4+possible-d-sep"},
                    {"ci", "g2/chi2 + incomplete-gamma sf"}};
    return p;
}

void write_file(const std::string& path, const std::string& content) {
    casr::detail::write_text(path, content);
    std::cerr << "wrote " << path << "\n";
}

std::string schema_sidecar_path(const std::string& csv_path) {
    fs::path p(csv_path);
    p.replace_extension(".schema.json");
    return p.string();
}

casr::DiscreteDataset load_dataset(const std::string& csv_path, std::string schema_path) {
    if (schema_path.empty()) schema_path = schema_sidecar_path(csv_path);
    if (!fs::exists(schema_path))
        throw casr::DataError("schema sidecar not found: " + schema_path +
                              " (discretize/simulate write it next to the CSV)");
    return casr::read_dataset_csv(csv_path, schema_path);
}

void write_dataset(const std::string& dir, const std::string& stem,
                   const casr::DiscreteDataset& data, const casr::Provenance& prov) {
    write_file(dir + "/" + stem + ".csv", casr::dataset_to_csv(data, prov.comment_line()));
    json sj = casr::schema_to_json(data);
    sj["provenance"] = prov.to_json();
    write_file(dir + "/" + stem + ".schema.json", sj.dump(2) + "\n");
}

// --- simulate ---

int run_simulate(const CommonOptions& common, const std::string& spec_path, int64_t n) {
    const casr::ScmSpec spec = casr::scm_from_json(load_json_file(spec_path, "SCM spec"));
    json effective = {{"n", n}};
    const casr::Provenance prov = make_provenance("simulate", effective, common.seed);

    ensure_out_dir(common.out_dir);
    const casr::DiscreteDataset sample = casr::forward_sample(spec, n, common.seed, common.jobs);

    bool asr_schema = true;
    for (const char* required :
         {"Age", "Gender", "GoP", "SNR", "VocabDifficulty", "NumWords", "Subs", "Del", "Ins"})
        asr_schema = asr_schema && sample.has_variable(required);

    if (asr_schema) {
        const casr::AsrRecordsBundle bundle = casr::render_asr_records(sample, common.seed);
        write_dataset(common.out_dir, "discrete", casr::bin_numeric_outcomes(bundle.adjusted),
                      prov);
        write_file(common.out_dir + "/records.csv",
                   casr::records_to_csv(bundle.records, prov.comment_line()));
        write_file(common.out_dir + "/gop_scores.tsv",
                   casr::gop_sidecar_to_text(bundle.gop_sidecar, prov.comment_line()));
        write_file(common.out_dir + "/lexicon.tsv",
                   casr::lexicon_to_text(bundle.lexicon, prov.comment_line()));
        json bins = casr::bins_to_json(bundle.bins);
        bins["provenance"] = prov.to_json();
        write_file(common.out_dir + "/bins.json", bins.dump(2) + "\n");
    } else {
        bool has_numeric = false;
        for (const auto& v : sample.schema()) has_numeric = has_numeric || !v.discrete();
        write_dataset(common.out_dir, "discrete",
                      has_numeric ? casr::bin_numeric_outcomes(sample) : sample, prov);
    }
    return kExitOk;
}

// --- discretize ---

int run_discretize(const CommonOptions& common, const std::string& records_path,
                   const std::string& lexicon_path, const std::string& gop_path,
                   const std::string& bins_path) {
    const json cfg = load_config(common);
    std::vector<casr::UtteranceRecord> records = casr::read_records_csv(records_path);
    if (records.empty()) throw casr::DataError(records_path + ": no records");
    const casr::FrequencyLexicon lexicon = casr::read_lexicon(lexicon_path);
    if (!gop_path.empty())
        casr::attach_gop_sidecar(records, casr::read_gop_sidecar(gop_path));

    casr::FeatureConfig features;
    features.min_records = config_value<int>(cfg, "features", "min_records", 30);
    features.gop_log = config_value<bool>(cfg, "features", "gop_log", false);
    features.jobs = common.jobs;
    if (!bins_path.empty()) {
        const auto bins = casr::bins_from_json(load_json_file(bins_path, "bin spec"));
        auto take = [&](const char* key) -> std::optional<casr::BinSpec> {
            const auto it = bins.find(key);
            if (it == bins.end()) return std::nullopt;
            return it->second;
        };
        features.age_bins = take("Age");
        features.gop_bins = take("GoP");
        features.vocab_bins = take("VocabDifficulty");
        features.num_words_bins = take("NumWords");
    }

    json effective = {{"fixed_bins", !bins_path.empty()},
                      {"gop_log", features.gop_log},
                      {"min_records", features.min_records}};
    const casr::Provenance prov = make_provenance("discretize", effective, std::nullopt);

    casr::BuildReport report;
    const casr::DiscreteDataset ds =
        casr::build_discrete_dataset(records, lexicon, features, &report);
    for (const auto& [reason, count] : report.dropped)
        std::cerr << "warning: dropped " << count << " record(s): " << reason << "\n";

    ensure_out_dir(common.out_dir);
    write_dataset(common.out_dir, "discrete", ds, prov);
    json bins = casr::bins_to_json(report.resolved_bins);
    bins["provenance"] = prov.to_json();
    write_file(common.out_dir + "/bins.json", bins.dump(2) + "\n");
    return kExitOk;
}

// --- discover ---

int run_discover(const CommonOptions& common, const std::string& data_path,
                 const std::string& schema_path, const std::string& algorithm,
                 std::optional<double> alpha, const std::string& test_name,
                 std::optional<int> max_cond_set, const std::string& oracle_path) {
    const json cfg = load_config(common);
    casr::DiscoveryConfig discovery;
    discovery.algorithm = casr::discovery_algorithm_from_string(
        !algorithm.empty() ? algorithm
                           : config_value<std::string>(cfg, "discovery", "algorithm", "pc"));
    discovery.ci = ci_config_from(cfg);
    if (alpha) discovery.ci.alpha = *alpha;
    if (!test_name.empty()) discovery.ci.test = casr::ci_test_kind_from_string(test_name);
    if (max_cond_set)
        discovery.max_cond_set = *max_cond_set;
    else
        discovery.max_cond_set = config_value<int>(cfg, "discovery", "max_cond_set", 3);
    discovery.jobs = common.jobs;
    discovery.validate();

    casr::DiscreteDataset data = load_dataset(data_path, schema_path);
    bool has_numeric = false;
    for (const auto& v : data.schema()) has_numeric = has_numeric || !v.discrete();
    if (has_numeric) data = casr::discovery_view(data);

    if (!oracle_path.empty())
        discovery.oracle = casr::graph_from_json(load_json_file(oracle_path, "oracle DAG"));

    json effective = {{"algorithm", to_string(discovery.algorithm)},
                      {"alpha", discovery.ci.alpha},
                      {"test", to_string(discovery.ci.test)},
                      {"min_samples_per_df", discovery.ci.min_samples_per_df},
                      {"max_cond_set", *discovery.max_cond_set},
                      {"oracle_used", !oracle_path.empty()}};
    const casr::Provenance prov = make_provenance("discover", effective, std::nullopt);

    const casr::DiscoveryOutput out = casr::discover(data, discovery);

    ensure_out_dir(common.out_dir);
    json gj = casr::graph_to_json(out.graph);
    gj["provenance"] = prov.to_json();
    gj["algorithm"] = to_string(discovery.algorithm);
    gj["dag_source"] = "data-driven";
    write_file(common.out_dir + "/graph.json", gj.dump(2) + "\n");
    write_file(common.out_dir + "/graph.dot",
               casr::to_dot(out.graph, prov.to_json().dump()));
    std::ostringstream events;
    json head = prov.to_json();
    head["event"] = "provenance";
    events << head.dump() << "\n";
    for (const auto& e : out.log) events << to_json(e).dump() << "\n";
    write_file(common.out_dir + "/events.jsonl", events.str());
    std::cerr << "graph: " << out.graph.edge_count() << " edge(s), " << out.log.size()
              << " event(s)\n";
    return kExitOk;
}

// --- quantify ---

// Deterministic completion of a partially directed graph: edges touching a
// numeric outcome orient into it, everything else lexicographically.
casr::MixedGraph orient_rest(const casr::MixedGraph& g, const casr::DiscreteDataset& data,
                             std::vector<std::string>* log_lines) {
    casr::MixedGraph out = g;
    for (const auto& e : g.edges()) {
        const bool fwd = e.at_a == casr::Mark::Tail && e.at_b == casr::Mark::Arrow;
        const bool bwd = e.at_a == casr::Mark::Arrow && e.at_b == casr::Mark::Tail;
        if (fwd || bwd) continue;
        const std::string& a = g.node_name(e.a);
        const std::string& b = g.node_name(e.b);
        const bool a_numeric = data.has_variable(a) && !data.variable(a).discrete();
        const bool b_numeric = data.has_variable(b) && !data.variable(b).discrete();
        if (a_numeric && b_numeric)
            throw casr::DataError("orient-rest: edge " + a + " - " + b +
                                  " joins two numeric outcomes; cannot orient");
        std::string from = a, to = b;  // lexicographic default: a < b already
        if (a_numeric) {
            from = b;
            to = a;
        }
        out.remove_edge(from, to);
        out.add_directed(from, to);
        log_lines->push_back(from + " -> " + to);
    }
    if (out.has_directed_cycle())
        throw casr::DataError("orient-rest: deterministic extension is cyclic; "
                              "provide a fully oriented DAG instead");
    return out;
}

int run_quantify(const CommonOptions& common, const std::string& data_path,
                 const std::string& schema_path, const std::string& dag_path,
                 const std::string& contrast, bool do_orient_rest, const std::string& units,
                 const std::string& model_tag) {
    const json cfg = load_config(common);
    casr::DiscreteDataset data = load_dataset(data_path, schema_path);
    data = casr::quantify_view(data);

    const json dag_json = load_json_file(dag_path, "DAG");
    casr::MixedGraph dag = casr::graph_from_json(dag_json);
    for (const auto& node : dag.nodes())
        if (!data.has_variable(node))
            throw casr::DataError("DAG node '" + node + "' is not a dataset variable");

    std::vector<std::string> oriented_edges;
    if (!dag.fully_directed()) {
        if (!do_orient_rest)
            throw casr::DataError(
                "DAG is partially directed; rerun with --orient-rest for the deterministic "
                "extension, or orient it manually");
        dag = orient_rest(dag, data, &oriented_edges);
        for (const auto& line : oriented_edges)
            std::cerr << "orient-rest: " << line << "\n";
    }

    casr::FitConfig fit_config;
    fit_config.smoothing = config_value<double>(cfg, "quantify", "smoothing", 1.0);

    casr::AceReportOptions options;
    options.contrast = casr::contrast_policy_from_string(
        !contrast.empty() ? contrast
                          : config_value<std::string>(cfg, "quantify", "contrast", "extreme"));
    options.units =
        !units.empty() ? units
                       : config_value<std::string>(cfg, "quantify", "units",
                                                   "errors-per-utterance");
    options.model_tag =
        !model_tag.empty() ? model_tag
                           : config_value<std::string>(cfg, "quantify", "model_tag",
                                                       "unspecified");
    options.state_cap = config_value<int64_t>(cfg, "quantify", "state_cap", options.state_cap);
    options.dag_source = dag_json.value("dag_source", std::string("hardcoded"));

    json effective = {{"contrast", to_string(options.contrast)},
                      {"orient_rest", do_orient_rest},
                      {"smoothing", fit_config.smoothing},
                      {"units", options.units},
                      {"model", options.model_tag}};
    const casr::Provenance prov = make_provenance("quantify", effective, std::nullopt);

    const casr::FittedNetwork net = casr::fit(data, dag, fit_config);
    const casr::AceReport report = casr::ace_report(net, data, options);

    ensure_out_dir(common.out_dir);
    json rj = casr::ace_report_to_json(report);
    rj["provenance"] = prov.to_json();
    if (!oriented_edges.empty()) rj["metadata"]["orient_rest"] = oriented_edges;
    write_file(common.out_dir + "/ace_report.json", rj.dump(2) + "\n");
    write_file(common.out_dir + "/ace_report.txt",
               prov.comment_line() + "\n" + casr::ace_report_to_text(report));
    std::cout << casr::ace_report_to_text(report);
    return kExitOk;
}

// --- align ---

int run_align(const CommonOptions& common, const std::string& records_path) {
    const std::vector<casr::UtteranceRecord> records = casr::read_records_csv(records_path);
    if (records.empty()) throw casr::DataError(records_path + ": no records");
    const casr::Provenance prov = make_provenance("align", json::object(), std::nullopt);

    std::ostringstream os;
    os << prov.comment_line() << "\n";
    os << "utt_id,ref_len,subs,del,ins,matches,wer\n";
    long long total_ref = 0, total_subs = 0, total_del = 0, total_ins = 0, total_matches = 0;
    for (const auto& r : records) {
        if (r.ref.empty()) throw casr::DataError(records_path + ": empty ref for " + r.utt_id);
        const casr::AlignmentResult a = casr::align_wer(r.ref, r.hyp);
        os << casr::detail::csv_field(r.utt_id) << ',' << r.ref.size() << ',' << a.subs << ','
           << a.del << ',' << a.ins << ',' << a.matches << ','
           << casr::detail::format_double(a.wer) << "\n";
        total_ref += static_cast<long long>(r.ref.size());
        total_subs += a.subs;
        total_del += a.del;
        total_ins += a.ins;
        total_matches += a.matches;
    }
    const double total_wer =
        static_cast<double>(total_subs + total_del + total_ins) / static_cast<double>(total_ref);
    os << "__TOTAL__," << total_ref << ',' << total_subs << ',' << total_del << ',' << total_ins
       << ',' << total_matches << ',' << casr::detail::format_double(total_wer) << "\n";

    ensure_out_dir(common.out_dir);
    write_file(common.out_dir + "/errors.csv", os.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal analysis toolkit for ASR error patterns"};
    app.require_subcommand(1);

    CommonOptions common;
    app.add_option("--config", common.config_path, "JSON config file");
    app.add_option("--out", common.out_dir, "output directory");
    app.add_option("--jobs", common.jobs, "worker threads for parallel stages");
    app.add_option("--seed", common.seed, "RNG seed");

    auto* simulate = app.add_subcommand("simulate", "sample records/datasets from an SCM spec");
    std::string spec_path;
    int64_t n_rows = 1000;
    simulate->add_option("--spec", spec_path, "SCM spec JSON")->required();
    simulate->add_option("-n,--rows", n_rows, "number of rows")->required();

    auto* discretize =
        app.add_subcommand("discretize", "derive and bin variables from raw records");
    std::string records_path, lexicon_path, gop_path, bins_path;
    discretize->add_option("--records", records_path, "records CSV")->required();
    discretize->add_option("--lexicon", lexicon_path, "word-frequency lexicon TSV")->required();
    discretize->add_option("--gop-scores", gop_path, "per-phone GoP sidecar TSV");
    discretize->add_option("--bins", bins_path, "fixed bin boundaries JSON");

    auto* discover = app.add_subcommand("discover", "constraint-based structure discovery");
    std::string data_path, schema_path, algorithm, test_name, oracle_path;
    std::optional<double> alpha;
    std::optional<int> max_cond_set;
    discover->add_option("--data", data_path, "discrete dataset CSV")->required();
    discover->add_option("--schema", schema_path, "schema sidecar (default: <data>.schema.json)");
    discover->add_option("--algorithm", algorithm, "pc or fci")
        ->check(CLI::IsMember({"pc", "fci"}));
    discover->add_option("--alpha", alpha, "CI significance level");
    discover->add_option("--test", test_name, "g2 or chi2")
        ->check(CLI::IsMember({"g2", "chi2"}));
    discover->add_option("--max-cond-set", max_cond_set, "conditioning-set size cap");
    discover->add_option("--oracle", oracle_path, "ground-truth DAG JSON (d-separation oracle)");

    auto* quantify = app.add_subcommand("quantify", "fit a Bayesian network and report ACEs");
    std::string qdata_path, qschema_path, dag_path, contrast, units, model_tag;
    bool do_orient_rest = false;
    quantify->add_option("--data", qdata_path, "discrete dataset CSV")->required();
    quantify->add_option("--schema", qschema_path, "schema sidecar");
    quantify->add_option("--dag", dag_path, "DAG JSON (hardcoded or discovered)")->required();
    quantify->add_option("--contrast", contrast, "extreme or adjacent")
        ->check(CLI::IsMember({"extreme", "adjacent"}));
    quantify->add_flag("--orient-rest", do_orient_rest,
                       "deterministically orient undirected edges (logged)");
    quantify->add_option("--units", units, "units recorded in the report");
    quantify->add_option("--model-tag", model_tag, "model label recorded in the report");

    auto* align = app.add_subcommand("align", "per-utterance error counts from ref/hyp");
    std::string arecords_path;
    align->add_option("--records", arecords_path, "records CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(common, spec_path, n_rows);
        if (discretize->parsed())
            return run_discretize(common, records_path, lexicon_path, gop_path, bins_path);
        if (discover->parsed())
            return run_discover(common, data_path, schema_path, algorithm, alpha, test_name,
                                max_cond_set, oracle_path);
        if (quantify->parsed())
            return run_quantify(common, qdata_path, qschema_path, dag_path, contrast,
                                do_orient_rest, units, model_tag);
        if (align->parsed()) return run_align(common, arecords_path);
    } catch (const casr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const casr::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
