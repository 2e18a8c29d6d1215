// Integration tests that drive the casr binary through its public surface.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "casr/csv.hpp"
#include "casr/discovery.hpp"
#include "casr/graph.hpp"
#include "casr/scm.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = CASR_CLI_PATH;
const std::string kFixtures = CASR_FIXTURE_DIR;

int run(const std::string& args, bool quiet = true) {
    const std::string cmd = kCli + " " + args + (quiet ? " >/dev/null 2>&1" : "");
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "casr_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// identical runs must differ only in the provenance timestamp
std::string mask_timestamp(std::string text) {
    static const std::regex ts("\"timestamp\": ?\"[^\"]*\"");
    return std::regex_replace(text, ts, "\"timestamp\":\"X\"");
}

json slurp_json(const fs::path& path) { return json::parse(slurp(path)); }

std::string asr_spec() { return kFixtures + "/asr_error_scm.json"; }

}  // namespace

TEST_CASE("simulate writes the full bundle and is deterministic per seed") {
    const fs::path a = fresh_dir("sim_a");
    const fs::path b = fresh_dir("sim_b");
    REQUIRE(run("--out " + a.string() + " --seed 7 simulate --spec " + asr_spec() + " -n 200") ==
            0);
    REQUIRE(run("--out " + b.string() + " --seed 7 simulate --spec " + asr_spec() + " -n 200") ==
            0);
    for (const char* name :
         {"discrete.csv", "discrete.schema.json", "records.csv", "gop_scores.tsv",
          "lexicon.tsv", "bins.json"}) {
        CAPTURE(name);
        CHECK(mask_timestamp(slurp(a / name)) == mask_timestamp(slurp(b / name)));
    }
    // n rows written (plus provenance + header)
    int lines = 0;
    std::istringstream is(slurp(a / "records.csv"));
    for (std::string line; std::getline(is, line);) ++lines;
    CHECK(lines == 202);
}

TEST_CASE("simulate with a different seed differs") {
    const fs::path a = fresh_dir("sim_s1");
    const fs::path b = fresh_dir("sim_s2");
    REQUIRE(run("--out " + a.string() + " --seed 1 simulate --spec " + asr_spec() + " -n 100") ==
            0);
    REQUIRE(run("--out " + b.string() + " --seed 2 simulate --spec " + asr_spec() + " -n 100") ==
            0);
    CHECK(mask_timestamp(slurp(a / "discrete.csv")) != mask_timestamp(slurp(b / "discrete.csv")));
}

TEST_CASE("discretize reproduces the simulated discrete dataset") {
    const fs::path sim = fresh_dir("round_sim");
    REQUIRE(run("--out " + sim.string() + " --seed 3 simulate --spec " + asr_spec() +
                " -n 300") == 0);
    const fs::path disc = fresh_dir("round_disc");
    REQUIRE(run("--out " + disc.string() + " discretize --records " +
                (sim / "records.csv").string() + " --lexicon " + (sim / "lexicon.tsv").string() +
                " --gop-scores " + (sim / "gop_scores.tsv").string() + " --bins " +
                (sim / "bins.json").string()) == 0);
    auto data_rows = [](const std::string& text) {
        std::vector<std::string> rows;
        std::istringstream is(text);
        for (std::string line; std::getline(is, line);)
            if (!line.empty() && line[0] != '#') rows.push_back(line);
        return rows;
    };
    CHECK(data_rows(slurp(sim / "discrete.csv")) == data_rows(slurp(disc / "discrete.csv")));
}

TEST_CASE("discretize error paths") {
    const fs::path dir = fresh_dir("disc_err");
    {
        std::ofstream empty(dir / "empty.csv");
    }
    std::ofstream lex(dir / "lexicon.tsv");
    lex << "the\t100\n__TOTAL__\t100\n";
    lex.close();
    CHECK(run("--out " + dir.string() + " discretize --records " + (dir / "empty.csv").string() +
              " --lexicon " + (dir / "lexicon.tsv").string()) == 3);

    std::ofstream bad(dir / "bad.csv");
    bad << "utt_id,age_years,gender,ref,hyp\n";  // snr_db missing
    bad << "u1,7,F,the cat,the cat\n";
    bad.close();
    // run unquietly once to capture the message
    const std::string cmd = kCli + " --out " + dir.string() + " discretize --records " +
                            (dir / "bad.csv").string() + " --lexicon " +
                            (dir / "lexicon.tsv").string() + " 2> " +
                            (dir / "stderr.txt").string();
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 3);
    CHECK(slurp(dir / "stderr.txt").find("snr_db") != std::string::npos);
}

TEST_CASE("discover with the d-separation oracle recovers the exact CPDAG") {
    const fs::path sim = fresh_dir("disc_oracle_sim");
    REQUIRE(run("--out " + sim.string() + " --seed 5 simulate --spec " + asr_spec() +
                " -n 100") == 0);
    // oracle DAG file: the fixture's own graph
    const casr::ScmSpec fixture = casr::asr_error_fixture();
    const fs::path dag_path = sim / "truth.json";
    {
        std::ofstream f(dag_path);
        f << casr::graph_to_json(fixture.dag).dump(2);
    }
    const fs::path out = fresh_dir("disc_oracle_out");
    REQUIRE(run("--out " + out.string() + " discover --data " + (sim / "discrete.csv").string() +
                " --oracle " + dag_path.string()) == 0);
    const casr::MixedGraph got = casr::graph_from_json(slurp_json(out / "graph.json"));
    CHECK(casr::structural_hamming_distance(got, casr::true_cpdag(fixture)) == 0);
    // event log first record is provenance, rest carry required remove fields
    std::istringstream is(slurp(out / "events.jsonl"));
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(json::parse(line).at("event") == "provenance");
    int removes = 0;
    while (std::getline(is, line)) {
        const json e = json::parse(line);
        if (e.at("event") == "remove") {
            ++removes;
            CHECK(e.contains("sepset"));
            CHECK(e.contains("p"));
        }
    }
    CHECK(removes > 0);
}

TEST_CASE("discover rejects unknown algorithms as usage errors") {
    const fs::path dir = fresh_dir("disc_usage");
    CHECK(run("discover --data nowhere.csv --algorithm ges") == 2);
    CHECK(run("") == 2);          // missing subcommand
    CHECK(run("discombobulate") == 2);
}

TEST_CASE("discover on 10k simulated rows recovers the fixture structure") {
    const fs::path sim = fresh_dir("disc_full_sim");
    REQUIRE(run("--out " + sim.string() + " --seed 1 simulate --spec " + asr_spec() +
                " -n 10000") == 0);
    const fs::path out = fresh_dir("disc_full_out");
    REQUIRE(run("--out " + out.string() + " discover --data " +
                (sim / "discrete.csv").string()) == 0);
    const casr::MixedGraph got = casr::graph_from_json(slurp_json(out / "graph.json"));
    const casr::MixedGraph truth = casr::true_cpdag(casr::asr_error_fixture());
    CHECK(casr::structural_hamming_distance(got, truth) <= 3);
    CHECK(got.adjacent("Gender").empty());
    CHECK(got.adjacent("SNR") == std::set<std::string>{"Ins"});
}

TEST_CASE("quantify demands orientation and honors --orient-rest") {
    const fs::path sim = fresh_dir("quant_sim");
    REQUIRE(run("--out " + sim.string() + " --seed 2 simulate --spec " + asr_spec() +
                " -n 2000") == 0);
    const casr::ScmSpec fixture = casr::asr_error_fixture();
    const fs::path cpdag_path = sim / "cpdag.json";
    {
        // the fixture CPDAG leaves Del -- NumWords undirected
        std::ofstream f(cpdag_path);
        f << casr::graph_to_json(casr::true_cpdag(fixture)).dump(2);
    }
    const fs::path out = fresh_dir("quant_out");
    CHECK(run("--out " + out.string() + " quantify --data " + (sim / "discrete.csv").string() +
              " --dag " + cpdag_path.string()) == 3);
    REQUIRE(run("--out " + out.string() + " quantify --data " + (sim / "discrete.csv").string() +
                " --dag " + cpdag_path.string() + " --orient-rest") == 0);

    const json report = slurp_json(out / "ace_report.json");
    CHECK(report.at("metadata").at("orient_rest") ==
          json::array({"NumWords -> Del"}));
    for (const auto& row : report.at("rows")) {
        CHECK(row.contains("contrast"));  // contrast metadata on every cell
        if (row.at("cause") == "Gender") CHECK_FALSE(row.at("populated").get<bool>());
    }
    const std::string table = slurp(out / "ace_report.txt");
    CHECK(table.find("--") != std::string::npos);

    // invalid contrast value is a usage error
    CHECK(run("--out " + out.string() + " quantify --data " + (sim / "discrete.csv").string() +
              " --dag " + cpdag_path.string() + " --contrast sideways") == 2);
}

TEST_CASE("quantify with the hardcoded reference graph populates every cell") {
    const fs::path sim = fresh_dir("quant_hc_sim");
    REQUIRE(run("--out " + sim.string() + " --seed 6 simulate --spec " + asr_spec() +
                " -n 2000") == 0);
    const fs::path out = fresh_dir("quant_hc_out");
    REQUIRE(run("--out " + out.string() + " quantify --data " + (sim / "discrete.csv").string() +
                " --dag " + kFixtures + "/hardcoded_dag.json --model-tag demo") == 0);
    const json report = slurp_json(out / "ace_report.json");
    CHECK(report.at("metadata").at("dag_source") == "hardcoded");
    int populated = 0;
    for (const auto& row : report.at("rows"))
        populated += row.at("populated").get<bool>() ? 1 : 0;
    CHECK(populated == 15);  // {Age, Gender, GoP, SNR, NumWords} x {Subs, Del, Ins}
}

TEST_CASE("align on an identical corpus yields zero errors and a consistent total") {
    const fs::path dir = fresh_dir("align");
    {
        std::ofstream f(dir / "records.csv");
        f << "utt_id,age_years,gender,snr_db,ref,hyp\n";
        f << "u1,7,F,10,\"the cat sat\",\"the cat sat\"\n";
        f << "u2,8,M,12,\"a dog ran home\",\"a dog ran home\"\n";
    }
    REQUIRE(run("--out " + dir.string() + " align --records " +
                (dir / "records.csv").string()) == 0);
    const std::string csv = slurp(dir / "errors.csv");
    std::istringstream is(csv);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        rows.push_back(casr::detail::split_csv_line(line));
    }
    REQUIRE(rows.size() == 4);  // header + 2 utterances + total
    CHECK(rows.back()[0] == "__TOTAL__");
    long long sum_subs = 0;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        CHECK(rows[i][2] == "0");
        CHECK(rows[i][3] == "0");
        CHECK(rows[i][4] == "0");
        sum_subs += std::stoll(rows[i][2]);
    }
    CHECK(std::stoll(rows.back()[2]) == sum_subs);
    CHECK(rows.back()[1] == "7");  // total ref length
}

TEST_CASE("align recovers known error counts") {
    const fs::path dir = fresh_dir("align_counts");
    {
        std::ofstream f(dir / "records.csv");
        f << "utt_id,age_years,gender,snr_db,ref,hyp\n";
        // one substitution and one insertion; hand-checkable
        f << "u1,7,F,10,\"go to school\",\"go two school now\"\n";
        // pure deletions
        f << "u2,8,M,12,\"a dog ran\",\"a dog\"\n";
    }
    REQUIRE(run("--out " + dir.string() + " align --records " +
                (dir / "records.csv").string()) == 0);
    std::istringstream is(slurp(dir / "errors.csv"));
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') rows.push_back(casr::detail::split_csv_line(line));
    REQUIRE(rows.size() == 4);
    CHECK(rows[1] == std::vector<std::string>{"u1", "3", "1", "0", "1", "2",
                                              casr::detail::format_double(2.0 / 3.0)});
    CHECK(rows[2] == std::vector<std::string>{"u2", "3", "0", "1", "0", "2",
                                              casr::detail::format_double(1.0 / 3.0)});
}

TEST_CASE("simulate handles non-ASR specs by writing the dataset only") {
    const fs::path dir = fresh_dir("sim_generic");
    REQUIRE(run("--out " + dir.string() + " --seed 2 simulate --spec " + kFixtures +
                "/hidden_confounder_scm.json -n 500") == 0);
    CHECK(fs::exists(dir / "discrete.csv"));
    CHECK(fs::exists(dir / "discrete.schema.json"));
    CHECK_FALSE(fs::exists(dir / "records.csv"));
    const casr::DiscreteDataset ds = casr::read_dataset_csv(
        (dir / "discrete.csv").string(), (dir / "discrete.schema.json").string());
    CHECK(ds.n_rows() == 500);
    CHECK(ds.variable_names() == std::vector<std::string>{"A", "B", "L", "X"});
}

TEST_CASE("simulated root marginals match the generating distribution") {
    const fs::path dir = fresh_dir("sim_gof");
    REQUIRE(run("--out " + dir.string() + " --seed 4 simulate --spec " + asr_spec() +
                " -n 20000") == 0);
    const casr::DiscreteDataset ds = casr::read_dataset_csv(
        (dir / "discrete.csv").string(), (dir / "discrete.schema.json").string());
    // binomial bound: 4 sigma around P(Age = Young) = 0.33 at n = 20000
    const auto& age = ds.discrete_column("Age");
    double young = 0;
    for (int32_t v : age) young += v == 0;
    const double p = young / static_cast<double>(ds.n_rows());
    CHECK(std::abs(p - 0.33) < 4.0 * std::sqrt(0.33 * 0.67 / 20000.0));
}

TEST_CASE("config file errors map to exit code 4") {
    const fs::path dir = fresh_dir("cfg");
    {
        std::ofstream f(dir / "cfg.json");
        f << R"({"ci": {"alpha": 7.0}})";
    }
    const fs::path sim = fresh_dir("cfg_sim");
    REQUIRE(run("--out " + sim.string() + " --seed 2 simulate --spec " + asr_spec() +
                " -n 100") == 0);
    CHECK(run("--config " + (dir / "cfg.json").string() + " --out " + dir.string() +
              " discover --data " + (sim / "discrete.csv").string()) == 4);
}

TEST_CASE("missing input files map to exit code 3") {
    CHECK(run("--out /tmp discover --data /nonexistent/discrete.csv") == 3);
    CHECK(run("--out /tmp align --records /nonexistent/records.csv") == 3);
    CHECK(run("--out /tmp simulate --spec /nonexistent/spec.json -n 10") == 3);
}

TEST_CASE("full pipeline runs are byte-identical modulo the timestamp header") {
    auto pipeline = [&](const std::string& tag) {
        const fs::path root = fresh_dir("pipe_" + tag);
        const std::string sim = (root / "sim").string();
        const std::string disc = (root / "disc").string();
        const std::string graph = (root / "graph").string();
        const std::string report = (root / "report").string();
        REQUIRE(run("--out " + sim + " --seed 11 simulate --spec " + asr_spec() + " -n 1500") ==
                0);
        REQUIRE(run("--out " + disc + " discretize --records " + sim + "/records.csv" +
                    " --lexicon " + sim + "/lexicon.tsv --gop-scores " + sim +
                    "/gop_scores.tsv --bins " + sim + "/bins.json") == 0);
        REQUIRE(run("--out " + graph + " discover --data " + disc + "/discrete.csv") == 0);
        REQUIRE(run("--out " + report + " quantify --data " + disc + "/discrete.csv --dag " +
                    graph + "/graph.json --orient-rest") == 0);
        return root;
    };
    const fs::path a = pipeline("a");
    const fs::path b = pipeline("b");
    for (const char* rel :
         {"sim/discrete.csv", "sim/records.csv", "sim/bins.json", "disc/discrete.csv",
          "disc/bins.json", "graph/graph.json", "graph/graph.dot", "graph/events.jsonl",
          "report/ace_report.json", "report/ace_report.txt"}) {
        CAPTURE(rel);
        CHECK(mask_timestamp(slurp(a / rel)) == mask_timestamp(slurp(b / rel)));
    }

    // discover-then-quantify reproduces the qualitative structure: negative
    // substitution effects for age and pronunciation, none for gender
    const json report = slurp_json(a / "report" / "ace_report.json");
    bool age_subs_negative = false, gop_subs_negative = false;
    for (const auto& row : report.at("rows")) {
        if (!row.at("populated").get<bool>()) continue;
        if (row.at("cause") == "Age" && row.at("effect") == "Subs")
            age_subs_negative = row.at("ace").get<double>() < 0.0;
        if (row.at("cause") == "GoP" && row.at("effect") == "Subs")
            gop_subs_negative = row.at("ace").get<double>() < 0.0;
        if (row.at("cause") == "Gender") FAIL("Gender must stay unpopulated");
    }
    CHECK(age_subs_negative);
    CHECK(gop_subs_negative);
}
