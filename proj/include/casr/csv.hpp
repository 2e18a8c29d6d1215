#pragma once

#include "casr/dataset.hpp"
#include "casr/error.hpp"
#include "casr/features.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace casr {

namespace detail {

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw DataError(context + ": cannot parse number '" + s + "'");
    return v;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
}

}  // namespace detail

// --- records CSV: utt_id,age_years,gender,snr_db,ref,hyp[,gop_utt] ---

inline std::string records_to_csv(const std::vector<UtteranceRecord>& records,
                                  const std::string& header_comment = "") {
    std::ostringstream os;
    if (!header_comment.empty()) os << header_comment << "\n";
    os << "utt_id,age_years,gender,snr_db,ref,hyp,gop_utt\n";
    auto join = [](const std::vector<std::string>& words) {
        std::string out;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) out.push_back(' ');
            out += words[i];
        }
        return out;
    };
    for (const auto& r : records) {
        os << detail::csv_field(r.utt_id) << ',' << detail::format_double(r.age_years) << ','
           << r.gender << ',' << detail::format_double(r.snr_db) << ','
           << detail::csv_field(join(r.ref)) << ',' << detail::csv_field(join(r.hyp)) << ','
           << (r.gop_utt ? detail::format_double(*r.gop_utt) : "") << "\n";
    }
    return os.str();
}

inline std::vector<UtteranceRecord> records_from_csv_lines(const std::vector<std::string>& lines,
                                                           const std::string& context) {
    std::vector<UtteranceRecord> records;
    std::optional<std::map<std::string, int>> header;
    for (const auto& line : lines) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = detail::split_csv_line(line);
        if (!header) {
            std::map<std::string, int> h;
            for (std::size_t i = 0; i < fields.size(); ++i) h[fields[i]] = static_cast<int>(i);
            for (const char* col : {"utt_id", "age_years", "gender", "snr_db", "ref", "hyp"})
                if (!h.count(col))
                    throw DataError(context + ": missing required column '" + col + "'");
            header = std::move(h);
            continue;
        }
        auto get = [&](const char* col) -> std::string {
            const auto it = header->find(col);
            if (it == header->end() || it->second >= static_cast<int>(fields.size())) return "";
            return fields[static_cast<std::size_t>(it->second)];
        };
        UtteranceRecord r;
        r.utt_id = get("utt_id");
        const std::string age = get("age_years");
        const std::string snr = get("snr_db");
        r.age_years = age.empty() ? std::nan("") : detail::parse_double(age, context);
        r.gender = get("gender");
        r.snr_db = snr.empty() ? std::nan("") : detail::parse_double(snr, context);
        r.ref = tokenize(get("ref"));
        r.hyp = tokenize(get("hyp"));
        if (header->count("gop_utt")) {
            const std::string g = get("gop_utt");
            if (!g.empty()) r.gop_utt = detail::parse_double(g, context);
        }
        records.push_back(std::move(r));
    }
    if (!header) throw DataError(context + ": no records (empty file)");
    return records;
}

inline std::vector<UtteranceRecord> read_records_csv(const std::string& path) {
    return records_from_csv_lines(detail::read_lines(path), path);
}

// --- GoP sidecar: utt_id<TAB>space-separated phone ratios ---

inline std::map<std::string, std::vector<double>> read_gop_sidecar(const std::string& path) {
    std::map<std::string, std::vector<double>> out;
    for (const auto& line : detail::read_lines(path)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ": expected utt_id<TAB>ratios, got '" + line + "'");
        const std::string id = line.substr(0, tab);
        std::istringstream rest(line.substr(tab + 1));
        std::vector<double> ratios;
        std::string tok;
        while (rest >> tok) ratios.push_back(detail::parse_double(tok, path));
        out[id] = std::move(ratios);
    }
    return out;
}

inline std::string gop_sidecar_to_text(const std::map<std::string, std::vector<double>>& sidecar,
                                       const std::string& header_comment = "") {
    std::ostringstream os;
    if (!header_comment.empty()) os << header_comment << "\n";
    for (const auto& [id, ratios] : sidecar) {
        os << id << '\t';
        for (std::size_t i = 0; i < ratios.size(); ++i) {
            if (i) os << ' ';
            os << detail::format_double(ratios[i]);
        }
        os << "\n";
    }
    return os.str();
}

inline void attach_gop_sidecar(std::vector<UtteranceRecord>& records,
                               const std::map<std::string, std::vector<double>>& sidecar) {
    for (auto& r : records) {
        const auto it = sidecar.find(r.utt_id);
        if (it != sidecar.end()) r.phone_posterior_ratios = it->second;
    }
}

// --- lexicon: word<TAB>count lines plus one __TOTAL__ line ---

inline FrequencyLexicon read_lexicon(const std::string& path) {
    FrequencyLexicon lex;
    bool total_seen = false;
    for (const auto& line : detail::read_lines(path)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ": expected word<TAB>count, got '" + line + "'");
        const std::string word = line.substr(0, tab);
        const auto count =
            static_cast<int64_t>(detail::parse_double(line.substr(tab + 1), path));
        if (word == "__TOTAL__") {
            lex.total_tokens = count;
            total_seen = true;
        } else {
            lex.counts[word] = count;
        }
    }
    if (!total_seen) throw DataError(path + ": missing __TOTAL__ line");
    lex.validate();
    return lex;
}

inline std::string lexicon_to_text(const FrequencyLexicon& lex,
                                   const std::string& header_comment = "") {
    std::ostringstream os;
    if (!header_comment.empty()) os << header_comment << "\n";
    for (const auto& [w, c] : lex.counts) os << w << '\t' << c << "\n";
    os << "__TOTAL__\t" << lex.total_tokens << "\n";
    return os.str();
}

// --- discrete dataset: CSV of level labels / decimals + schema sidecar ---

inline std::string dataset_to_csv(const DiscreteDataset& data,
                                  const std::string& header_comment = "") {
    std::ostringstream os;
    if (!header_comment.empty()) os << header_comment << "\n";
    const auto& schema = data.schema();
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (i) os << ',';
        os << detail::csv_field(schema[i].name);
    }
    os << "\n";
    const std::size_t n = data.n_rows();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < schema.size(); ++i) {
            if (i) os << ',';
            if (schema[i].discrete()) {
                const int lvl = data.discrete_column(static_cast<int>(i))[r];
                os << detail::csv_field(schema[i].levels[static_cast<std::size_t>(lvl)]);
            } else {
                os << detail::format_double(data.numeric_column(static_cast<int>(i))[r]);
            }
        }
        os << "\n";
    }
    return os.str();
}

inline nlohmann::json schema_to_json(const DiscreteDataset& data) {
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : data.schema()) {
        nlohmann::json vj;
        vj["name"] = v.name;
        vj["kind"] = to_string(v.kind);
        vj["role"] = to_string(v.role);
        vj["levels"] = v.levels;
        vars.push_back(std::move(vj));
    }
    return nlohmann::json{{"variables", std::move(vars)}};
}

inline std::vector<VariableSchema> schema_from_json(const nlohmann::json& j) {
    std::vector<VariableSchema> out;
    for (const auto& vj : j.at("variables")) {
        VariableSchema v;
        v.name = vj.at("name").get<std::string>();
        v.kind = kind_from_string(vj.at("kind").get<std::string>());
        v.role = role_from_string(vj.at("role").get<std::string>());
        v.levels = vj.at("levels").get<std::vector<std::string>>();
        out.push_back(std::move(v));
    }
    return out;
}

inline DiscreteDataset read_dataset_csv(const std::string& csv_path,
                                        const std::string& schema_path) {
    std::ifstream sin(schema_path);
    if (!sin) throw DataError("cannot open schema sidecar: " + schema_path);
    nlohmann::json sj;
    sin >> sj;
    const std::vector<VariableSchema> schema = schema_from_json(sj);

    std::vector<DiscreteDataset::Column> columns;
    for (const auto& v : schema) {
        if (v.discrete())
            columns.emplace_back(DiscreteDataset::DiscreteColumn{});
        else
            columns.emplace_back(DiscreteDataset::NumericColumn{});
    }

    bool header_seen = false;
    std::vector<int> order;  // csv column -> schema index
    for (const auto& line : detail::read_lines(csv_path)) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = detail::split_csv_line(line);
        if (!header_seen) {
            for (const auto& name : fields) {
                int idx = -1;
                for (std::size_t i = 0; i < schema.size(); ++i)
                    if (schema[i].name == name) idx = static_cast<int>(i);
                if (idx < 0)
                    throw DataError(csv_path + ": column '" + name + "' not in schema sidecar");
                order.push_back(idx);
            }
            if (order.size() != schema.size())
                throw DataError(csv_path + ": column count does not match schema");
            header_seen = true;
            continue;
        }
        if (fields.size() != order.size())
            throw DataError(csv_path + ": ragged row '" + line + "'");
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto i = static_cast<std::size_t>(order[c]);
            if (schema[i].discrete())
                std::get<DiscreteDataset::DiscreteColumn>(columns[i])
                    .push_back(schema[i].level_index(fields[c]));
            else
                std::get<DiscreteDataset::NumericColumn>(columns[i])
                    .push_back(detail::parse_double(fields[c], csv_path));
        }
    }
    if (!header_seen) throw DataError(csv_path + ": no records (empty file)");
    return DiscreteDataset(schema, std::move(columns));
}

// --- bin boundaries JSON ---

inline nlohmann::json bins_to_json(const std::map<std::string, BinSpec>& bins) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, spec] : bins)
        j[name] = {{"boundaries", spec.boundaries}, {"labels", spec.labels}};
    return j;
}

inline std::map<std::string, BinSpec> bins_from_json(const nlohmann::json& j) {
    std::map<std::string, BinSpec> out;
    for (const auto& [name, bj] : j.items()) {
        if (name == "provenance") continue;
        BinSpec spec;
        spec.boundaries = bj.at("boundaries").get<std::vector<double>>();
        spec.labels = bj.at("labels").get<std::vector<std::string>>();
        spec.validate();
        out[name] = std::move(spec);
    }
    return out;
}

}  // namespace casr
