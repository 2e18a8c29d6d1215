#pragma once

#include "casr/error.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace casr {

enum class VariableKind { Categorical, Ordinal, NumericOutcome };

// Table-1 style taxonomy of variables.
enum class VariableRole { Physiological, Cognitive, Extrinsic, Error };

inline std::string to_string(VariableKind k) {
    switch (k) {
        case VariableKind::Categorical: return "categorical";
        case VariableKind::Ordinal: return "ordinal";
        case VariableKind::NumericOutcome: return "numeric-outcome";
    }
    return "?";
}

inline VariableKind kind_from_string(const std::string& s) {
    if (s == "categorical") return VariableKind::Categorical;
    if (s == "ordinal") return VariableKind::Ordinal;
    if (s == "numeric-outcome") return VariableKind::NumericOutcome;
    throw DataError("unknown variable kind: " + s);
}

inline std::string to_string(VariableRole r) {
    switch (r) {
        case VariableRole::Physiological: return "physiological";
        case VariableRole::Cognitive: return "cognitive";
        case VariableRole::Extrinsic: return "extrinsic";
        case VariableRole::Error: return "error";
    }
    return "?";
}

inline VariableRole role_from_string(const std::string& s) {
    if (s == "physiological") return VariableRole::Physiological;
    if (s == "cognitive") return VariableRole::Cognitive;
    if (s == "extrinsic") return VariableRole::Extrinsic;
    if (s == "error") return VariableRole::Error;
    throw DataError("unknown variable role: " + s);
}

// One variable of the analysis: a named discrete variable with an ordered
// level set, or a real-valued outcome (no levels). The level order is the
// ordinal order used for contrasts; it is fixed at construction.
struct VariableSchema {
    std::string name;
    VariableKind kind = VariableKind::Categorical;
    std::vector<std::string> levels;  // empty for numeric-outcome
    VariableRole role = VariableRole::Extrinsic;

    bool discrete() const { return kind != VariableKind::NumericOutcome; }
    int n_levels() const { return static_cast<int>(levels.size()); }

    int level_index(const std::string& label) const {
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (levels[i] == label) return static_cast<int>(i);
        throw DataError("variable '" + name + "' has no level '" + label + "'");
    }

    void validate() const {
        if (name.empty()) throw DataError("variable with empty name");
        if (discrete()) {
            if (levels.size() < 2)
                throw DataError("variable '" + name + "' needs >= 2 levels");
            for (std::size_t i = 0; i < levels.size(); ++i)
                for (std::size_t j = i + 1; j < levels.size(); ++j)
                    if (levels[i] == levels[j])
                        throw DataError("variable '" + name + "' has duplicate level '" +
                                        levels[i] + "'");
        } else {
            if (!levels.empty())
                throw DataError("numeric-outcome variable '" + name + "' must not have levels");
        }
    }

    bool operator==(const VariableSchema&) const = default;
};

// Column-oriented table: level indices for discrete variables, real values
// for numeric outcomes. Immutable once built (builders aside); all queries
// are const and safe to share across threads.
class DiscreteDataset {
public:
    using DiscreteColumn = std::vector<int32_t>;
    using NumericColumn = std::vector<double>;
    using Column = std::variant<DiscreteColumn, NumericColumn>;

    DiscreteDataset() = default;

    DiscreteDataset(std::vector<VariableSchema> schema, std::vector<Column> columns)
        : schema_(std::move(schema)), columns_(std::move(columns)) {
        validate();
    }

    const std::vector<VariableSchema>& schema() const { return schema_; }
    std::size_t n_vars() const { return schema_.size(); }

    std::size_t n_rows() const {
        if (columns_.empty()) return 0;
        return std::visit([](const auto& c) { return c.size(); }, columns_[0]);
    }

    bool has_variable(const std::string& name) const {
        for (const auto& v : schema_)
            if (v.name == name) return true;
        return false;
    }

    int var_index(const std::string& name) const {
        for (std::size_t i = 0; i < schema_.size(); ++i)
            if (schema_[i].name == name) return static_cast<int>(i);
        throw DataError("unknown variable: " + name);
    }

    const VariableSchema& variable(const std::string& name) const {
        return schema_[static_cast<std::size_t>(var_index(name))];
    }

    const DiscreteColumn& discrete_column(int i) const {
        const auto* c = std::get_if<DiscreteColumn>(&columns_.at(static_cast<std::size_t>(i)));
        if (!c)
            throw DataError("variable '" + schema_[static_cast<std::size_t>(i)].name +
                            "' is not discrete");
        return *c;
    }

    const NumericColumn& numeric_column(int i) const {
        const auto* c = std::get_if<NumericColumn>(&columns_.at(static_cast<std::size_t>(i)));
        if (!c)
            throw DataError("variable '" + schema_[static_cast<std::size_t>(i)].name +
                            "' is not numeric");
        return *c;
    }

    const DiscreteColumn& discrete_column(const std::string& name) const {
        return discrete_column(var_index(name));
    }
    const NumericColumn& numeric_column(const std::string& name) const {
        return numeric_column(var_index(name));
    }

    std::vector<std::string> variable_names() const {
        std::vector<std::string> out;
        out.reserve(schema_.size());
        for (const auto& v : schema_) out.push_back(v.name);
        return out;
    }

    // Subset / rename view, preserving order of `spec` = {(source, new_name)}.
    DiscreteDataset select(const std::vector<std::pair<std::string, std::string>>& spec) const {
        std::vector<VariableSchema> schema;
        std::vector<Column> cols;
        for (const auto& [src, name] : spec) {
            int i = var_index(src);
            VariableSchema v = schema_[static_cast<std::size_t>(i)];
            v.name = name;
            schema.push_back(std::move(v));
            cols.push_back(columns_[static_cast<std::size_t>(i)]);
        }
        return DiscreteDataset(std::move(schema), std::move(cols));
    }

    void validate() const {
        if (schema_.size() != columns_.size())
            throw DataError("dataset: schema/column count mismatch");
        for (const auto& v : schema_) v.validate();
        for (std::size_t i = 0; i < schema_.size(); ++i)
            for (std::size_t j = i + 1; j < schema_.size(); ++j)
                if (schema_[i].name == schema_[j].name)
                    throw DataError("dataset: duplicate variable '" + schema_[i].name + "'");
        const std::size_t n = n_rows();
        for (std::size_t i = 0; i < schema_.size(); ++i) {
            const auto& v = schema_[i];
            if (v.discrete()) {
                const auto* c = std::get_if<DiscreteColumn>(&columns_[i]);
                if (!c) throw DataError("variable '" + v.name + "': expected discrete column");
                if (c->size() != n) throw DataError("variable '" + v.name + "': ragged column");
                for (int32_t lvl : *c)
                    if (lvl < 0 || lvl >= v.n_levels())
                        throw DataError("variable '" + v.name + "': level index out of range");
            } else {
                const auto* c = std::get_if<NumericColumn>(&columns_[i]);
                if (!c) throw DataError("variable '" + v.name + "': expected numeric column");
                if (c->size() != n) throw DataError("variable '" + v.name + "': ragged column");
            }
        }
    }

private:
    std::vector<VariableSchema> schema_;
    std::vector<Column> columns_;
};

}  // namespace casr
