#include "selrisk/strategy_config.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "selrisk/csv.hpp"

namespace selrisk {

namespace {

using nlohmann::json;

AdjustmentRule parse_rule(const json& obj) {
    const std::string name = obj.value("adjustment", "independent");
    if (name == "independent") return AdjustmentRule::independent;
    if (name == "harmonic") return AdjustmentRule::harmonic;
    throw std::runtime_error("suite config: unknown adjustment \"" + name + "\"");
}

std::vector<double> load_column(const CsvTable& table, const std::string& name) {
    const std::size_t col = table.column(name);
    std::vector<double> out(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) out[r] = csv_double(table, r, col);
    return out;
}

// Rows grouped by task_id, task order = first appearance.
struct GroupedColumn {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;
};

GroupedColumn load_grouped(const CsvTable& table) {
    const std::size_t id_col = table.column("task_id");
    const std::size_t p_col = table.column("p");
    GroupedColumn out;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& id = table.rows[r][id_col];
        auto [it, inserted] = index.try_emplace(id, out.labels.size());
        if (inserted) {
            out.labels.push_back(id);
            out.values.emplace_back();
        }
        out.values[it->second].push_back(csv_double(table, r, p_col));
    }
    return out;
}

std::vector<std::string> numbered_labels(std::size_t m) {
    std::vector<std::string> labels(m);
    for (std::size_t i = 0; i < m; ++i) labels[i] = std::to_string(i + 1);
    return labels;
}

struct BuiltPair {
    StrategyPair pair;
    std::size_t task_count;
    std::vector<std::string> task_labels;
};

BuiltPair build_pair(const json& obj, const std::filesystem::path& base_dir) {
    if (!obj.contains("kind")) {
        throw std::runtime_error("suite config: every pair needs a \"kind\"");
    }
    if (!obj.contains("q")) {
        throw std::runtime_error("suite config: every pair needs a risk level \"q\"");
    }
    if (!obj.contains("input")) {
        throw std::runtime_error("suite config: every pair needs an \"input\" CSV path");
    }
    const std::string kind = obj.at("kind").get<std::string>();
    const RiskLevel q(obj.at("q").get<double>());
    const AdjustmentRule rule = parse_rule(obj);

    std::filesystem::path input = obj.at("input").get<std::string>();
    if (input.is_relative()) input = base_dir / input;
    const CsvTable table = read_csv(input.string());

    if (kind == "threshold") {
        PValueVector p(load_column(table, "p"));
        const std::size_t m = p.size();
        return BuiltPair{threshold_identity_pair(std::move(p), q, rule), m, numbered_labels(m)};
    }
    if (kind == "balance") {
        PValueVector p(load_column(table, "p"));
        const auto raw = load_column(table, "category");
        std::vector<int> categories(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) categories[i] = static_cast<int>(raw[i]);
        const double gamma = obj.value("gamma", 2.0);
        const std::size_t m = p.size();
        return BuiltPair{balance_pair(std::move(p), std::move(categories), gamma, q, rule), m,
                         numbered_labels(m)};
    }
    if (kind == "group_fwe") {
        const std::string method_name = obj.value("method", "bonferroni");
        FweMethod method;
        if (method_name == "bonferroni") {
            method = FweMethod::bonferroni;
        } else if (method_name == "holm") {
            method = FweMethod::holm;
        } else {
            throw std::runtime_error("suite config: unknown FWE method \"" + method_name + "\"");
        }
        GroupedColumn grouped = load_grouped(table);
        const std::size_t m = grouped.labels.size();
        return BuiltPair{group_fwe_pair(std::move(grouped.values), method, q, rule), m,
                         std::move(grouped.labels)};
    }
    if (kind == "directional") {
        PValueVector p(load_column(table, "p"));
        const std::size_t m = p.size();
        return BuiltPair{directional_pair(std::move(p), q, rule), m, numbered_labels(m)};
    }
    if (kind == "partial_conjunction") {
        GroupedColumn grouped = load_grouped(table);
        const std::size_t m = grouped.labels.size();
        return BuiltPair{partial_conjunction_pair(std::move(grouped.values), q, rule), m,
                         std::move(grouped.labels)};
    }
    throw std::runtime_error(
        "suite config: unknown kind \"" + kind +
        "\" (valid: threshold, balance, group_fwe, directional, partial_conjunction)");
}

}  // namespace

LoadedSuite load_suite_config(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) {
        throw std::runtime_error("suite config: cannot open " + config_path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("suite config: " + config_path + ": " + e.what());
    }
    if (doc.value("schema_version", 0) != 1) {
        throw std::runtime_error("suite config: schema_version must be 1");
    }
    if (!doc.contains("pairs") || !doc.at("pairs").is_array() || doc.at("pairs").empty()) {
        throw std::runtime_error("suite config: \"pairs\" must be a nonempty array");
    }

    const std::filesystem::path base_dir = std::filesystem::path(config_path).parent_path();
    LoadedSuite out;
    for (const auto& entry : doc.at("pairs")) {
        BuiltPair built = build_pair(entry, base_dir);
        if (out.task_count == 0) {
            out.task_count = built.task_count;
            out.task_labels = std::move(built.task_labels);
        } else if (built.task_count != out.task_count) {
            throw std::runtime_error("suite config: pairs disagree on the number of tasks (" +
                                     std::to_string(out.task_count) + " vs " +
                                     std::to_string(built.task_count) + ")");
        }
        out.suite.pairs.push_back(std::move(built.pair));
    }
    return out;
}

}  // namespace selrisk
