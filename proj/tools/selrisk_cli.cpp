// Command-line surface for the selective risk control library: step-up
// testing, confidence-step iteration, strategy-suite runs, level-curve
// control, budget-scheduled permutation testing, and the simulation lab.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "selrisk/csv.hpp"
#include "selrisk/fdr_curve.hpp"
#include "selrisk/fixed_point.hpp"
#include "selrisk/framework.hpp"
#include "selrisk/multirisk.hpp"
#include "selrisk/normal.hpp"
#include "selrisk/permtest.hpp"
#include "selrisk/rng.hpp"
#include "selrisk/simlab.hpp"
#include "selrisk/strategy_config.hpp"
#include "selrisk/types.hpp"

namespace {

using nlohmann::json;
using namespace selrisk;

constexpr int kSchemaVersion = 1;

void write_json_atomic(const std::string& path, const json& doc) {
    write_text_atomic(path, doc.dump(2) + "\n");
}

std::vector<double> load_numeric_column(const std::string& path, const std::string& column) {
    const CsvTable table = read_csv(path);
    const std::size_t col = table.column(column);
    std::vector<double> out(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) out[r] = csv_double(table, r, col);
    return out;
}

PValueVector load_pvalues(const std::string& path) {
    auto values = load_numeric_column(path, "p");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
            throw std::runtime_error("csv: row " + std::to_string(i + 2) +
                                     ": p-value outside [0, 1]");
        }
    }
    return PValueVector(std::move(values));
}

// |S^t| sequence of the threshold iteration on fixed p-values, the
// p-space view of the confidence-step iteration.
std::vector<std::size_t> stepup_trace(const PValueVector& p, RiskLevel q) {
    const std::size_t m = p.size();
    std::vector<std::size_t> counts;
    SelectionMask current = SelectionMask::full(m);
    for (;;) {
        counts.push_back(current.count());
        const double level =
            q.value() * static_cast<double>(current.count()) / static_cast<double>(m);
        SelectionMask next =
            SelectionMask::where(m, [&](std::size_t i) { return current[i] && p[i] <= level; });
        if (next == current || next.empty()) return counts;
        current = next;
    }
}

json mask_to_json(const SelectionMask& mask) {
    json arr = json::array();
    for (std::size_t i = 0; i < mask.size(); ++i) arr.push_back(mask[i] ? 1 : 0);
    return arr;
}

json decisions_to_json(const DecisionVector& d) {
    json arr = json::array();
    if (d.is_binary()) {
        for (auto v : d.as_binary()) arr.push_back(static_cast<int>(v));
    } else if (d.is_signs()) {
        for (auto s : d.as_signs()) {
            arr.push_back(s == Sign::positive ? "+" : (s == Sign::negative ? "-" : "nil"));
        }
    } else if (d.is_bounds()) {
        for (auto v : d.as_bounds()) arr.push_back(v);
    } else {
        for (const auto& g : d.as_group_flags()) {
            json inner = json::array();
            for (auto v : g) inner.push_back(static_cast<int>(v));
            arr.push_back(inner);
        }
    }
    return arr;
}

// ---------------------------------------------------------------------------
// bh
// ---------------------------------------------------------------------------

int cmd_bh(const std::string& input, double q_value, const std::string& output,
           const std::string& format) {
    const PValueVector p = load_pvalues(input);
    const RiskLevel q(q_value);
    const SelectionMask mask = bh_step_up(p, q);
    const std::vector<std::size_t> counts = stepup_trace(p, q);

    double threshold = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (mask[i]) threshold = std::max(threshold, p[i]);
    }

    json trace;
    trace["schema_version"] = kSchemaVersion;
    trace["command"] = "bh";
    trace["m"] = p.size();
    trace["q"] = q_value;
    trace["threshold"] = threshold;
    trace["selected_counts"] = counts;
    trace["rejections"] = mask.count();

    if (format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < p.size(); ++i) {
            rows.push_back({{"task", i + 1}, {"p", p[i]}, {"reject", mask[i] ? 1 : 0}});
        }
        trace["tasks"] = rows;
        write_json_atomic(output, trace);
    } else {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < p.size(); ++i) {
            rows.push_back({std::to_string(i + 1), format_double(p[i]), mask[i] ? "1" : "0"});
        }
        write_csv_atomic(output, {"task", "p", "reject"}, rows);
        write_json_atomic(output + ".trace.json", trace);
    }
    std::cout << "bh: m=" << p.size() << " rejections=" << mask.count()
              << " threshold=" << format_double(threshold) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// by-iterate
// ---------------------------------------------------------------------------

int cmd_by_iterate(const std::string& input, double q_value, const std::string& output,
                   const std::string& format) {
    const ZScoreVector x(load_numeric_column(input, "x"));
    const RiskLevel q(q_value);
    const ByIterationResult result = by_iterate(x, q);
    const std::size_t m = x.size();
    const std::size_t T = result.trace.terminal_index();

    // Per-task upper bound at iteration t, absent once deselected.
    std::vector<std::vector<std::optional<double>>> bounds(m,
                                                           std::vector<std::optional<double>>(T));
    for (std::size_t t = 0; t < T; ++t) {
        const auto& step = result.trace.steps[t];
        const auto idx = step.selected.indices();
        for (std::size_t k = 0; k < idx.size(); ++k) bounds[idx[k]][t] = step.upper_bounds[k];
    }

    if (format == "json") {
        json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["command"] = "by-iterate";
        doc["m"] = m;
        doc["q"] = q_value;
        doc["terminal_index"] = T;
        json steps = json::array();
        for (std::size_t t = 0; t < T; ++t) {
            const auto& step = result.trace.steps[t];
            steps.push_back({{"iteration", t + 1},
                             {"selected_count", step.selected.count()},
                             {"selected", mask_to_json(step.selected)},
                             {"upper_bounds", step.upper_bounds}});
        }
        doc["steps"] = steps;
        doc["final"] = mask_to_json(result.mask);
        write_json_atomic(output, doc);
    } else {
        std::vector<std::string> header = {"task", "x", "p"};
        for (std::size_t t = 1; t <= T; ++t) header.push_back("u_" + std::to_string(t));
        header.push_back("selected");
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<std::string> row = {std::to_string(i + 1), format_double(x[i]),
                                            format_double(normal_cdf(x[i]))};
            for (std::size_t t = 0; t < T; ++t) {
                row.push_back(bounds[i][t] ? format_double(*bounds[i][t]) : "");
            }
            row.push_back(result.mask[i] ? "1" : "0");
            rows.push_back(std::move(row));
        }
        write_csv_atomic(output, header, rows);
    }
    std::cout << "by-iterate: m=" << m << " iterations=" << T
              << " selected=" << result.mask.count() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fdr-curve
// ---------------------------------------------------------------------------

FdrCurve load_curve_config(const std::string& path, std::vector<CurveAnchor>& anchors_out) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("curve config: cannot open " + path);
    }
    json doc = json::parse(in);
    if (doc.value("schema_version", 0) != kSchemaVersion) {
        throw std::runtime_error("curve config: schema_version must be 1");
    }
    const std::string family = doc.value("family", "gaussian_shift");
    if (family != "gaussian_shift") {
        throw std::runtime_error("curve config: unsupported family \"" + family + "\"");
    }
    std::vector<CurveAnchor> anchors;
    for (const auto& a : doc.at("anchors")) {
        anchors.push_back(CurveAnchor{a.at("c").get<double>(), a.at("q").get<double>()});
    }
    std::vector<double> grid;
    if (doc.contains("grid") && doc.at("grid").is_array()) {
        grid = doc.at("grid").get<std::vector<double>>();
    } else if (doc.contains("grid")) {
        const auto& g = doc.at("grid");
        const double lo = g.at("min").get<double>();
        const double hi = g.at("max").get<double>();
        const std::size_t n = g.at("points").get<std::size_t>();
        if (n < 2 || !(hi > lo)) {
            throw std::runtime_error("curve config: grid must have points >= 2 and max > min");
        }
        grid.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        }
    }
    anchors_out = anchors;
    return FdrCurve(std::move(anchors), std::move(grid));
}

int cmd_fdr_curve(const std::string& input, const std::string& curve_path,
                  const std::string& output, const std::string& curve_output,
                  const std::string& format) {
    const ZScoreVector x(load_numeric_column(input, "x"));
    std::vector<CurveAnchor> anchors;
    const FdrCurve curve = load_curve_config(curve_path, anchors);
    const PValueFunction pf = gaussian_shift_family();
    const TaskCount m(x.size());

    const SelectionMask mask = run_fdr_curve(x, pf, curve);
    const std::vector<double> q_star = improved_curve_gaussian(anchors, m, curve.grid());

    const std::string curve_out =
        curve_output.empty() ? output + ".curve.csv" : curve_output;

    if (format == "json") {
        json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["command"] = "fdr-curve";
        doc["m"] = x.size();
        doc["rejections"] = mask.count();
        json rows = json::array();
        for (std::size_t i = 0; i < x.size(); ++i) {
            rows.push_back({{"task", i + 1},
                            {"x", x[i]},
                            {"p_sup", p_sup(x[i], pf, curve)},
                            {"reject", mask[i] ? 1 : 0}});
        }
        doc["tasks"] = rows;
        json table = json::array();
        for (std::size_t g = 0; g < curve.grid().size(); ++g) {
            table.push_back({{"c", curve.grid()[g]},
                             {"q_bh", anchor_step_level(anchors, curve.grid()[g])},
                             {"q_star", q_star[g]}});
        }
        doc["curve"] = table;
        write_json_atomic(output, doc);
    } else {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < x.size(); ++i) {
            rows.push_back({std::to_string(i + 1), format_double(x[i]),
                            format_double(p_sup(x[i], pf, curve)), mask[i] ? "1" : "0"});
        }
        write_csv_atomic(output, {"task", "x", "p_sup", "reject"}, rows);

        std::vector<std::vector<std::string>> curve_rows;
        for (std::size_t g = 0; g < curve.grid().size(); ++g) {
            curve_rows.push_back({format_double(curve.grid()[g]),
                                  format_double(anchor_step_level(anchors, curve.grid()[g])),
                                  format_double(q_star[g])});
        }
        write_csv_atomic(curve_out, {"c", "q_bh", "q_star"}, curve_rows);
    }
    std::cout << "fdr-curve: m=" << x.size() << " rejections=" << mask.count()
              << " grid_points=" << curve.grid().size() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// extra-risk / multi-risk
// ---------------------------------------------------------------------------

json multirisk_report(const LoadedSuite& loaded, const MultiRiskTrace& trace,
                      const std::string& mode) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "multi-risk";
    doc["mode"] = mode;
    doc["m"] = loaded.task_count;
    doc["risks"] = loaded.suite.risk_count();
    doc["task_labels"] = loaded.task_labels;
    doc["terminal_index"] = trace.terminal_index();
    doc["selected"] = mask_to_json(trace.terminal);
    doc["selected_count"] = trace.terminal.count();
    json steps = json::array();
    for (const auto& step : trace.steps) {
        steps.push_back({{"selected_count", step.selected.count()},
                         {"adjusted_levels", step.adjusted_levels}});
    }
    doc["trace"] = steps;
    json decisions = json::array();
    for (const auto& d : trace.terminal_decisions()) decisions.push_back(decisions_to_json(d));
    doc["terminal_decisions"] = decisions;
    return doc;
}

int cmd_extra_risk(const std::string& suite_path, const std::string& output) {
    const LoadedSuite loaded = load_suite_config(suite_path);
    if (loaded.suite.risk_count() != 1) {
        throw std::runtime_error("extra-risk: the suite must contain exactly one pair (use "
                                 "multi-risk for several)");
    }
    const GameTrace trace = run_extra_selection(loaded.suite.pairs[0],
                                                SelectionMask::full(loaded.task_count));
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "extra-risk";
    doc["m"] = loaded.task_count;
    doc["task_labels"] = loaded.task_labels;
    doc["terminal_index"] = trace.terminal_index();
    doc["selected"] = mask_to_json(trace.terminal);
    doc["selected_count"] = trace.terminal.count();
    json steps = json::array();
    for (const auto& step : trace.steps) {
        steps.push_back({{"selected_count", step.selected.count()},
                         {"adjusted_level", step.adjusted_level}});
    }
    doc["trace"] = steps;
    doc["terminal_decisions"] = decisions_to_json(trace.terminal_decisions());
    write_json_atomic(output, doc);
    std::cout << "extra-risk: m=" << loaded.task_count
              << " selected=" << trace.terminal.count() << " iterations=" << trace.terminal_index()
              << "\n";
    return 0;
}

int cmd_multi_risk(const std::string& suite_path, const std::string& mode,
                   const std::string& output) {
    const LoadedSuite loaded = load_suite_config(suite_path);
    const SelectionMask initial = SelectionMask::full(loaded.task_count);
    const MultiRiskTrace trace = (mode == "sequential")
                                     ? run_sequential_composition(loaded.suite, initial)
                                     : run_parallel_intersection(loaded.suite, initial);
    write_json_atomic(output, multirisk_report(loaded, trace, mode));
    std::cout << "multi-risk(" << mode << "): m=" << loaded.task_count
              << " risks=" << loaded.suite.risk_count() << " selected=" << trace.terminal.count()
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// perm-bh
// ---------------------------------------------------------------------------

struct ObservationSet {
    std::vector<std::string> task_labels;
    std::vector<PermutationTask> tasks;
};

ObservationSet load_observations(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::size_t id_col = table.column("task_id");
    const std::size_t group_col = table.column("group");
    const std::size_t value_col = table.column("value");

    std::vector<std::string> group_names;
    std::map<std::string, std::size_t> task_index;
    std::vector<std::string> labels;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> samples;

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& group = table.rows[r][group_col];
        std::size_t g = group_names.size();
        for (std::size_t k = 0; k < group_names.size(); ++k) {
            if (group_names[k] == group) {
                g = k;
                break;
            }
        }
        if (g == group_names.size()) {
            if (group_names.size() == 2) {
                throw std::runtime_error("perm-bh: row " + std::to_string(r + 2) +
                                         ": unknown group label \"" + group +
                                         "\" (already saw \"" + group_names[0] + "\" and \"" +
                                         group_names[1] + "\")");
            }
            group_names.push_back(group);
        }
        const std::string& id = table.rows[r][id_col];
        auto [it, inserted] = task_index.try_emplace(id, labels.size());
        if (inserted) {
            labels.push_back(id);
            samples.emplace_back();
        }
        auto& slot = samples[it->second];
        (g == 0 ? slot.first : slot.second).push_back(csv_double(table, r, value_col));
    }

    ObservationSet out;
    out.task_labels = std::move(labels);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].first.empty() || samples[i].second.empty()) {
            throw std::runtime_error("perm-bh: task \"" + out.task_labels[i] +
                                     "\" has fewer than 1 observation in some group");
        }
        out.tasks.push_back(make_two_sample_task(std::move(samples[i].first),
                                                 std::move(samples[i].second),
                                                 two_sample_meandiff));
    }
    return out;
}

int cmd_perm_bh(const std::string& input, double q_value, double epsilon, double delta,
                std::uint64_t seed, std::optional<std::size_t> fixed_m,
                const std::string& output) {
    ObservationSet obs = load_observations(input);
    const std::size_t m = obs.tasks.size();
    const RiskLevel q(q_value);

    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "perm-bh";
    doc["m"] = m;
    doc["q"] = q_value;
    doc["seed"] = seed;
    doc["statistic"] = "two_sample_meandiff";

    PermRunReport report{SelectionMask::none(1), {}, 0, {}};
    if (fixed_m) {
        report = run_fixed_m_bh(obs.tasks, two_sample_meandiff, q, *fixed_m, seed);
        doc["mode"] = "fixed";
        doc["fixed_m"] = *fixed_m;
    } else {
        const BudgetSchedule schedule(q, epsilon, delta, TaskCount(m));
        report = run_accelerated_bh(obs.tasks, two_sample_meandiff, q, schedule, seed);
        doc["mode"] = "scheduled";
        doc["epsilon"] = epsilon;
        doc["delta"] = delta;
        doc["schedule"] = {{"constant", schedule.constant()},
                           {"first_round_budget", schedule.budget(m)},
                           {"total_budget_bound", schedule.total_budget_bound()}};
    }

    doc["selected"] = mask_to_json(report.mask);
    doc["selected_count"] = report.mask.count();
    doc["total_permutations"] = report.total_permutations;
    json tasks = json::array();
    for (std::size_t i = 0; i < m; ++i) {
        tasks.push_back({{"task_id", obs.task_labels[i]},
                         {"observed", obs.tasks[i].observed},
                         {"consumed", report.consumed[i]},
                         {"p_value", perm_pvalue(obs.tasks[i].observed, obs.tasks[i].pool)},
                         {"reject", report.mask[i] ? 1 : 0}});
    }
    doc["tasks"] = tasks;
    json trace = json::array();
    for (const auto& rec : report.trace) {
        trace.push_back({{"selected_count", rec.selected_count}, {"threshold", rec.threshold}});
    }
    doc["trace"] = trace;

    write_json_atomic(output, doc);
    std::cout << "perm-bh: m=" << m << " rejections=" << report.mask.count()
              << " total_permutations=" << report.total_permutations << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

std::vector<double> theta_from_layout(const json& layout) {
    std::vector<double> theta;
    for (const auto& block : layout) {
        const double value = block.at("value").get<double>();
        const std::size_t count = block.at("count").get<std::size_t>();
        theta.insert(theta.end(), count, value);
    }
    if (theta.empty()) {
        throw std::runtime_error("scenario: theta layout produced no tasks");
    }
    return theta;
}

std::size_t require_reps(const json& scenario) {
    const std::size_t reps = scenario.value("reps", std::size_t{0});
    if (reps == 0) {
        throw std::runtime_error("scenario: \"reps\" must be a positive integer");
    }
    return reps;
}

json estimate_to_json(const RiskEstimate& est) {
    return {{"estimate", est.estimate},
            {"std_error", est.std_error},
            {"replications", est.replications}};
}

json run_scenario(const json& scenario, std::uint64_t seed,
                  const std::filesystem::path& base_dir) {
    const std::string procedure = scenario.value("procedure", "");
    json result;
    result["procedure"] = procedure;

    if (procedure == "bh_fdr") {
        const std::size_t reps = require_reps(scenario);
        const RiskLevel q(scenario.at("q").get<double>());
        GroundTruth truth{theta_from_layout(scenario.at("theta")), 0.0};
        std::size_t nulls = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) nulls += truth.is_null(i);
        const RiskEstimate est = estimate_fdp_risk(
            [&](const ZScoreVector& x) {
                const SelectionMask mask = bh_step_up(one_sided_pvalues(x), q);
                std::vector<double> losses(truth.size(), 0.0);
                for (std::size_t i = 0; i < truth.size(); ++i) {
                    losses[i] = truth.is_null(i) ? 1.0 : 0.0;
                }
                return SelectedLosses{mask, std::move(losses)};
            },
            truth, reps, seed);
        const double bound =
            q.value() * static_cast<double>(nulls) / static_cast<double>(truth.size());
        result["risk"] = estimate_to_json(est);
        result["bound"] = bound;
        result["verdict"] = est.estimate <= bound + 3.0 * est.std_error;
        return result;
    }

    if (procedure == "fcr_by") {
        const std::size_t reps = require_reps(scenario);
        const RiskLevel q(scenario.at("q").get<double>());
        const double threshold = scenario.value("selection_threshold", 0.3);
        GroundTruth truth{theta_from_layout(scenario.at("theta")), 0.0};
        const RiskEstimate est = estimate_fcr(
            truth, q,
            [&](const ZScoreVector& x) {
                return SelectionMask::where(
                    x.size(), [&](std::size_t i) { return normal_cdf(x[i]) <= threshold; });
            },
            reps, seed);
        result["risk"] = estimate_to_json(est);
        result["bound"] = q.value();
        result["verdict"] = est.estimate <= q.value() + 3.0 * est.std_error;
        return result;
    }

    if (procedure == "harmonic_post") {
        const std::size_t reps = require_reps(scenario);
        const RiskLevel q(scenario.at("q").get<double>());
        const double rho = scenario.value("rho", 0.8);
        const double threshold = scenario.value("selection_threshold", 0.3);
        GroundTruth truth{theta_from_layout(scenario.at("theta")), 0.0};
        const TaskCount m(truth.size());
        const RiskEstimate est = monte_carlo_mean(reps, seed, [&](std::uint64_t rep_seed) {
            const ZScoreVector x = simulate_equicorrelated(truth.theta, rho, rep_seed);
            const SelectionMask selected = SelectionMask::where(
                x.size(), [&](std::size_t i) { return normal_cdf(x[i]) <= threshold; });
            if (selected.empty()) return 0.0;
            const double level =
                adjusted_level(q, selected.count(), AdjustmentRule::harmonic, m);
            double loss = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (selected[i] && truth.is_null(i) && normal_cdf(x[i]) <= level) loss += 1.0;
            }
            return loss / static_cast<double>(selected.count());
        });
        result["risk"] = estimate_to_json(est);
        result["bound"] = q.value();
        result["verdict"] = est.estimate <= q.value() + 3.0 * est.std_error;
        return result;
    }

    if (procedure == "fdr_curve") {
        const std::size_t reps = require_reps(scenario);
        GroundTruth truth{theta_from_layout(scenario.at("theta")), 0.0};
        const TaskCount m(truth.size());
        std::vector<CurveAnchor> anchors;
        for (const auto& a : scenario.at("anchors")) {
            anchors.push_back(CurveAnchor{a.at("c").get<double>(), a.at("q").get<double>()});
        }
        std::vector<double> grid = scenario.at("grid").get<std::vector<double>>();
        const std::vector<double> q_star = improved_curve_gaussian(anchors, m, grid);
        const PValueFunction pf = gaussian_shift_family();
        const FdrCurve curve(anchors, grid);
        const std::vector<RiskEstimate> estimates = estimate_fdr_curve(
            [&](const ZScoreVector& x) { return run_fdr_curve(x, pf, curve); }, truth, grid, reps,
            seed);
        double max_ratio = 0.0;
        double se_at_max = 0.0;
        json rows = json::array();
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double ratio = estimates[g].estimate / q_star[g];
            if (ratio > max_ratio) {
                max_ratio = ratio;
                se_at_max = estimates[g].std_error / q_star[g];
            }
            rows.push_back({{"c", grid[g]},
                            {"q_star", q_star[g]},
                            {"risk", estimate_to_json(estimates[g])}});
        }
        result["curve"] = rows;
        result["max_ratio"] = max_ratio;
        result["max_ratio_std_error"] = se_at_max;
        result["verdict"] = max_ratio <= 1.0 + 3.0 * se_at_max;
        return result;
    }

    if (procedure == "perm_fdr") {
        const std::size_t reps = require_reps(scenario);
        const RiskLevel q(scenario.at("q").get<double>());
        const double epsilon = scenario.value("epsilon", 0.2);
        const double delta = scenario.value("delta", 0.3);
        const std::size_t n_a = scenario.value("n_a", std::size_t{5});
        const std::size_t n_b = scenario.value("n_b", std::size_t{5});
        GroundTruth truth{theta_from_layout(scenario.at("theta")), 0.0};
        truth.null_cutoff = 1e-12;  // non-null only with a strictly positive shift
        const std::size_t m = truth.size();
        const BudgetSchedule schedule(q, epsilon, delta, TaskCount(m));

        const RiskEstimate est = monte_carlo_mean(reps, seed, [&](std::uint64_t rep_seed) {
            std::vector<PermutationTask> tasks;
            tasks.reserve(m);
            for (std::size_t i = 0; i < m; ++i) {
                CounterRng rng(derive_stream(rep_seed, 0x64617461ULL, i));
                std::vector<double> a(n_a), b(n_b);
                for (auto& v : a) v = truth.theta[i] + rng.next_normal();
                for (auto& v : b) v = rng.next_normal();
                tasks.push_back(make_two_sample_task(std::move(a), std::move(b),
                                                     two_sample_meandiff));
            }
            const PermRunReport report = run_accelerated_bh(tasks, two_sample_meandiff, q,
                                                            schedule, mix64(rep_seed));
            if (report.mask.empty()) return 0.0;
            double false_count = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (report.mask[i] && truth.theta[i] <= 0.0) false_count += 1.0;
            }
            return false_count / static_cast<double>(report.mask.count());
        });
        result["risk"] = estimate_to_json(est);
        result["bound"] = q.value();
        result["schedule_constant"] = schedule.constant();
        result["verdict"] = est.estimate <= q.value() + 3.0 * est.std_error;
        return result;
    }

    if (procedure == "bh_recheck") {
        std::filesystem::path pv_path = scenario.at("pvalues_csv").get<std::string>();
        std::filesystem::path rej_path = scenario.at("rejections_csv").get<std::string>();
        if (pv_path.is_relative()) pv_path = base_dir / pv_path;
        if (rej_path.is_relative()) rej_path = base_dir / rej_path;
        const RiskLevel q(scenario.at("q").get<double>());
        const PValueVector p = load_pvalues(pv_path.string());
        const SelectionMask mask = bh_step_up(p, q);

        const CsvTable rej = read_csv(rej_path.string());
        const std::size_t col = rej.column("reject");
        if (rej.rows.size() != p.size()) {
            throw std::runtime_error("bh_recheck: rejection CSV has a different task count");
        }
        bool match = true;
        json flags = json::array();
        for (std::size_t i = 0; i < p.size(); ++i) {
            const bool flagged = csv_double(rej, i, col) != 0.0;
            flags.push_back(flagged ? 1 : 0);
            if (flagged != mask[i]) match = false;
        }
        result["match"] = match;
        result["recomputed"] = mask_to_json(mask);
        result["ingested"] = flags;
        result["verdict"] = match;
        return result;
    }

    throw std::runtime_error(
        "scenario: unknown procedure \"" + procedure +
        "\" (valid: bh_fdr, fcr_by, harmonic_post, fdr_curve, perm_fdr, bh_recheck)");
}

int cmd_simulate(const std::string& scenario_path, std::uint64_t seed, const std::string& output,
                 const std::string& format) {
    std::ifstream in(scenario_path);
    if (!in) {
        throw std::runtime_error("scenario: cannot open " + scenario_path);
    }
    json scenario;
    try {
        scenario = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("scenario: ") + e.what());
    }
    if (scenario.value("schema_version", 0) != kSchemaVersion) {
        throw std::runtime_error("scenario: schema_version must be 1");
    }

    const std::filesystem::path base_dir = std::filesystem::path(scenario_path).parent_path();
    json results = run_scenario(scenario, seed, base_dir);

    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "simulate";
    doc["seed"] = seed;
    doc["scenario"] = scenario;
    doc["results"] = results;
    if (format == "csv") {
        std::vector<std::vector<std::string>> rows;
        if (results.contains("risk")) {
            rows.push_back({results["procedure"].get<std::string>(),
                            format_double(results["risk"]["estimate"].get<double>()),
                            format_double(results["risk"]["std_error"].get<double>()),
                            std::to_string(results["risk"]["replications"].get<std::size_t>()),
                            results.contains("bound")
                                ? format_double(results["bound"].get<double>())
                                : "",
                            results["verdict"].get<bool>() ? "pass" : "violated"});
        } else {
            rows.push_back({results["procedure"].get<std::string>(), "", "", "", "",
                            results["verdict"].get<bool>() ? "pass" : "violated"});
        }
        write_csv_atomic(output, {"procedure", "estimate", "std_error", "reps", "bound", "verdict"},
                         rows);
        write_json_atomic(output + ".results.json", doc);
    } else {
        write_json_atomic(output, doc);
    }
    std::cout << "simulate: procedure=" << results["procedure"].get<std::string>() << " verdict="
              << (results["verdict"].get<bool>() ? "pass" : "violated") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Selective risk control procedures on CSV inputs"};
    app.require_subcommand(1);

    std::string input, output, suite_path, curve_path, curve_output, scenario_path;
    std::string mode = "parallel";
    std::string format = "csv";
    std::string sim_format = "json";
    double q = 0.1, epsilon = 0.2, delta = 0.3;
    std::uint64_t seed = 0;
    std::optional<std::size_t> fixed_m;

    auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", format, "Output format (default csv)")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* bh = app.add_subcommand("bh", "Step-up rejection on a p-value CSV");
    bh->add_option("--input", input, "CSV with column p")->required();
    bh->add_option("--q", q, "Target FDR level")->required();
    bh->add_option("--output", output, "Rejection output path")->required();
    add_format(bh);

    auto* byit = app.add_subcommand("by-iterate",
                                    "Iterated one-sided confidence steps on a z-score CSV");
    byit->add_option("--input", input, "CSV with column x")->required();
    byit->add_option("--q", q, "Target level")->required();
    byit->add_option("--output", output, "Per-iteration interval output path")->required();
    add_format(byit);

    auto* extra = app.add_subcommand("extra-risk", "Run a single configured strategy pair");
    extra->add_option("--suite", suite_path, "Strategy-suite JSON (one pair)")->required();
    extra->add_option("--output", output, "Report JSON path")->required();

    auto* multi = app.add_subcommand("multi-risk", "Run a configured strategy suite");
    multi->add_option("--suite", suite_path, "Strategy-suite JSON")->required();
    multi->add_option("--mode", mode, "Aggregation mode (default parallel)")
        ->check(CLI::IsMember({"parallel", "sequential"}));
    multi->add_option("--output", output, "Report JSON path")->required();

    auto* curve = app.add_subcommand("fdr-curve", "Level-curve controlled rejection");
    curve->add_option("--input", input, "CSV with column x")->required();
    curve->add_option("--curve", curve_path, "Curve config JSON")->required();
    curve->add_option("--output", output, "Rejection output path")->required();
    curve->add_option("--curve-output", curve_output,
                      "Curve table output path (default: <output>.curve.csv)");
    add_format(curve);

    auto* perm = app.add_subcommand("perm-bh", "Permutation-test step-up on observations");
    perm->add_option("--input", input, "CSV with columns task_id, group, value")->required();
    perm->add_option("--q", q, "Target FDR level")->required();
    perm->add_option("--epsilon", epsilon, "Schedule failure budget (default 0.2)");
    perm->add_option("--delta", delta, "Schedule level slack (default 0.3)");
    perm->add_option("--fixed-m", fixed_m, "Fixed permutation count per task (baseline mode)");
    perm->add_option("--seed", seed, "RNG seed (required)")->required();
    perm->add_option("--output", output, "Report JSON path")->required();

    auto* sim = app.add_subcommand("simulate", "Monte Carlo risk verification scenarios");
    sim->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    sim->add_option("--seed", seed, "RNG seed (required)")->required();
    sim->add_option("--output", output, "Results output path")->required();
    sim->add_option("--format", sim_format, "Output format (default json)")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (bh->parsed()) return cmd_bh(input, q, output, format);
        if (byit->parsed()) return cmd_by_iterate(input, q, output, format);
        if (extra->parsed()) return cmd_extra_risk(suite_path, output);
        if (multi->parsed()) return cmd_multi_risk(suite_path, mode, output);
        if (curve->parsed()) return cmd_fdr_curve(input, curve_path, output, curve_output, format);
        if (perm->parsed()) return cmd_perm_bh(input, q, epsilon, delta, seed, fixed_m, output);
        if (sim->parsed()) return cmd_simulate(scenario_path, seed, output, sim_format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
