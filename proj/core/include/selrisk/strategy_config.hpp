#pragma once

#include <string>
#include <vector>

#include "selrisk/multirisk.hpp"

namespace selrisk {

/// A strategy suite assembled from a declarative JSON config.
///
/// Config shape (schema_version 1):
///   { "schema_version": 1,
///     "pairs": [ { "kind": "...", "q": 0.1, "input": "data.csv", ... } ] }
///
/// Supported kinds and their inputs:
///   threshold            column p; optional "adjustment": "independent" | "harmonic"
///   balance              columns p, category (1 or 2); "gamma" > 1
///   group_fwe            columns task_id, p; "method": "bonferroni" | "holm"
///   directional          column p (the per-task sign p-value)
///   partial_conjunction  columns task_id, p (row order inside a task is the
///                        conjunction order k = 1, 2, ...)
///
/// Relative input paths resolve against the config file's directory.
/// Task order is row order (threshold-style kinds) or order of first
/// appearance of task_id (grouped kinds); all pairs must agree on m.
struct LoadedSuite {
    StrategySuite suite;
    std::size_t task_count = 0;
    std::vector<std::string> task_labels;
};

LoadedSuite load_suite_config(const std::string& config_path);

}  // namespace selrisk
