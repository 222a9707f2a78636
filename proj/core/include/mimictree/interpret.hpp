#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mimictree/tree.hpp"

namespace mimictree {

/// Importance (sum of variance reductions over splits using the feature)
/// and frequency (split count) per feature column.
struct ImportanceRow {
    int column = -1;
    std::string name;
    double importance = 0.0;
    std::size_t frequency = 0;
};

/// Rows for every feature that appears in a split, sorted by descending
/// importance. Lagged columns are reported separately; set aggregate_lags
/// to sum all lags of the same base feature into one row. normalized
/// rescales importances to sum to 1.
std::vector<ImportanceRow> feature_importance(const ModelTree& tree,
                                              bool aggregate_lags = false,
                                              bool normalized = false);

std::string importance_tsv(const std::vector<ImportanceRow>& table,
                           std::size_t top_k = 0);

/// One branch condition: x_feature <= threshold (is_upper) or > threshold.
struct RuleCondition {
    int feature = -1;
    bool is_upper = true;
    double threshold = 0.0;
};

/// Conjunction of conditions along one root-to-leaf path, simplified to the
/// tightest bound per feature.
struct Rule {
    int leaf = -1;
    std::vector<RuleCondition> conditions;
    std::size_t n = 0;
    double mean_y = 0.0;
};

struct RuleSelector {
    enum class kind_t { all_leaves, leaf_id, min_n } kind = kind_t::all_leaves;
    int leaf_id = -1;
    std::size_t min_n = 0;

    static RuleSelector all() { return {}; }
    static RuleSelector leaf(int id);
    static RuleSelector with_min_n(std::size_t n);
};

/// One rule per selected leaf. Over all leaves the rules partition the
/// input space: every finite row satisfies exactly one.
std::vector<Rule> extract_rules(const ModelTree& tree, const RuleSelector& selector = {});

bool rule_matches(const Rule& rule, std::span<const double> row);

/// Human-readable form, thresholds at 4 significant digits.
std::string format_rule(const ModelTree& tree, const Rule& rule);

/// Graphviz DOT document for the tree. Subtrees below depth_limit collapse
/// into summary leaves. Deterministic for a fixed tree.
std::string export_graph(const ModelTree& tree, std::optional<int> depth_limit = {});

} // namespace mimictree
