#include "mimictree/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "mimictree/errors.hpp"

namespace mimictree {

namespace {

std::string sig4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string strip_lag_tag(const std::string& name) {
    const auto pos = name.rfind(" (t");
    if (pos != std::string::npos && name.back() == ')') return name.substr(0, pos);
    return name;
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

} // namespace

std::vector<ImportanceRow> feature_importance(const ModelTree& tree, bool aggregate_lags,
                                              bool normalized) {
    const auto& names = tree.feature_names();
    std::vector<double> importance(names.size(), 0.0);
    std::vector<std::size_t> frequency(names.size(), 0);
    double total = 0.0;
    for (const Node& n : tree.nodes()) {
        if (n.is_leaf) continue;
        importance[static_cast<std::size_t>(n.feature)] += n.variance_reduction;
        frequency[static_cast<std::size_t>(n.feature)] += 1;
        total += n.variance_reduction;
    }

    std::vector<ImportanceRow> rows;
    if (aggregate_lags) {
        std::map<std::string, ImportanceRow> grouped;
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (frequency[j] == 0) continue;
            const std::string base = strip_lag_tag(names[j]);
            auto& row = grouped[base];
            row.column = row.column < 0 ? static_cast<int>(j) : row.column;
            row.name = base;
            row.importance += importance[j];
            row.frequency += frequency[j];
        }
        for (auto& [base, row] : grouped) rows.push_back(row);
    } else {
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (frequency[j] == 0) continue;
            rows.push_back({static_cast<int>(j), names[j], importance[j], frequency[j]});
        }
    }
    if (normalized && total > 0.0) {
        for (auto& row : rows) row.importance /= total;
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ImportanceRow& a, const ImportanceRow& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.column < b.column;
    });
    return rows;
}

std::string importance_tsv(const std::vector<ImportanceRow>& table, std::size_t top_k) {
    std::ostringstream out;
    out << "feature\timportance\tfrequency\n";
    std::size_t emitted = 0;
    for (const auto& row : table) {
        if (top_k > 0 && emitted >= top_k) break;
        out << row.name << '\t' << full_precision(row.importance) << '\t' << row.frequency
            << '\n';
        ++emitted;
    }
    return out.str();
}

RuleSelector RuleSelector::leaf(int id) {
    RuleSelector s;
    s.kind = kind_t::leaf_id;
    s.leaf_id = id;
    return s;
}

RuleSelector RuleSelector::with_min_n(std::size_t n) {
    RuleSelector s;
    s.kind = kind_t::min_n;
    s.min_n = n;
    return s;
}

std::vector<Rule> extract_rules(const ModelTree& tree, const RuleSelector& selector) {
    std::vector<Rule> rules;
    std::vector<RuleCondition> path;

    std::function<void(int)> walk = [&](int id) {
        const Node& node = tree.nodes()[static_cast<std::size_t>(id)];
        if (node.is_leaf) {
            if (selector.kind == RuleSelector::kind_t::leaf_id && id != selector.leaf_id) return;
            if (selector.kind == RuleSelector::kind_t::min_n && node.n < selector.min_n) return;

            // Keep only the tightest bound per (feature, side), in path order.
            Rule rule;
            rule.leaf = id;
            rule.n = node.n;
            rule.mean_y = node.mean_y;
            std::map<std::pair<int, bool>, double> tightest;
            for (const auto& c : path) {
                auto key = std::make_pair(c.feature, c.is_upper);
                auto it = tightest.find(key);
                if (it == tightest.end()) {
                    tightest[key] = c.threshold;
                } else if (c.is_upper ? c.threshold < it->second : c.threshold > it->second) {
                    it->second = c.threshold;
                }
            }
            std::map<std::pair<int, bool>, bool> emitted;
            for (const auto& c : path) {
                auto key = std::make_pair(c.feature, c.is_upper);
                if (emitted[key]) continue;
                if (c.threshold == tightest[key]) {
                    rule.conditions.push_back(c);
                    emitted[key] = true;
                }
            }
            rules.push_back(std::move(rule));
            return;
        }
        path.push_back({node.feature, true, node.threshold});
        walk(node.left);
        path.back() = {node.feature, false, node.threshold};
        walk(node.right);
        path.pop_back();
    };
    if (tree.root() >= 0) walk(tree.root());
    return rules;
}

bool rule_matches(const Rule& rule, std::span<const double> row) {
    for (const auto& c : rule.conditions) {
        const double v = row[static_cast<std::size_t>(c.feature)];
        if (c.is_upper ? !(v <= c.threshold) : !(v > c.threshold)) return false;
    }
    return true;
}

std::string format_rule(const ModelTree& tree, const Rule& rule) {
    std::ostringstream out;
    out << "IF ";
    if (rule.conditions.empty()) out << "true";
    for (std::size_t i = 0; i < rule.conditions.size(); ++i) {
        const auto& c = rule.conditions[i];
        if (i > 0) out << " AND ";
        out << tree.feature_names()[static_cast<std::size_t>(c.feature)]
            << (c.is_upper ? " <= " : " > ") << sig4(c.threshold);
    }
    const Node& leaf = tree.nodes()[static_cast<std::size_t>(rule.leaf)];
    out << " THEN leaf " << rule.leaf << " (n=" << rule.n << ", mean=" << sig4(rule.mean_y)
        << ", intercept=" << sig4(leaf.model.intercept) << ")";
    return out.str();
}

std::string export_graph(const ModelTree& tree, std::optional<int> depth_limit) {
    std::ostringstream out;
    out << "digraph model_tree {\n";
    out << "  graph [rankdir=TB];\n";
    out << "  node [shape=box];\n";

    std::function<void(int, int)> walk = [&](int id, int depth) {
        const Node& node = tree.nodes()[static_cast<std::size_t>(id)];
        const bool truncate = !node.is_leaf && depth_limit && depth >= *depth_limit;
        if (node.is_leaf || truncate) {
            out << "  n" << id << " [label=\"" << (truncate ? "..." : "leaf") << "\\nn="
                << node.n << " mean=" << sig4(node.mean_y) << "\"];\n";
            return;
        }
        out << "  n" << id << " [label=\""
            << dot_escape(tree.feature_names()[static_cast<std::size_t>(node.feature)])
            << " <= " << sig4(node.threshold) << "\\nn=" << node.n << " mean="
            << sig4(node.mean_y) << "\"];\n";
        out << "  n" << id << " -> n" << node.left << " [label=\"yes\"];\n";
        out << "  n" << id << " -> n" << node.right << " [label=\"no\"];\n";
        walk(node.left, depth + 1);
        walk(node.right, depth + 1);
    };
    if (tree.root() >= 0) walk(tree.root(), 0);
    out << "}\n";
    return out.str();
}

} // namespace mimictree
