#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mimictree/breakpoint.hpp"
#include "mimictree/dataset.hpp"
#include "mimictree/linear_model.hpp"

namespace mimictree {

enum class split_heuristic { variance, ttest, segmented, gmm };

std::string to_string(split_heuristic h);
split_heuristic split_heuristic_from_string(const std::string& name);

struct GrowthConfig {
    split_heuristic heuristic = split_heuristic::variance;
    std::size_t min_leaf = 100;   // m: least records per child
    int max_depth = 12;
    std::size_t max_nodes = 200000; // hard cap against pathological growth
    std::uint64_t seed = 0;
    double ridge_eps = 1e-8;
    int threads = 0; // 0 = hardware concurrency
    SegmentedConfig segmented;
    GmmConfig gmm; // per-node seeds are derived from `seed`
};

/// Tree node stored in the arena. Internal nodes carry the split, leaves
/// carry the linear model; both keep count and target mean.
struct Node {
    bool is_leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::size_t n = 0;
    double mean_y = 0.0;
    double variance_reduction = 0.0; // > 0 on every retained split
    LeafModel model;                 // leaves only
};

/// Binary linear model tree: internal nodes threshold one feature
/// (x <= c goes left), leaves predict with a least-squares linear model.
class ModelTree {
public:
    ModelTree() = default;

    double predict_row(std::span<const double> row) const;
    std::vector<double> predict(const Dataset& data) const;

    /// Leaf node id the row is routed to.
    int leaf_for(std::span<const double> row) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return root_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const;
    int depth() const;

    std::uint64_t schema_fingerprint() const { return fingerprint_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const GrowthConfig& growth_config() const { return growth_; }
    const PruneConfig& prune_config() const { return prune_; }

    /// Count of per-feature heuristic failures tolerated during growth.
    std::size_t heuristic_failures() const { return heuristic_failures_; }

    /// Versioned self-describing JSON document; save -> load round-trips
    /// bit-exact predictions.
    std::string to_json_string() const;
    static ModelTree from_json_string(const std::string& text);
    void save(const std::string& path) const;
    static ModelTree load(const std::string& path);

private:
    std::vector<Node> nodes_;
    int root_ = -1;
    std::uint64_t fingerprint_ = 0;
    std::vector<std::string> feature_names_;
    GrowthConfig growth_;
    PruneConfig prune_;
    std::size_t heuristic_failures_ = 0;

    void check_row(std::span<const double> row) const;

    friend ModelTree grow(const Dataset&, const GrowthConfig&);
    friend ModelTree prune(const ModelTree&, const Dataset&, const PruneConfig&);
};

/// Grows the tree by recursive splitting: at each node every feature
/// contributes at most one candidate from the configured heuristic and the
/// largest weighted variance reduction wins (ties to the lower feature
/// index). Splits must leave >= min_leaf records on each side; leaves get
/// least-squares linear models. Deterministic for a fixed config.
ModelTree grow(const Dataset& train, const GrowthConfig& cfg);

/// Bottom-up regularized pruning: a parent of two leaves is refitted on its
/// own records and collapses iff E_parent < E_left + E_right, where E is
/// the node_loss under cfg. Repeats to fixpoint; never increases the node
/// count. The dataset must match the tree's schema fingerprint.
ModelTree prune(const ModelTree& tree, const Dataset& train, const PruneConfig& cfg);

} // namespace mimictree
