#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mimictree/dataset.hpp"

namespace mimictree {

/// Counterfactual augmentation: rewrite sampled rows' current action to a
/// fixed target action and let the teacher value the result.
struct AugmentationPlan {
    std::string action_feature; // base name of the action one-hot group
    std::string target_level;   // the action A' written into sampled rows
    double rate = 0.1;          // fraction of dataset rows to sample
    std::optional<std::size_t> count; // absolute count, overrides rate
    std::uint64_t seed = 0;
};

/// Augmented rows plus their provenance. Rows are copies of the source
/// rows with only the lag-0 action one-hot group rewritten; targets are
/// zeroed and must be labeled by the oracle.
struct AugmentedSet {
    Dataset data;
    std::vector<std::size_t> source_rows;
};

/// Samples (with replacement, seeded) rows whose current action differs
/// from the target and rewrites their lag-0 action group to the target.
/// Throws schema_error when the group or level is missing and
/// augment_error when no eligible source rows exist.
AugmentedSet action_replace(const Dataset& data, const AugmentationPlan& plan);

/// Impact of each event: q_t - q_{t-1} within an episode; the first event
/// of an episode scores q_t - first_baseline. Episode ids must form
/// contiguous runs (a resumed id is a data_error). Empty episode_ids means
/// one episode.
std::vector<double> compute_impact(std::span<const double> q,
                                   std::span<const std::int64_t> episode_ids,
                                   double first_baseline = 0.0);

/// Row indices that start an episode (index 0 is always one).
std::vector<std::size_t> episode_starts(std::span<const std::int64_t> episode_ids,
                                        std::size_t rows);

/// Fidelity of mimic predictions against teacher soft labels.
struct FidelityReport {
    double rmse = 0.0;
    double pearson_r = 0.0;
    bool pearson_defined = false; // false when either series is constant
    double null_rmse = 0.0;       // training-mean predictor baseline
    std::size_t n_test = 0;
};

/// rmse = sqrt(mean (pred - soft)^2); Pearson r is flagged undefined (not
/// zero) for constant series; null_rmse applies train_soft_mean as a
/// constant predictor. Lengths must be equal and >= 2.
FidelityReport fidelity(std::span<const double> pred, std::span<const double> soft,
                        double train_soft_mean);

/// Mean of the training targets, the null model's constant prediction.
double null_model_mean(std::span<const double> train_soft);

} // namespace mimictree
