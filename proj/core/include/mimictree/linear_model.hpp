#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mimictree/dataset.hpp"

namespace mimictree {

enum class penalty_norm { l0, l1, l2 };

std::string to_string(penalty_norm norm);

/// Regularization settings for the pruning phase.
struct PruneConfig {
    double lambda = 0.0;
    penalty_norm norm = penalty_norm::l0;
};

/// Linear model held by a leaf: y_hat = w . x + b.
struct LeafModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double residual_loss = 0.0; // sum of squared residuals on the fit rows

    double predict(std::span<const double> row) const;
};

/// Least-squares fit of the target on all feature columns over the given
/// row subset, with a small Tikhonov stabilizer ridge_eps*||w||^2 so that
/// rank-deficient designs (one-hot groups, constant columns) stay solvable.
LeafModel fit_leaf(const Dataset& data, std::span<const std::size_t> rows,
                   double ridge_eps = 1e-8);

/// Complexity penalty R(w): L0 counts weights with |w_i| > 1e-8, L1 sums
/// |w_i|, L2 sums w_i^2. The intercept is never penalized.
double weight_penalty(const LeafModel& model, penalty_norm norm);

/// Regularized node loss  sum_j (y_j - y_hat_j)^2 + lambda * R(w),
/// evaluated for a model fitted on these rows.
double node_loss(const Dataset& data, std::span<const std::size_t> rows,
                 const LeafModel& model, const PruneConfig& cfg);

} // namespace mimictree
