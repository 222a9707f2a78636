#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mimictree {

/// A candidate threshold c on one feature, produced by a breakpoint
/// heuristic. `score` is the heuristic's own figure of merit;
/// `variance_reduction` is the uniform criterion the tree grower compares
/// across features.
struct SplitCandidate {
    int feature_index = -1;
    double threshold = 0.0;
    double score = 0.0;
    double variance_reduction = 0.0;
    std::size_t left_count = 0;
    std::size_t right_count = 0;
};

/// Scores at one sweep boundary, exposed so tests can compare the
/// incremental single-pass statistics against direct recomputation.
struct SweepPoint {
    double threshold = 0.0;
    std::size_t left_count = 0;
    double variance_reduction = 0.0;
    double t_abs = 0.0;
};

/// Every boundary the sorted sweep visits (positions m..N-m between
/// distinct x values), with both incremental scores.
std::vector<SweepPoint> sweep_scores(std::span<const double> x, std::span<const double> y,
                                     std::size_t m);

/// Running y moments over rows sorted by x; entry k holds the sums of the
/// first k+1 sorted records. The final entry matches the whole-column
/// totals. This is the single pass behind the sweep heuristics.
struct PrefixMoments {
    std::vector<double> sum_y;
    std::vector<double> sum_y2;
};

PrefixMoments prefix_moments(std::span<const double> x, std::span<const double> y);

/// Sorting + variance reduction: sorts by x once, sweeps all distinct-value
/// midpoints with running sums of y and y^2, and returns the threshold with
/// the greatest weighted reduction in population y-variance. Returns
/// nullopt when no split has strictly positive reduction or N < 2m.
/// Score ties break toward the threshold closest to the median of x.
std::optional<SplitCandidate> best_split_variance(std::span<const double> x,
                                                  std::span<const double> y, std::size_t m);

/// Sorting + Welch's t: the same sweep scored by |t| with sample (n-1)
/// variances. Group variances are floored at 1e-12 * Var(y) so constant
/// groups cannot produce infinite scores.
std::optional<SplitCandidate> best_split_ttest(std::span<const double> x,
                                               std::span<const double> y, std::size_t m);

/// One iteratively refitted segmented (broken-line) regression of y on x.
struct SegmentedFit {
    double intercept = 0.0;
    double alpha = 0.0; // slope of the left segment
    double beta = 0.0;  // slope change past the breakpoint
    double gamma = 0.0; // breakpoint-gap term driving the update
    double breakpoint = 0.0;
    std::vector<double> trajectory; // breakpoint per iteration, c0 first
    int iterations = 0;
    bool converged = false;
    bool ridge_flagged = false; // normal equations needed a ridge jitter
};

struct SegmentedConfig {
    double tol_scale = 1e-4; // tol = tol_scale * range(x)
    int max_iters = 30;
    // Score candidates by |Var(left) - Var(right)| instead of weighted
    // variance reduction (the literal selection-rule reading).
    bool score_by_variance_gap = false;
};

/// Iterative breakpoint estimation: each step fits
///   y_hat = b + alpha*x + beta*max(x - c, 0) + gamma*(-1[x > c])
/// and updates c <- c + gamma/beta until |delta c| <= tol or max_iters.
/// The breakpoint is clamped to [min(x), max(x)].
SegmentedFit fit_segmented(std::span<const double> x, std::span<const double> y, double c0,
                           double tol, int max_iters);

/// Runs fit_segmented from c0 = median(x), clamps the breakpoint into the
/// [m, N-m] sorted range, and scores it. Returns nullopt when the scored
/// reduction is not strictly positive.
std::optional<SplitCandidate> best_split_segmented(std::span<const double> x,
                                                   std::span<const double> y, std::size_t m,
                                                   const SegmentedConfig& cfg = {});

/// Two-component bivariate Gaussian mixture fitted on (x, y) pairs.
struct GaussianMixtureFit {
    double weight[2] = {0.5, 0.5};
    double mean_x[2] = {0.0, 0.0};
    double mean_y[2] = {0.0, 0.0};
    // Covariance entries per component: xx, xy, yy.
    double cov_xx[2] = {1.0, 1.0};
    double cov_xy[2] = {0.0, 0.0};
    double cov_yy[2] = {1.0, 1.0};
    double boundary = 0.0;
    int iterations = 0;
    bool degenerate = false;
    std::string diagnostic;
};

struct GmmConfig {
    int max_em_iters = 100;
    double tol = 1e-8; // relative log-likelihood change
    std::uint64_t seed = 0;
};

/// EM fit of the mixture on internally standardized (x, y); the threshold
/// is the equal-posterior point of the two components restricted to the
/// x-marginal, solved in closed form from the quadratic discriminant. Of
/// two real roots the one between the component means is taken. The
/// candidate is scored by variance reduction at that threshold. Degenerate
/// fits (a component repeatedly collapsing onto the covariance floor)
/// return nullopt with a diagnostic in fit_out.
std::optional<SplitCandidate> best_split_gmm(std::span<const double> x,
                                             std::span<const double> y, std::size_t m,
                                             const GmmConfig& cfg = {},
                                             GaussianMixtureFit* fit_out = nullptr);

} // namespace mimictree
