#include "mimictree/breakpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mimictree/errors.hpp"

namespace mimictree {

namespace {

struct XY {
    double x;
    double y;
};

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<XY> gather_sorted(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw data_error("x and y lengths differ");
    std::vector<XY> xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw data_error("non-finite value at row " + std::to_string(i));
        xy[i] = {x[i], y[i]};
    }
    std::sort(xy.begin(), xy.end(),
              [](const XY& a, const XY& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    return xy;
}

double median_of_sorted(const std::vector<XY>& xy) {
    const std::size_t n = xy.size();
    if (n % 2 == 1) return xy[n / 2].x;
    return 0.5 * (xy[n / 2 - 1].x + xy[n / 2].x);
}

double pop_variance(double sum, double sumsq, std::size_t n) {
    const double nn = static_cast<double>(n);
    const double mean = sum / nn;
    return sumsq / nn - mean * mean;
}

// n-1 convention; groups of one observation carry zero spread.
double sample_variance(double sum, double sumsq, std::size_t n) {
    if (n < 2) return 0.0;
    const double mean = sum / static_cast<double>(n);
    return (sumsq - mean * sum) / static_cast<double>(n - 1);
}

/// Single left-to-right pass: running sums of y and y^2 are updated at every
/// sorted position; fn fires at each admissible boundary (left count in
/// [m, n-m], distinct neighboring x) with the cumulative left moments.
template <class Fn>
void sweep(const std::vector<XY>& xy, std::size_t m, Fn&& fn) {
    const std::size_t n = xy.size();
    double lsum = 0.0;
    double lsumsq = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double yv = xy[k - 1].y;
        lsum += yv;
        lsumsq += yv * yv;
        if (k < m || n - k < m) continue;
        if (!(xy[k - 1].x < xy[k].x)) continue;
        fn(k, 0.5 * (xy[k - 1].x + xy[k].x), lsum, lsumsq);
    }
}

struct Totals {
    double sum = 0.0;
    double sumsq = 0.0;
};

Totals totals_in_sweep_order(const std::vector<XY>& xy) {
    Totals t;
    for (const XY& p : xy) {
        t.sum += p.y;
        t.sumsq += p.y * p.y;
    }
    return t;
}

double reduction_at(const Totals& t, double lsum, double lsumsq, std::size_t k, std::size_t n) {
    const double var_parent = pop_variance(t.sum, t.sumsq, n);
    const double var_l = pop_variance(lsum, lsumsq, k);
    const double var_r = pop_variance(t.sum - lsum, t.sumsq - lsumsq, n - k);
    const double nn = static_cast<double>(n);
    return var_parent -
           (static_cast<double>(k) / nn * var_l + static_cast<double>(n - k) / nn * var_r);
}

double welch_t_at(const Totals& t, double lsum, double lsumsq, std::size_t k, std::size_t n,
                  double var_floor) {
    const std::size_t nr = n - k;
    const double mu1 = lsum / static_cast<double>(k);
    const double mu2 = (t.sum - lsum) / static_cast<double>(nr);
    const double v1 = std::max(sample_variance(lsum, lsumsq, k), var_floor);
    const double v2 = std::max(sample_variance(t.sum - lsum, t.sumsq - lsumsq, nr), var_floor);
    const double denom = std::sqrt(v1 / static_cast<double>(k) + v2 / static_cast<double>(nr));
    if (denom == 0.0) return 0.0; // all-constant target
    return std::abs(mu1 - mu2) / denom;
}

struct BestBoundary {
    bool found = false;
    double score = -std::numeric_limits<double>::infinity();
    double threshold = 0.0;
    std::size_t left = 0;
    double lsum = 0.0;
    double lsumsq = 0.0;
    double median_dist = 0.0;

    void offer(double s, double thr, std::size_t k, double ls, double lss, double median) {
        const double dist = std::abs(thr - median);
        if (!found || s > score || (s == score && dist < median_dist)) {
            found = true;
            score = s;
            threshold = thr;
            left = k;
            lsum = ls;
            lsumsq = lss;
            median_dist = dist;
        }
    }
};

/// Places an estimator-produced breakpoint onto the data: clamps the left
/// count into [m, n-m] and keeps the exact value whenever it already lies
/// strictly between min(x) and max(x); otherwise snaps to the nearest valid
/// distinct-value midpoint. Returns false when no admissible position exists.
bool place_threshold(const std::vector<XY>& xy, std::size_t m, double c, double& threshold,
                     std::size_t& left_count) {
    const std::size_t n = xy.size();
    std::size_t k = 0;
    while (k < n && xy[k].x <= c) ++k;

    auto boundary_ok = [&](std::size_t j) {
        return j >= m && j <= n - m && xy[j - 1].x < xy[j].x;
    };
    auto snap = [&](std::size_t from, bool forward) -> bool {
        std::size_t j = from;
        while (j >= m && j <= n - m) {
            if (boundary_ok(j)) {
                threshold = 0.5 * (xy[j - 1].x + xy[j].x);
                left_count = j;
                return true;
            }
            if (forward) {
                ++j;
            } else {
                if (j == m) break;
                --j;
            }
        }
        return false;
    };

    if (k < m) return snap(m, true);
    if (k > n - m) return snap(n - m, false);
    if (!(c > xy.front().x) || !(c < xy.back().x)) {
        // Degenerate placement at the data boundary; use the nearest
        // interior midpoint instead.
        return k <= n / 2 ? snap(std::max(k, m), true) : snap(std::min(k, n - m), false);
    }
    threshold = c;
    left_count = k;
    return true;
}

std::optional<SplitCandidate> candidate_from_placement(const std::vector<XY>& xy, std::size_t m,
                                                       double c, double heuristic_score) {
    double threshold = 0.0;
    std::size_t k = 0;
    if (!place_threshold(xy, m, c, threshold, k)) return std::nullopt;

    const Totals t = totals_in_sweep_order(xy);
    double lsum = 0.0;
    double lsumsq = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        lsum += xy[i].y;
        lsumsq += xy[i].y * xy[i].y;
    }
    const double red = reduction_at(t, lsum, lsumsq, k, xy.size());
    if (!(red > 0.0)) return std::nullopt;

    SplitCandidate cand;
    cand.threshold = threshold;
    cand.score = heuristic_score;
    cand.variance_reduction = red;
    cand.left_count = k;
    cand.right_count = xy.size() - k;
    return cand;
}

} // namespace

PrefixMoments prefix_moments(std::span<const double> x, std::span<const double> y) {
    const auto xy = gather_sorted(x, y);
    PrefixMoments out;
    out.sum_y.reserve(xy.size());
    out.sum_y2.reserve(xy.size());
    double s = 0.0;
    double s2 = 0.0;
    for (const XY& p : xy) {
        s += p.y;
        s2 += p.y * p.y;
        out.sum_y.push_back(s);
        out.sum_y2.push_back(s2);
    }
    return out;
}

std::vector<SweepPoint> sweep_scores(std::span<const double> x, std::span<const double> y,
                                     std::size_t m) {
    std::vector<SweepPoint> out;
    if (m < 1 || x.size() < 2 * m) return out;
    const auto xy = gather_sorted(x, y);
    const Totals t = totals_in_sweep_order(xy);
    const double var_floor = 1e-12 * pop_variance(t.sum, t.sumsq, xy.size());
    sweep(xy, m, [&](std::size_t k, double thr, double lsum, double lsumsq) {
        out.push_back({thr, k, reduction_at(t, lsum, lsumsq, k, xy.size()),
                       welch_t_at(t, lsum, lsumsq, k, xy.size(), var_floor)});
    });
    return out;
}

std::optional<SplitCandidate> best_split_variance(std::span<const double> x,
                                                  std::span<const double> y, std::size_t m) {
    if (m < 1 || x.size() < 2 * m) return std::nullopt;
    const auto xy = gather_sorted(x, y);
    const Totals t = totals_in_sweep_order(xy);
    const double median = median_of_sorted(xy);

    BestBoundary best;
    sweep(xy, m, [&](std::size_t k, double thr, double lsum, double lsumsq) {
        best.offer(reduction_at(t, lsum, lsumsq, k, xy.size()), thr, k, lsum, lsumsq, median);
    });
    if (!best.found || !(best.score > 0.0)) return std::nullopt;

    SplitCandidate cand;
    cand.threshold = best.threshold;
    cand.score = best.score;
    cand.variance_reduction = best.score;
    cand.left_count = best.left;
    cand.right_count = xy.size() - best.left;
    return cand;
}

std::optional<SplitCandidate> best_split_ttest(std::span<const double> x,
                                               std::span<const double> y, std::size_t m) {
    if (m < 1 || x.size() < 2 * m) return std::nullopt;
    const auto xy = gather_sorted(x, y);
    const Totals t = totals_in_sweep_order(xy);
    const double var_floor = 1e-12 * pop_variance(t.sum, t.sumsq, xy.size());
    const double median = median_of_sorted(xy);

    BestBoundary best;
    sweep(xy, m, [&](std::size_t k, double thr, double lsum, double lsumsq) {
        best.offer(welch_t_at(t, lsum, lsumsq, k, xy.size(), var_floor), thr, k, lsum, lsumsq,
                   median);
    });
    if (!best.found) return std::nullopt;

    const double red = reduction_at(t, best.lsum, best.lsumsq, best.left, xy.size());
    if (!(red > 0.0)) return std::nullopt;

    SplitCandidate cand;
    cand.threshold = best.threshold;
    cand.score = best.score;
    cand.variance_reduction = red;
    cand.left_count = best.left;
    cand.right_count = xy.size() - best.left;
    return cand;
}

SegmentedFit fit_segmented(std::span<const double> x, std::span<const double> y, double c0,
                           double tol, int max_iters) {
    if (x.size() != y.size()) throw data_error("x and y lengths differ");
    if (x.size() < 3) throw data_error("segmented regression needs at least 3 points");
    const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *min_it;
    const double hi = *max_it;
    if (!(lo < hi)) throw data_error("segmented regression needs >= 2 distinct x values");

    SegmentedFit fit;
    double c = std::clamp(c0, lo, hi);
    fit.trajectory.push_back(c);

    const std::size_t n = x.size();
    for (int iter = 0; iter < max_iters; ++iter) {
        Eigen::Matrix4d normal = Eigen::Matrix4d::Zero();
        Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double u = x[i] > c ? x[i] - c : 0.0;
            const double v = x[i] > c ? -1.0 : 0.0;
            const Eigen::Vector4d z(1.0, x[i], u, v);
            normal.selfadjointView<Eigen::Lower>().rankUpdate(z);
            rhs += z * y[i];
        }
        Eigen::Matrix4d full = normal.selfadjointView<Eigen::Lower>();
        Eigen::Vector4d coef = full.ldlt().solve(rhs);
        if (!coef.allFinite()) {
            full.diagonal().array() += 1e-8;
            coef = full.ldlt().solve(rhs);
            fit.ridge_flagged = true;
        }

        fit.intercept = coef[0];
        fit.alpha = coef[1];
        fit.beta = coef[2];
        fit.gamma = coef[3];
        fit.iterations = iter + 1;

        if (std::abs(fit.beta) < 1e-12) {
            fit.converged = false;
            fit.breakpoint = c;
            return fit;
        }
        const double next = std::clamp(c + fit.gamma / fit.beta, lo, hi);
        const double delta = std::abs(next - c);
        c = next;
        fit.trajectory.push_back(c);
        if (delta <= tol) {
            fit.converged = true;
            break;
        }
    }
    fit.breakpoint = c;
    return fit;
}

std::optional<SplitCandidate> best_split_segmented(std::span<const double> x,
                                                   std::span<const double> y, std::size_t m,
                                                   const SegmentedConfig& cfg) {
    if (m < 1 || x.size() < 2 * m || x.size() < 3) return std::nullopt;
    const auto xy = gather_sorted(x, y);
    if (!(xy.front().x < xy.back().x)) return std::nullopt;

    const double range = xy.back().x - xy.front().x;
    const double c0 = median_of_sorted(xy);
    const SegmentedFit fit = fit_segmented(x, y, c0, cfg.tol_scale * range, cfg.max_iters);
    // A vanishing slope change means the data shows no breakpoint at all
    // (pure line); such aborted fits contribute no candidate.
    if (!fit.converged && std::abs(fit.beta) < 1e-12) return std::nullopt;

    double heuristic_score = 0.0;
    auto cand = candidate_from_placement(xy, m, fit.breakpoint, heuristic_score);
    if (!cand) return std::nullopt;

    if (cfg.score_by_variance_gap) {
        // Literal selection-rule reading: |Var(left) - Var(right)|.
        const Totals t = totals_in_sweep_order(xy);
        double lsum = 0.0;
        double lsumsq = 0.0;
        for (std::size_t i = 0; i < cand->left_count; ++i) {
            lsum += xy[i].y;
            lsumsq += xy[i].y * xy[i].y;
        }
        cand->score = std::abs(pop_variance(lsum, lsumsq, cand->left_count) -
                               pop_variance(t.sum - lsum, t.sumsq - lsumsq, cand->right_count));
    } else {
        cand->score = cand->variance_reduction;
    }
    return cand;
}

namespace {

struct Gaussian2 {
    double w = 0.5;
    double mx = 0.0;
    double my = 0.0;
    double sxx = 1.0;
    double sxy = 0.0;
    double syy = 1.0;
};

// Floors both eigenvalues of the 2x2 covariance at eps; returns true when
// flooring changed the matrix.
bool floor_covariance(Gaussian2& g, double eps) {
    const double tr = g.sxx + g.syy;
    const double det = g.sxx * g.syy - g.sxy * g.sxy;
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    const double l1 = tr / 2.0 + disc;
    const double l2 = tr / 2.0 - disc;
    if (l2 >= eps && l1 >= eps) return false;

    // Eigenvectors of a symmetric 2x2.
    double vx;
    double vy;
    if (std::abs(g.sxy) > 1e-300) {
        vx = l1 - g.syy;
        vy = g.sxy;
    } else {
        vx = g.sxx >= g.syy ? 1.0 : 0.0;
        vy = g.sxx >= g.syy ? 0.0 : 1.0;
    }
    const double norm = std::hypot(vx, vy);
    if (norm > 0) {
        vx /= norm;
        vy /= norm;
    }
    const double e1 = std::max(l1, eps);
    const double e2 = std::max(l2, eps);
    // Reassemble from the (floored) spectral form.
    g.sxx = e1 * vx * vx + e2 * vy * vy;
    g.sxy = (e1 - e2) * vx * vy;
    g.syy = e1 * vy * vy + e2 * vx * vx;
    return true;
}

double log_density(const Gaussian2& g, double x, double y) {
    const double det = g.sxx * g.syy - g.sxy * g.sxy;
    const double dx = x - g.mx;
    const double dy = y - g.my;
    const double quad = (g.syy * dx * dx - 2.0 * g.sxy * dx * dy + g.sxx * dy * dy) / det;
    return -std::log(2.0 * M_PI) - 0.5 * std::log(det) - 0.5 * quad;
}

} // namespace

std::optional<SplitCandidate> best_split_gmm(std::span<const double> x, std::span<const double> y,
                                             std::size_t m, const GmmConfig& cfg,
                                             GaussianMixtureFit* fit_out) {
    if (m < 1 || x.size() < 2 * m || x.size() < 4) return std::nullopt;
    const auto xy = gather_sorted(x, y);
    const std::size_t n = xy.size();

    auto fail = [&](const std::string& why) -> std::optional<SplitCandidate> {
        if (fit_out) {
            fit_out->degenerate = true;
            fit_out->diagnostic = why;
        }
        return std::nullopt;
    };

    // The mixture is fit on standardized (x, y) so covariances and the
    // floor are scale-free.
    double mx = 0.0;
    double my = 0.0;
    for (const XY& p : xy) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double vx = 0.0;
    double vy = 0.0;
    for (const XY& p : xy) {
        vx += (p.x - mx) * (p.x - mx);
        vy += (p.y - my) * (p.y - my);
    }
    const double sx = std::sqrt(vx / static_cast<double>(n));
    const double sy = std::sqrt(vy / static_cast<double>(n));
    if (sx <= 0.0) return fail("x column is constant");
    if (sy <= 0.0) return fail("y column is constant");

    std::vector<double> zx(n);
    std::vector<double> zy(n);
    for (std::size_t i = 0; i < n; ++i) {
        zx[i] = (xy[i].x - mx) / sx;
        zy[i] = (xy[i].y - my) / sy;
    }

    // Seeded k-means-style initialization: two random distinct centers,
    // a few Lloyd rounds, then per-cluster Gaussian moments.
    std::uint64_t rng = cfg.seed + 0x6d696d6963ULL;
    std::size_t i1 = static_cast<std::size_t>(splitmix64(rng) % n);
    std::size_t i2 = i1;
    for (int tries = 0; tries < 64 && (i2 == i1 || (zx[i2] == zx[i1] && zy[i2] == zy[i1]));
         ++tries) {
        i2 = static_cast<std::size_t>(splitmix64(rng) % n);
    }
    double cx[2] = {zx[i1], zx[i2]};
    double cy[2] = {zy[i1], zy[i2]};
    std::vector<std::uint8_t> assign(n, 0);
    for (int round = 0; round < 15; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d0 = (zx[i] - cx[0]) * (zx[i] - cx[0]) + (zy[i] - cy[0]) * (zy[i] - cy[0]);
            const double d1 = (zx[i] - cx[1]) * (zx[i] - cx[1]) + (zy[i] - cy[1]) * (zy[i] - cy[1]);
            assign[i] = d1 < d0 ? 1 : 0;
        }
        double sx2[2] = {0, 0};
        double sy2[2] = {0, 0};
        std::size_t cnt[2] = {0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            sx2[assign[i]] += zx[i];
            sy2[assign[i]] += zy[i];
            ++cnt[assign[i]];
        }
        for (int k = 0; k < 2; ++k) {
            if (cnt[k] == 0) {
                const std::size_t pick = static_cast<std::size_t>(splitmix64(rng) % n);
                cx[k] = zx[pick];
                cy[k] = zy[pick];
            } else {
                cx[k] = sx2[k] / static_cast<double>(cnt[k]);
                cy[k] = sy2[k] / static_cast<double>(cnt[k]);
            }
        }
    }

    constexpr double kCovFloor = 1e-6;
    Gaussian2 comp[2];
    {
        double wsum[2] = {0, 0};
        for (std::size_t i = 0; i < n; ++i) wsum[assign[i]] += 1.0;
        for (int k = 0; k < 2; ++k) {
            Gaussian2& g = comp[k];
            g.w = std::max(wsum[k] / static_cast<double>(n), 1e-3);
            double sxk = 0;
            double syk = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (assign[i] != k) continue;
                sxk += zx[i];
                syk += zy[i];
            }
            const double c = std::max(wsum[k], 1.0);
            g.mx = wsum[k] > 0 ? sxk / c : cx[k];
            g.my = wsum[k] > 0 ? syk / c : cy[k];
            double axx = 0;
            double axy = 0;
            double ayy = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (assign[i] != k) continue;
                const double dx = zx[i] - g.mx;
                const double dy = zy[i] - g.my;
                axx += dx * dx;
                axy += dx * dy;
                ayy += dy * dy;
            }
            g.sxx = axx / c;
            g.sxy = axy / c;
            g.syy = ayy / c;
            floor_covariance(g, kCovFloor);
        }
        const double wtot = comp[0].w + comp[1].w;
        comp[0].w /= wtot;
        comp[1].w /= wtot;
    }

    std::vector<double> resp(n);
    double prev_ll = -std::numeric_limits<double>::infinity();
    int floored_streak[2] = {0, 0};
    int iterations = 0;
    for (int iter = 0; iter < cfg.max_em_iters; ++iter) {
        iterations = iter + 1;
        // E-step.
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double l0 = std::log(comp[0].w) + log_density(comp[0], zx[i], zy[i]);
            const double l1 = std::log(comp[1].w) + log_density(comp[1], zx[i], zy[i]);
            const double mx2 = std::max(l0, l1);
            const double p0 = std::exp(l0 - mx2);
            const double p1 = std::exp(l1 - mx2);
            resp[i] = p0 / (p0 + p1);
            ll += mx2 + std::log(p0 + p1);
        }
        // M-step.
        bool degenerate = false;
        for (int k = 0; k < 2; ++k) {
            double wk = 0;
            double sxk = 0;
            double syk = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = k == 0 ? resp[i] : 1.0 - resp[i];
                wk += r;
                sxk += r * zx[i];
                syk += r * zy[i];
            }
            if (wk < 1e-9 * static_cast<double>(n)) {
                degenerate = true;
                break;
            }
            Gaussian2& g = comp[k];
            g.w = wk / static_cast<double>(n);
            g.mx = sxk / wk;
            g.my = syk / wk;
            double axx = 0;
            double axy = 0;
            double ayy = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = k == 0 ? resp[i] : 1.0 - resp[i];
                const double dx = zx[i] - g.mx;
                const double dy = zy[i] - g.my;
                axx += r * dx * dx;
                axy += r * dx * dy;
                ayy += r * dy * dy;
            }
            g.sxx = axx / wk;
            g.sxy = axy / wk;
            g.syy = ayy / wk;
            if (floor_covariance(g, kCovFloor)) {
                if (++floored_streak[k] >= 5) degenerate = true;
            } else {
                floored_streak[k] = 0;
            }
        }
        if (degenerate) return fail("a mixture component collapsed during EM");
        if (std::abs(ll - prev_ll) <= cfg.tol * (std::abs(ll) + 1.0)) break;
        prev_ll = ll;
    }

    // Equal-posterior boundary restricted to the x-marginal: solve the
    // 1-D quadratic discriminant between N(mx1, sxx1) and N(mx2, sxx2).
    const double s1 = comp[0].sxx;
    const double s2 = comp[1].sxx;
    const double m1 = comp[0].mx;
    const double m2 = comp[1].mx;
    const double qa = 1.0 / (2.0 * s2) - 1.0 / (2.0 * s1);
    const double qb = m1 / s1 - m2 / s2;
    const double qc = m2 * m2 / (2.0 * s2) - m1 * m1 / (2.0 * s1) +
                      std::log(comp[0].w / comp[1].w) + 0.5 * std::log(s2 / s1);

    double boundary_std = 0.0;
    const double lo_mean = std::min(m1, m2);
    const double hi_mean = std::max(m1, m2);
    if (std::abs(qa) < 1e-12) {
        if (std::abs(qb) < 1e-12) return fail("components are indistinguishable along x");
        boundary_std = -qc / qb;
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc < 0.0) return fail("no real equal-posterior point along x");
        const double sq = std::sqrt(disc);
        const double r1 = (-qb + sq) / (2.0 * qa);
        const double r2 = (-qb - sq) / (2.0 * qa);
        const bool r1_between = r1 >= lo_mean && r1 <= hi_mean;
        const bool r2_between = r2 >= lo_mean && r2 <= hi_mean;
        if (r1_between && r2_between) {
            // Tie: prefer the root closest to the (standardized) median.
            const double med = (median_of_sorted(xy) - mx) / sx;
            boundary_std = std::abs(r1 - med) <= std::abs(r2 - med) ? r1 : r2;
        } else if (r1_between) {
            boundary_std = r1;
        } else if (r2_between) {
            boundary_std = r2;
        } else {
            boundary_std = std::abs(r1 - 0.5 * (m1 + m2)) <= std::abs(r2 - 0.5 * (m1 + m2)) ? r1
                                                                                            : r2;
        }
    }

    const double boundary = mx + sx * boundary_std;

    if (fit_out) {
        for (int k = 0; k < 2; ++k) {
            fit_out->weight[k] = comp[k].w;
            fit_out->mean_x[k] = mx + sx * comp[k].mx;
            fit_out->mean_y[k] = my + sy * comp[k].my;
            fit_out->cov_xx[k] = comp[k].sxx * sx * sx;
            fit_out->cov_xy[k] = comp[k].sxy * sx * sy;
            fit_out->cov_yy[k] = comp[k].syy * sy * sy;
        }
        fit_out->boundary = boundary;
        fit_out->iterations = iterations;
        fit_out->degenerate = false;
        fit_out->diagnostic.clear();
    }

    auto cand = candidate_from_placement(xy, m, boundary, /*heuristic_score=*/0.0);
    if (cand) cand->score = cand->variance_reduction;
    return cand;
}

} // namespace mimictree
