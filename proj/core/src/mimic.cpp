#include "mimictree/mimic.hpp"

#include <cmath>
#include <unordered_set>

#include "mimictree/errors.hpp"

namespace mimictree {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

AugmentedSet action_replace(const Dataset& data, const AugmentationPlan& plan) {
    data.check_consistent();

    // Locate the lag-0 one-hot group of the action feature.
    std::vector<std::size_t> group_cols;
    std::size_t target_col = data.n_features();
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        const ColumnInfo& c = data.schema[j];
        if (c.base == plan.action_feature && c.is_one_hot() && c.lag == 0) {
            if (c.level == plan.target_level) target_col = j;
            group_cols.push_back(j);
        }
    }
    if (group_cols.empty())
        throw schema_error("no lag-0 one-hot group for action feature '" + plan.action_feature +
                           "'");
    if (target_col == data.n_features())
        throw schema_error("action feature '" + plan.action_feature + "' has no level '" +
                           plan.target_level + "'");

    // Rows whose current action already is the target are ineligible.
    std::vector<std::size_t> eligible;
    eligible.reserve(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (data.columns[target_col][i] != 1.0) eligible.push_back(i);
    }

    std::size_t want = plan.count
                           ? *plan.count
                           : static_cast<std::size_t>(
                                 std::floor(plan.rate * static_cast<double>(data.rows())));

    AugmentedSet out;
    out.data.schema = data.schema;
    out.data.norm = data.norm;
    out.data.columns.resize(data.n_features());
    if (want == 0) return out;
    if (eligible.empty())
        throw augment_error("no source rows with an action other than '" + plan.target_level +
                            "'");

    std::uint64_t state = plan.seed;
    out.source_rows.reserve(want);
    for (std::size_t s = 0; s < want; ++s) {
        const std::size_t src = eligible[splitmix64(state) % eligible.size()];
        out.source_rows.push_back(src);
        for (std::size_t j = 0; j < data.n_features(); ++j) {
            double v = data.columns[j][src];
            if (data.schema[j].base == plan.action_feature && data.schema[j].is_one_hot() &&
                data.schema[j].lag == 0) {
                v = j == target_col ? 1.0 : 0.0;
            }
            out.data.columns[j].push_back(v);
        }
        out.data.target.push_back(0.0); // to be labeled by the oracle
    }
    out.data.check_consistent();
    return out;
}

std::vector<std::size_t> episode_starts(std::span<const std::int64_t> episode_ids,
                                        std::size_t rows) {
    std::vector<std::size_t> starts;
    if (rows == 0) return starts;
    starts.push_back(0);
    if (episode_ids.empty()) return starts;
    if (episode_ids.size() != rows) throw data_error("episode id column length mismatch");

    std::unordered_set<std::int64_t> closed;
    for (std::size_t i = 1; i < rows; ++i) {
        if (episode_ids[i] == episode_ids[i - 1]) continue;
        if (!closed.insert(episode_ids[i - 1]).second || closed.count(episode_ids[i]) > 0) {
            throw data_error("episode " + std::to_string(episode_ids[i]) +
                             " resumes at row " + std::to_string(i) +
                             "; rows are not chronologically grouped");
        }
        starts.push_back(i);
    }
    return starts;
}

std::vector<double> compute_impact(std::span<const double> q,
                                   std::span<const std::int64_t> episode_ids,
                                   double first_baseline) {
    const auto starts = episode_starts(episode_ids, q.size());
    std::vector<double> impact(q.size());
    std::size_t next_start = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const bool is_start = next_start < starts.size() && starts[next_start] == i;
        if (is_start) {
            impact[i] = q[i] - first_baseline;
            ++next_start;
        } else {
            impact[i] = q[i] - q[i - 1];
        }
    }
    return impact;
}

double null_model_mean(std::span<const double> train_soft) {
    if (train_soft.empty()) throw data_error("null model needs at least one training label");
    double s = 0.0;
    for (double v : train_soft) s += v;
    return s / static_cast<double>(train_soft.size());
}

FidelityReport fidelity(std::span<const double> pred, std::span<const double> soft,
                        double train_soft_mean) {
    if (pred.size() != soft.size()) throw data_error("fidelity: column lengths differ");
    if (pred.size() < 2) throw data_error("fidelity needs at least 2 rows");
    const double n = static_cast<double>(pred.size());

    double se = 0.0;
    double null_se = 0.0;
    double mean_p = 0.0;
    double mean_s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - soft[i];
        se += d * d;
        const double nd = train_soft_mean - soft[i];
        null_se += nd * nd;
        mean_p += pred[i];
        mean_s += soft[i];
    }
    mean_p /= n;
    mean_s /= n;

    double cov = 0.0;
    double var_p = 0.0;
    double var_s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dp = pred[i] - mean_p;
        const double ds = soft[i] - mean_s;
        cov += dp * ds;
        var_p += dp * dp;
        var_s += ds * ds;
    }

    // A constant series leaves the correlation undefined; detect constancy
    // exactly so rounding in the mean cannot fake a nonzero variance.
    bool const_p = true;
    bool const_s = true;
    for (std::size_t i = 1; i < pred.size(); ++i) {
        const_p = const_p && pred[i] == pred[0];
        const_s = const_s && soft[i] == soft[0];
    }

    FidelityReport report;
    report.n_test = pred.size();
    report.rmse = std::sqrt(se / n);
    report.null_rmse = std::sqrt(null_se / n);
    if (!const_p && !const_s && var_p > 0.0 && var_s > 0.0) {
        report.pearson_defined = true;
        report.pearson_r = cov / std::sqrt(var_p * var_s);
    }
    return report;
}

} // namespace mimictree
