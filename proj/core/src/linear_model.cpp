#include "mimictree/linear_model.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "mimictree/errors.hpp"

namespace mimictree {

std::string to_string(penalty_norm norm) {
    switch (norm) {
    case penalty_norm::l0: return "l0";
    case penalty_norm::l1: return "l1";
    case penalty_norm::l2: return "l2";
    }
    return "?";
}

double LeafModel::predict(std::span<const double> row) const {
    double acc = intercept;
    const std::size_t p = weights.size();
    for (std::size_t j = 0; j < p; ++j) acc += weights[j] * row[j];
    return acc;
}

LeafModel fit_leaf(const Dataset& data, std::span<const std::size_t> rows, double ridge_eps) {
    if (rows.empty()) throw data_error("fit_leaf needs at least one row");
    const std::size_t p = data.n_features();
    const Eigen::Index dim = static_cast<Eigen::Index>(p) + 1; // weights + intercept

    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd z(dim);
    z[dim - 1] = 1.0;
    for (std::size_t r : rows) {
        for (std::size_t j = 0; j < p; ++j) z[static_cast<Eigen::Index>(j)] = data.columns[j][r];
        normal.selfadjointView<Eigen::Lower>().rankUpdate(z);
        rhs += z * data.target[r];
    }
    normal = normal.selfadjointView<Eigen::Lower>();
    for (Eigen::Index j = 0; j + 1 < dim; ++j) normal(j, j) += ridge_eps;

    Eigen::VectorXd coef = normal.ldlt().solve(rhs);

    LeafModel model;
    model.weights.assign(coef.data(), coef.data() + p);
    model.intercept = coef[dim - 1];

    double loss = 0.0;
    for (std::size_t r : rows) {
        double pred = model.intercept;
        for (std::size_t j = 0; j < p; ++j) pred += model.weights[j] * data.columns[j][r];
        const double e = data.target[r] - pred;
        loss += e * e;
    }
    model.residual_loss = loss;
    return model;
}

double weight_penalty(const LeafModel& model, penalty_norm norm) {
    double r = 0.0;
    switch (norm) {
    case penalty_norm::l0:
        for (double w : model.weights)
            if (std::abs(w) > 1e-8) r += 1.0;
        break;
    case penalty_norm::l1:
        for (double w : model.weights) r += std::abs(w);
        break;
    case penalty_norm::l2:
        for (double w : model.weights) r += w * w;
        break;
    }
    return r;
}

double node_loss(const Dataset& data, std::span<const std::size_t> rows, const LeafModel& model,
                 const PruneConfig& cfg) {
    const std::size_t p = data.n_features();
    double loss = 0.0;
    for (std::size_t r : rows) {
        double pred = model.intercept;
        for (std::size_t j = 0; j < p; ++j) pred += model.weights[j] * data.columns[j][r];
        const double e = data.target[r] - pred;
        loss += e * e;
    }
    return loss + cfg.lambda * weight_penalty(model, cfg.norm);
}

} // namespace mimictree
