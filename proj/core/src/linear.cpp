#include "psymort/linear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psymort/errors.hpp"

namespace psymort {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// Stable -[y log p + (1-y) log(1-p)] in terms of the logit.
double cross_entropy(double z, double y) {
    return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

std::vector<double> logits(std::span<const double> weights, double bias, const FeatureMatrix& x) {
    std::vector<double> z(x.rows(), bias);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double acc = 0.0;
        x.for_each_set(r, [&](std::size_t col) { acc += weights[col]; });
        z[r] += acc;
    }
    return z;
}

double gradient_norm(const LrGradient& g) {
    double sq = g.bias * g.bias;
    for (const double v : g.weights) sq += v * v;
    return std::sqrt(sq);
}

}  // namespace

double lr_loss(std::span<const double> weights, double bias, const FeatureMatrix& x,
               std::span<const std::uint8_t> y, double l2) {
    const std::vector<double> z = logits(weights, bias, x);
    double loss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        loss += cross_entropy(z[r], static_cast<double>(y[r]));
    }
    loss /= static_cast<double>(x.rows());
    double wsq = 0.0;
    for (const double w : weights) wsq += w * w;
    return loss + 0.5 * l2 * wsq;
}

LrGradient lr_gradient(std::span<const double> weights, double bias, const FeatureMatrix& x,
                       std::span<const std::uint8_t> y, double l2) {
    const std::vector<double> z = logits(weights, bias, x);
    LrGradient g;
    g.weights.assign(weights.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double residual = (sigmoid(z[r]) - static_cast<double>(y[r])) * inv_n;
        g.bias += residual;
        x.for_each_set(r, [&](std::size_t col) { g.weights[col] += residual; });
    }
    for (std::size_t j = 0; j < weights.size(); ++j) {
        g.weights[j] += l2 * weights[j];  // bias carries no penalty
    }
    return g;
}

LrModel lr_train(const FeatureMatrix& x, std::span<const std::uint8_t> y, const LrOptions& opts) {
    if (x.rows() != y.size() || x.rows() < 2) {
        throw UsageError("logistic regression needs at least two labeled rows");
    }
    const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
    const bool has_neg = std::find(y.begin(), y.end(), 0) != y.end();
    if (!has_pos || !has_neg) {
        throw TrainError("logistic regression requires both classes in the training labels");
    }

    LrModel model;
    model.weights.assign(x.cols(), 0.0);
    double loss = lr_loss(model.weights, model.bias, x, y, opts.l2);

    // Backtracking halving finds a descent step each iteration (the loss is
    // convex, so one exists); the accepted step doubles as the next search
    // start so flat directions are not stuck at the base rate.
    double step = opts.learning_rate;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const LrGradient grad = lr_gradient(model.weights, model.bias, x, y, opts.l2);
        const double norm = gradient_norm(grad);
        if (norm <= opts.tol) return model;

        std::vector<double> candidate(model.weights.size());
        while (true) {
            for (std::size_t j = 0; j < candidate.size(); ++j) {
                candidate[j] = model.weights[j] - step * grad.weights[j];
            }
            const double candidate_bias = model.bias - step * grad.bias;
            const double candidate_loss = lr_loss(candidate, candidate_bias, x, y, opts.l2);
            if (candidate_loss < loss || step < 1e-14) {
                model.weights.swap(candidate);
                model.bias = candidate_bias;
                loss = candidate_loss;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
    }

    const double final_norm = gradient_norm(lr_gradient(model.weights, model.bias, x, y, opts.l2));
    if (final_norm <= opts.tol) return model;
    std::ostringstream msg;
    msg << "logistic regression did not converge: gradient norm " << final_norm << " > tol "
        << opts.tol << " after " << opts.max_iters << " iterations";
    throw ConvergenceError(msg.str());
}

std::vector<double> lr_score(const LrModel& model, const FeatureMatrix& x) {
    if (x.cols() != model.weights.size()) {
        throw UsageError("feature width mismatch: model expects " +
                         std::to_string(model.weights.size()) + ", matrix has " +
                         std::to_string(x.cols()));
    }
    const std::vector<double> z = logits(model.weights, model.bias, x);
    std::vector<double> scores(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) scores[i] = sigmoid(z[i]);
    return scores;
}

}  // namespace psymort
