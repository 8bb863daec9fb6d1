#include "psymort/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <sstream>
#include <unordered_map>

#include "psymort/errors.hpp"

namespace psymort {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    if (a.size() != b.size()) throw UsageError("rbf_kernel: rows have different lengths");
    if (!(gamma > 0.0)) throw UsageError("rbf_kernel: gamma must be positive");
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::exp(-gamma * sq);
}

double rbf_kernel(const FeatureMatrix& xa, std::size_t row_a, const FeatureMatrix& xb,
                  std::size_t row_b, double gamma) {
    // On 0/1 rows the squared Euclidean distance is the Hamming distance.
    return std::exp(-gamma * static_cast<double>(FeatureMatrix::hamming(xa, row_a, xb, row_b)));
}

namespace {

/// LRU cache of full kernel rows. Training sets that fit the budget never
/// recompute; larger ones evict the least recently used row.
class KernelCache {
public:
    KernelCache(const FeatureMatrix& x, double gamma, std::size_t budget_bytes)
        : x_(x), gamma_(gamma) {
        const std::size_t row_bytes = x.rows() * sizeof(double);
        capacity_ = std::max<std::size_t>(2, budget_bytes / std::max<std::size_t>(1, row_bytes));
    }

    const std::vector<double>& row(std::size_t i) {
        if (const auto it = slots_.find(i); it != slots_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.lru_pos);
            return it->second.values;
        }
        if (slots_.size() >= capacity_) {
            const std::size_t victim = lru_.back();
            lru_.pop_back();
            slots_.erase(victim);
        }
        lru_.push_front(i);
        Slot slot;
        slot.lru_pos = lru_.begin();
        slot.values.resize(x_.rows());
        for (std::size_t t = 0; t < x_.rows(); ++t) {
            slot.values[t] = std::exp(
                -gamma_ * static_cast<double>(FeatureMatrix::hamming(x_, i, x_, t)));
        }
        return slots_.emplace(i, std::move(slot)).first->second.values;
    }

private:
    struct Slot {
        std::vector<double> values;
        std::list<std::size_t>::iterator lru_pos;
    };
    const FeatureMatrix& x_;
    double gamma_;
    std::size_t capacity_;
    std::unordered_map<std::size_t, Slot> slots_;
    std::list<std::size_t> lru_;
};

double matrix_cell_variance(const FeatureMatrix& x) {
    const std::size_t cells = x.rows() * x.cols();
    if (cells == 0) return 0.0;
    std::size_t ones = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) ones += x.count_ones(r);
    const double p = static_cast<double>(ones) / static_cast<double>(cells);
    return p * (1.0 - p);
}

double resolve_gamma(const FeatureMatrix& x, const SvmOptions& opts) {
    if (opts.gamma) {
        if (!(*opts.gamma > 0.0)) throw UsageError("svm: gamma must be positive");
        return *opts.gamma;
    }
    const double var = matrix_cell_variance(x);
    const double d = static_cast<double>(std::max<std::size_t>(1, x.cols()));
    return var > 0.0 ? 1.0 / (d * var) : 1.0 / d;
}

}  // namespace

SvmModel smo_train(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                   const SvmOptions& opts, SmoStats* stats) {
    const std::size_t n = x.rows();
    if (n != y.size() || n < 2) throw UsageError("svm needs at least two labeled rows");
    if (!(opts.c > 0.0)) throw UsageError("svm: c must be positive");

    std::vector<double> sign(n);  // labels as -1/+1
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        sign[i] = y[i] ? 1.0 : -1.0;
        (y[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw TrainError("svm requires both classes in the training labels");
    }

    const double c = opts.c;
    const double gamma = resolve_gamma(x, opts);
    KernelCache cache(x, gamma, opts.cache_mb * std::size_t(1024) * 1024);

    std::vector<double> alpha(n, 0.0);
    std::vector<double> u(n, 0.0);  // decision values without bias
    const long budget = static_cast<long>(opts.max_passes) * static_cast<long>(n);
    long updates = 0;
    double gap = std::numeric_limits<double>::infinity();

    auto record_objective = [&] {
        if (!stats || !stats->track_objective) return;
        double obj = 0.0;
        for (std::size_t t = 0; t < n; ++t) obj += alpha[t] - 0.5 * alpha[t] * sign[t] * u[t];
        stats->objective_trace.push_back(obj);
    };
    record_objective();

    // Max-violating-pair SMO. A point t belongs to the "up" set when alpha_t
    // can still grow in the +y_t direction and to the "low" set when it can
    // shrink; optimality is max_up(y-u) <= min_low(y-u) within 2*tol.
    while (true) {
        double best_up = -std::numeric_limits<double>::infinity();
        double best_low = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = sign[t] - u[t];
            const bool in_up = (sign[t] > 0 && alpha[t] < c) || (sign[t] < 0 && alpha[t] > 0);
            const bool in_low = (sign[t] > 0 && alpha[t] > 0) || (sign[t] < 0 && alpha[t] < c);
            if (in_up && v > best_up) {
                best_up = v;
                i = t;
            }
            if (in_low && v < best_low) {
                best_low = v;
                j = t;
            }
        }
        gap = best_up - best_low;
        if (i == n || j == n || gap <= 2.0 * opts.tol) break;
        if (updates >= budget) {
            const double bias = (best_up + best_low) / 2.0;
            const int violations =
                count_kkt_violations(x, y, alpha, bias, gamma, c, opts.tol);
            std::ostringstream msg;
            msg << "smo did not converge within " << opts.max_passes << " passes ("
                << updates << " updates): KKT gap " << gap << ", " << violations
                << " points violate tol " << opts.tol;
            throw ConvergenceError(msg.str());
        }

        const std::vector<double>& ki = cache.row(i);
        const std::vector<double>& kj = cache.row(j);
        const double eta = std::max(ki[i] + kj[j] - 2.0 * ki[j], 1e-12);

        // Two-variable subproblem on (alpha_i, alpha_j), equality preserved.
        const double ei = u[i] - sign[i];
        const double ej = u[j] - sign[j];
        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        double lo, hi;
        if (sign[i] != sign[j]) {
            lo = std::max(0.0, old_aj - old_ai);
            hi = std::min(c, c + old_aj - old_ai);
        } else {
            lo = std::max(0.0, old_ai + old_aj - c);
            hi = std::min(c, old_ai + old_aj);
        }
        double aj = old_aj + sign[j] * (ei - ej) / eta;
        aj = std::clamp(aj, lo, hi);
        double ai = old_ai + sign[i] * sign[j] * (old_aj - aj);
        ai = std::clamp(ai, 0.0, c);
        // Snap rounding residue onto the box bounds; a coefficient left one
        // ulp inside a bound stays selectable with no usable movement and
        // the working-set loop would cycle on it.
        const double snap = 1e-12 * c;
        if (ai < snap) ai = 0.0;
        else if (ai > c - snap) ai = c;
        if (aj < snap) aj = 0.0;
        else if (aj > c - snap) aj = c;

        const double delta_i = (ai - old_ai) * sign[i];
        const double delta_j = (aj - old_aj) * sign[j];
        alpha[i] = ai;
        alpha[j] = aj;
        for (std::size_t t = 0; t < n; ++t) u[t] += delta_i * ki[t] + delta_j * kj[t];
        ++updates;
        record_objective();
    }

    // Midpoint of the feasible bias interval keeps every point within tol.
    double best_up = -std::numeric_limits<double>::infinity();
    double best_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double v = sign[t] - u[t];
        if ((sign[t] > 0 && alpha[t] < c) || (sign[t] < 0 && alpha[t] > 0)) {
            best_up = std::max(best_up, v);
        }
        if ((sign[t] > 0 && alpha[t] > 0) || (sign[t] < 0 && alpha[t] < c)) {
            best_low = std::min(best_low, v);
        }
    }
    double bias = 0.0;
    if (std::isfinite(best_up) && std::isfinite(best_low)) bias = (best_up + best_low) / 2.0;
    else if (std::isfinite(best_up)) bias = best_up;
    else if (std::isfinite(best_low)) bias = best_low;

    if (stats) {
        stats->alphas = alpha;
        stats->bias = bias;
        stats->gamma = gamma;
        stats->pair_updates = updates;
        stats->final_gap = gap;
    }

    std::vector<std::size_t> support_rows;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) support_rows.push_back(t);
    }
    SvmModel model;
    model.support = x.take_rows(support_rows);
    model.alpha_y.reserve(support_rows.size());
    for (const std::size_t t : support_rows) model.alpha_y.push_back(alpha[t] * sign[t]);
    model.bias = bias;
    model.gamma = gamma;
    return model;
}

std::vector<double> svm_score(const SvmModel& model, const FeatureMatrix& x) {
    if (x.cols() != model.support.cols()) {
        throw UsageError("feature width mismatch: model expects " +
                         std::to_string(model.support.cols()) + ", matrix has " +
                         std::to_string(x.cols()));
    }
    std::vector<double> scores(x.rows(), model.bias);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t s = 0; s < model.support.rows(); ++s) {
            acc += model.alpha_y[s] * rbf_kernel(model.support, s, x, r, model.gamma);
        }
        scores[r] += acc;
    }
    return scores;
}

double svm_dual_objective(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                          std::span<const double> alphas, double gamma) {
    double obj = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) obj += alphas[i];
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (alphas[i] == 0.0) continue;
        const double yi = y[i] ? 1.0 : -1.0;
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            if (alphas[j] == 0.0) continue;
            const double yj = y[j] ? 1.0 : -1.0;
            obj -= 0.5 * alphas[i] * alphas[j] * yi * yj * rbf_kernel(x, i, x, j, gamma);
        }
    }
    return obj;
}

int count_kkt_violations(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                         std::span<const double> alphas, double bias, double gamma, double c,
                         double tol) {
    const std::size_t n = alphas.size();
    int violations = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double f = bias;
        for (std::size_t j = 0; j < n; ++j) {
            if (alphas[j] == 0.0) continue;
            const double yj = y[j] ? 1.0 : -1.0;
            f += alphas[j] * yj * rbf_kernel(x, j, x, i, gamma);
        }
        const double margin = (y[i] ? 1.0 : -1.0) * f;
        bool bad;
        if (alphas[i] <= 0.0) bad = margin < 1.0 - tol;
        else if (alphas[i] >= c) bad = margin > 1.0 + tol;
        else bad = std::abs(margin - 1.0) > tol;
        if (bad) ++violations;
    }
    return violations;
}

}  // namespace psymort
