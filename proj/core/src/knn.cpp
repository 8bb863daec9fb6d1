#include "psymort/knn.hpp"

#include <algorithm>

#include "psymort/errors.hpp"

namespace psymort {

KnnModel knn_train(const FeatureMatrix& x, std::span<const std::uint8_t> y,
                   const KnnOptions& opts) {
    if (x.rows() != y.size() || x.rows() < 2) {
        throw UsageError("knn needs at least two labeled rows");
    }
    if (opts.k < 1) throw UsageError("knn: k must be >= 1");
    if (static_cast<std::size_t>(opts.k) > x.rows()) {
        throw UsageError("knn: k exceeds the number of training rows");
    }
    KnnModel model;
    model.train = x;
    model.train_labels.assign(y.begin(), y.end());
    model.k = opts.k;
    return model;
}

std::vector<double> knn_score(const KnnModel& model, const FeatureMatrix& x) {
    if (x.cols() != model.train.cols()) {
        throw UsageError("feature width mismatch: model expects " +
                         std::to_string(model.train.cols()) + ", matrix has " +
                         std::to_string(x.cols()));
    }
    const std::size_t n_train = model.train.rows();
    const std::size_t k = static_cast<std::size_t>(model.k);

    std::vector<double> scores(x.rows());
    std::vector<std::pair<std::uint32_t, std::size_t>> order(n_train);
    for (std::size_t q = 0; q < x.rows(); ++q) {
        for (std::size_t t = 0; t < n_train; ++t) {
            order[t] = {FeatureMatrix::hamming(x, q, model.train, t), t};
        }
        // (distance, training-row index) pairs: exact ties resolve to the
        // smaller index.
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                          order.end());
        int positives = 0;
        for (std::size_t s = 0; s < k; ++s) positives += model.train_labels[order[s].second];
        scores[q] = static_cast<double>(positives) / static_cast<double>(k);
    }
    return scores;
}

}  // namespace psymort
