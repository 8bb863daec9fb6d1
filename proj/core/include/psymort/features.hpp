#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psymort/cohort.hpp"

namespace psymort {

/// Fitted encoder state: per-feature category lists with most-frequent fill
/// values, plus the drug and procedure code vocabularies. Category lists and
/// vocabularies are sorted and duplicate-free.
struct FeatureSpace {
    struct DemographicEncoder {
        std::string feature;
        std::vector<std::string> categories;     // sorted distinct observed values
        std::optional<std::string> fill;         // modal value, lexicographic tie-break
    };

    std::vector<DemographicEncoder> demographics;  // kModelFeatures order
    std::vector<std::string> drug_vocabulary;
    std::vector<std::string> procedure_vocabulary;

    std::size_t width() const;
    std::vector<std::string> column_names() const;

    bool operator==(const FeatureSpace&) const = default;
};

/// Binary design matrix with named columns, bit-packed per row. Cells are
/// {0,1} by construction; rows keep the subject they were built from.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::vector<std::string> column_names, std::size_t n_rows);

    std::size_t rows() const { return n_rows_; }
    std::size_t cols() const { return column_names_.size(); }
    const std::vector<std::string>& column_names() const { return column_names_; }

    void set(std::size_t row, std::size_t col, bool value = true);
    bool get(std::size_t row, std::size_t col) const;

    std::span<const std::uint64_t> row_words(std::size_t row) const;

    /// Number of differing cells between two binary rows; equals the squared
    /// Euclidean distance.
    static std::uint32_t hamming(const FeatureMatrix& a, std::size_t row_a,
                                 const FeatureMatrix& b, std::size_t row_b);

    /// Calls fn(col) for every set column of a row, ascending.
    template <class Fn>
    void for_each_set(std::size_t row, Fn&& fn) const {
        const std::uint64_t* w = words_.data() + row * stride_;
        for (std::size_t k = 0; k < stride_; ++k) {
            std::uint64_t bits = w[k];
            while (bits) {
                const int bit = std::countr_zero(bits);
                fn(k * 64 + static_cast<std::size_t>(bit));
                bits &= bits - 1;
            }
        }
    }

    std::size_t count_ones(std::size_t row) const;

    std::vector<std::uint8_t> extract_column(std::size_t col) const;
    void assign_column(std::size_t col, std::span<const std::uint8_t> values);

    /// New matrix containing the given rows, in the given order.
    FeatureMatrix take_rows(std::span<const std::size_t> row_indices) const;

    std::vector<std::int64_t> row_ids;  // subject_id per row

    bool operator==(const FeatureMatrix&) const = default;

private:
    std::vector<std::string> column_names_;
    std::size_t n_rows_ = 0;
    std::size_t stride_ = 0;  // 64-bit words per row
    std::vector<std::uint64_t> words_;
};

/// Learns categories, fill values and vocabularies from a cohort.
/// Throws UsageError on an empty cohort.
FeatureSpace fit_feature_space(std::span<const CohortEntry> cohort);

/// Encodes a cohort against a fitted space: absent demographics take the
/// fill value, then one-hot over the fitted categories (values unseen at fit
/// time encode as an all-zero block); code sets binarize against the fitted
/// vocabularies with out-of-vocabulary codes ignored.
FeatureMatrix transform(const FeatureSpace& space, std::span<const CohortEntry> cohort);

/// Label vector aligned with cohort order; 1 = died within 30 days.
std::vector<std::uint8_t> labels(std::span<const CohortEntry> cohort);

/// Matrix CSV: header SUBJECT_ID,<column names>; one 0/1 row per entry.
void write_matrix_csv(const FeatureMatrix& matrix, const std::filesystem::path& path);

}  // namespace psymort
