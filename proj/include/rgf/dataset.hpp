#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rgf {

/// Instance `preferred` should score higher than instance `other`.
struct PreferencePair {
    std::uint32_t preferred = 0;
    std::uint32_t other = 0;

    friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

/// Dense row-major feature matrix plus either real targets or preference pairs.
///
/// Sparse input is expanded to dense on load; the dimensionalities this
/// library targets make that the simpler and faster representation for
/// split search.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::size_t rows, std::size_t dim, std::vector<double> features,
            std::vector<double> targets = {}, std::vector<PreferencePair> pairs = {});

    std::size_t size() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * dim_, dim_};
    }
    double value(std::size_t i, std::size_t feature) const { return features_[i * dim_ + feature]; }
    std::span<const double> features() const noexcept { return features_; }

    bool has_targets() const noexcept { return !targets_.empty(); }
    bool has_pairs() const noexcept { return !pairs_.empty(); }
    std::span<const double> targets() const noexcept { return targets_; }
    std::span<const PreferencePair> pairs() const noexcept { return pairs_; }

    void set_targets(std::vector<double> targets);
    void set_pairs(std::vector<PreferencePair> pairs);

    /// True iff every target is exactly +1 or -1.
    bool has_binary_labels() const;

    /// Rows listed in `rows`, in that order. Pairs with both endpoints kept are
    /// remapped; the rest are dropped.
    Dataset subset(std::span<const std::uint32_t> rows) const;

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> features_;
    std::vector<double> targets_;
    std::vector<PreferencePair> pairs_;
};

enum class FeatureFormat { dense, sparse };
enum class TargetFormat { values, pairs };

struct LoadOptions {
    FeatureFormat features = FeatureFormat::dense;
    TargetFormat targets = TargetFormat::values;
    /// Sparse files only: declared dimensionality. Inferred as max index + 1
    /// when absent.
    std::optional<std::size_t> dim;
};

/// Reads a feature file and, when `target_path` is non-empty, its target or
/// pair file. Errors are DataError with "path:line:" prefixes.
Dataset load_dataset(const std::string& feature_path, const std::string& target_path,
                     const LoadOptions& options = {});

/// Parsers over in-memory text; `origin` is used in error messages.
Dataset parse_features(std::string_view text, const LoadOptions& options,
                       const std::string& origin = "<features>");
std::vector<double> parse_targets(std::string_view text, const std::string& origin = "<targets>");
std::vector<PreferencePair> parse_pairs(std::string_view text, std::size_t rows,
                                        const std::string& origin = "<pairs>");

/// Dense format writers using shortest round-trip decimal encoding.
void write_dense_features(const Dataset& data, const std::string& path);
void write_targets(std::span<const double> values, const std::string& path);
std::string format_dense_features(const Dataset& data);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Per-feature ascending permutation of instance indices (ties by index).
class SortedFeatureIndex {
public:
    SortedFeatureIndex() = default;
    explicit SortedFeatureIndex(const Dataset& data);

    std::size_t dim() const noexcept { return order_.size(); }
    std::size_t size() const noexcept { return rows_; }
    std::span<const std::uint32_t> order(std::size_t feature) const { return order_[feature]; }
    /// Feature values by instance index (a column-major copy of the data).
    std::span<const double> column(std::size_t feature) const {
        return {columns_.data() + feature * rows_, rows_};
    }

    /// Lengths of the maximal runs of equal values along order(feature).
    std::vector<std::size_t> tie_runs(const Dataset& data, std::size_t feature) const;

private:
    std::size_t rows_ = 0;
    std::vector<std::vector<std::uint32_t>> order_;
    std::vector<double> columns_;
};

inline SortedFeatureIndex build_sorted_index(const Dataset& data) { return SortedFeatureIndex(data); }

}  // namespace rgf
