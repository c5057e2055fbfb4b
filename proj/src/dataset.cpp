#include "rgf/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <numeric>

#include "rgf/error.hpp"
#include "text_util.hpp"

namespace rgf {

Dataset::Dataset(std::size_t rows, std::size_t dim, std::vector<double> features,
                 std::vector<double> targets, std::vector<PreferencePair> pairs)
    : rows_(rows), dim_(dim), features_(std::move(features)) {
    if (features_.size() != rows_ * dim_)
        throw DataError("feature matrix has " + std::to_string(features_.size()) +
                        " entries, expected " + std::to_string(rows_ * dim_));
    if (!targets.empty()) set_targets(std::move(targets));
    if (!pairs.empty()) set_pairs(std::move(pairs));
}

void Dataset::set_targets(std::vector<double> targets) {
    if (targets.size() != rows_)
        throw DataError("target/feature count mismatch: " + std::to_string(targets.size()) +
                        " targets for " + std::to_string(rows_) + " instances");
    targets_ = std::move(targets);
}

void Dataset::set_pairs(std::vector<PreferencePair> pairs) {
    for (const auto& p : pairs) {
        if (p.preferred >= rows_ || p.other >= rows_)
            throw DataError("pair index out of range [0, " + std::to_string(rows_) + ")");
        if (p.preferred == p.other) throw DataError("pair (i, i) is not allowed");
    }
    pairs_ = std::move(pairs);
}

bool Dataset::has_binary_labels() const {
    return has_targets() &&
           std::all_of(targets_.begin(), targets_.end(), [](double y) { return y == 1.0 || y == -1.0; });
}

Dataset Dataset::subset(std::span<const std::uint32_t> rows) const {
    std::vector<double> features;
    features.reserve(rows.size() * dim_);
    std::vector<double> targets;
    std::vector<std::int64_t> remap(rows_, -1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto r = row(rows[k]);
        features.insert(features.end(), r.begin(), r.end());
        if (has_targets()) targets.push_back(targets_[rows[k]]);
        remap[rows[k]] = static_cast<std::int64_t>(k);
    }
    std::vector<PreferencePair> pairs;
    for (const auto& p : pairs_) {
        if (remap[p.preferred] >= 0 && remap[p.other] >= 0)
            pairs.push_back({static_cast<std::uint32_t>(remap[p.preferred]),
                             static_cast<std::uint32_t>(remap[p.other])});
    }
    return Dataset(rows.size(), dim_, std::move(features), std::move(targets), std::move(pairs));
}

// ---------------------------------------------------------------------------
// Parsing

Dataset parse_features(std::string_view text, const LoadOptions& options, const std::string& origin) {
    detail::LineReader reader(text);
    std::string_view line;
    std::vector<double> values;
    std::size_t rows = 0;

    if (options.features == FeatureFormat::dense) {
        std::size_t dim = 0;
        while (reader.next(line)) {
            const auto tokens = detail::split_ws(line);
            if (tokens.empty()) throw DataError(origin, reader.line_number(), "malformed row: empty line");
            if (rows == 0) {
                dim = tokens.size();
            } else if (tokens.size() != dim) {
                throw DataError(origin, reader.line_number(),
                                "dimension mismatch: " + std::to_string(tokens.size()) +
                                    " values, expected " + std::to_string(dim));
            }
            for (auto tok : tokens) {
                const auto v = detail::parse_double(tok);
                if (!v) throw DataError(origin, reader.line_number(), "malformed row: bad number '" + std::string(tok) + "'");
                values.push_back(*v);
            }
            ++rows;
        }
        return Dataset(rows, dim, std::move(values));
    }

    // Sparse: collect (row, index, value) first so the dimension can be inferred.
    struct Entry {
        std::size_t row;
        std::size_t index;
        double value;
    };
    std::vector<Entry> entries;
    std::size_t max_index_plus_one = 0;
    while (reader.next(line)) {
        for (auto tok : detail::split_ws(line)) {
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos)
                throw DataError(origin, reader.line_number(), "malformed row: expected index:value, got '" + std::string(tok) + "'");
            const auto index = detail::parse_int<std::size_t>(tok.substr(0, colon));
            const auto value = detail::parse_double(tok.substr(colon + 1));
            if (!index || !value)
                throw DataError(origin, reader.line_number(), "malformed row: bad token '" + std::string(tok) + "'");
            if (options.dim && *index >= *options.dim)
                throw DataError(origin, reader.line_number(),
                                "sparse index " + std::to_string(*index) + " out of range [0, " +
                                    std::to_string(*options.dim) + ")");
            max_index_plus_one = std::max(max_index_plus_one, *index + 1);
            entries.push_back({rows, *index, *value});
        }
        ++rows;
    }
    const std::size_t dim = options.dim.value_or(max_index_plus_one);
    values.assign(rows * dim, 0.0);
    for (const auto& e : entries) values[e.row * dim + e.index] = e.value;
    return Dataset(rows, dim, std::move(values));
}

std::vector<double> parse_targets(std::string_view text, const std::string& origin) {
    detail::LineReader reader(text);
    std::string_view line;
    std::vector<double> targets;
    while (reader.next(line)) {
        const auto tokens = detail::split_ws(line);
        if (tokens.size() != 1) throw DataError(origin, reader.line_number(), "malformed row: expected one target value");
        const auto v = detail::parse_double(tokens[0]);
        if (!v) throw DataError(origin, reader.line_number(), "malformed row: bad number '" + std::string(tokens[0]) + "'");
        targets.push_back(*v);
    }
    return targets;
}

std::vector<PreferencePair> parse_pairs(std::string_view text, std::size_t rows, const std::string& origin) {
    detail::LineReader reader(text);
    std::string_view line;
    std::vector<PreferencePair> pairs;
    while (reader.next(line)) {
        const auto tokens = detail::split_ws(line);
        if (tokens.size() != 2) throw DataError(origin, reader.line_number(), "malformed row: expected 'i j'");
        const auto i = detail::parse_int<std::uint32_t>(tokens[0]);
        const auto j = detail::parse_int<std::uint32_t>(tokens[1]);
        if (!i || !j) throw DataError(origin, reader.line_number(), "malformed row: bad pair index");
        if (*i >= rows || *j >= rows)
            throw DataError(origin, reader.line_number(),
                            "pair index out of range [0, " + std::to_string(rows) + ")");
        if (*i == *j) throw DataError(origin, reader.line_number(), "pair (i, i) is not allowed");
        pairs.push_back({*i, *j});
    }
    return pairs;
}

Dataset load_dataset(const std::string& feature_path, const std::string& target_path,
                     const LoadOptions& options) {
    Dataset data = parse_features(detail::read_file(feature_path), options, feature_path);
    if (target_path.empty()) return data;
    const std::string text = detail::read_file(target_path);
    if (options.targets == TargetFormat::pairs) {
        data.set_pairs(parse_pairs(text, data.size(), target_path));
    } else {
        auto targets = parse_targets(text, target_path);
        if (targets.size() != data.size())
            throw DataError(target_path, targets.size() < data.size() ? targets.size() + 1 : data.size() + 1,
                            "target/feature count mismatch: " + std::to_string(targets.size()) +
                                " targets for " + std::to_string(data.size()) + " feature rows");
        data.set_targets(std::move(targets));
    }
    return data;
}

// ---------------------------------------------------------------------------
// Writing

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

std::string format_dense_features(const Dataset& data) {
    std::string out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = data.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) out += ' ';
            out += format_double(r[j]);
        }
        out += '\n';
    }
    return out;
}

void write_dense_features(const Dataset& data, const std::string& path) {
    detail::write_file(path, format_dense_features(data));
}

void write_targets(std::span<const double> values, const std::string& path) {
    std::string out;
    for (double v : values) {
        out += format_double(v);
        out += '\n';
    }
    detail::write_file(path, out);
}

// ---------------------------------------------------------------------------
// Sorted index

SortedFeatureIndex::SortedFeatureIndex(const Dataset& data)
    : rows_(data.size()), order_(data.dim()), columns_(data.size() * data.dim()) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
        for (std::size_t i = 0; i < rows_; ++i) columns_[j * rows_ + i] = data.value(i, j);
        auto& perm = order_[j];
        perm.resize(rows_);
        std::iota(perm.begin(), perm.end(), 0u);
        std::stable_sort(perm.begin(), perm.end(), [&](std::uint32_t a, std::uint32_t b) {
            return data.value(a, j) < data.value(b, j);
        });
    }
}

std::vector<std::size_t> SortedFeatureIndex::tie_runs(const Dataset& data, std::size_t feature) const {
    std::vector<std::size_t> runs;
    const auto perm = order(feature);
    std::size_t k = 0;
    while (k < perm.size()) {
        std::size_t end = k + 1;
        while (end < perm.size() && data.value(perm[end], feature) == data.value(perm[k], feature)) ++end;
        runs.push_back(end - k);
        k = end;
    }
    return runs;
}

}  // namespace rgf
