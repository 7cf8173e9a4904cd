#pragma once

#include "ujmmd/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ujmmd {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view token, const std::string& path, int line_no) {
    token = trim(token);
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || token.empty())
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": not a number: '" + std::string(token) + "'");
    return value;
}

}  // namespace detail

/// Reads a feature file (one sample per line, comma-separated decimals) into
/// a column-per-sample matrix.
inline FeatureMatrix load_features(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open feature file: " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view stripped = detail::trim(line);
        if (stripped.empty())
            continue;
        std::vector<double> row;
        std::size_t start = 0;
        const std::string text(stripped);
        while (true) {
            const std::size_t comma = text.find(',', start);
            const std::string_view token(text.data() + start,
                                         (comma == std::string::npos ? text.size() : comma) - start);
            row.push_back(detail::parse_double(token, path, line_no));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        if (rows.empty()) {
            width = row.size();
        } else if (row.size() != width) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": row " +
                                     std::to_string(rows.size() + 1) + " has " +
                                     std::to_string(row.size()) + " values, expected " +
                                     std::to_string(width));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw std::runtime_error(path + ": no samples found");

    FeatureMatrix X(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < width; ++i)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
    if (!X.allFinite())
        throw std::runtime_error(path + ": features must be finite");
    return X;
}

/// Reads a label file (one 0-based integer per line) and range-checks ids
/// against `num_classes`.
inline HardLabels load_labels(const std::string& path, int num_classes) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open label file: " + path);
    HardLabels labels;
    labels.num_classes = num_classes;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view stripped = detail::trim(line);
        if (stripped.empty())
            continue;
        int value = 0;
        auto [ptr, ec] = std::from_chars(stripped.data(), stripped.data() + stripped.size(), value);
        if (ec != std::errc() || ptr != stripped.data() + stripped.size())
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": not an integer label: '" + std::string(stripped) + "'");
        if (value < 0 || value >= num_classes)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": label " +
                                     std::to_string(value) + " outside [0, " +
                                     std::to_string(num_classes) + ")");
        labels.ids.push_back(value);
    }
    if (labels.ids.empty())
        throw std::runtime_error(path + ": no labels found");
    return labels;
}

/// Loads a feature file and, when given, its label file. Validates that the
/// two agree on the sample count.
inline std::pair<FeatureMatrix, std::optional<HardLabels>>
load_domain(const std::string& features_path, const std::optional<std::string>& labels_path,
            int num_classes) {
    FeatureMatrix X = load_features(features_path);
    std::optional<HardLabels> labels;
    if (labels_path) {
        labels = load_labels(*labels_path, num_classes);
        if (labels->size() != X.cols())
            throw std::runtime_error(features_path + ": " + std::to_string(X.cols()) +
                                     " samples but " + *labels_path + " has " +
                                     std::to_string(labels->size()) + " labels");
    }
    return {std::move(X), std::move(labels)};
}

/// Writes a matrix row-major as comma-separated decimals, full precision.
inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& M) {
    out.precision(17);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0)
                out << ',';
            out << M(i, j);
        }
        out << '\n';
    }
}

inline void save_matrix_csv(const Eigen::MatrixXd& M, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    write_matrix_csv(out, M);
}

/// Writes features in the sample-per-line layout understood by load_features.
inline void save_features(const FeatureMatrix& X, const std::string& path) {
    save_matrix_csv(X.transpose(), path);
}

inline void save_labels(const HardLabels& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    for (int id : labels.ids)
        out << id << '\n';
}

/// Desk-scale stand-in for benchmark feature files: isotropic unit-variance
/// Gaussian blobs, one mean per class, with the target domain translated by
/// a random vector of norm `domain_shift`.
struct SyntheticSpec {
    int num_classes = 2;
    std::vector<int> per_class_source;
    std::vector<int> per_class_target;
    int dim = 2;
    double class_separation = 4.0;
    double domain_shift = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_classes < 2)
            throw std::invalid_argument("SyntheticSpec: need at least 2 classes");
        if (dim < 2)
            throw std::invalid_argument("SyntheticSpec: need dim >= 2");
        if (per_class_source.size() != static_cast<std::size_t>(num_classes) ||
            per_class_target.size() != static_cast<std::size_t>(num_classes))
            throw std::invalid_argument("SyntheticSpec: per-class count lists must have C entries");
        for (int c = 0; c < num_classes; ++c) {
            if (per_class_source[c] < 0 || per_class_target[c] < 0)
                throw std::invalid_argument("SyntheticSpec: counts must be nonnegative");
            if (per_class_source[c] == 0 && per_class_target[c] == 0)
                throw std::invalid_argument("SyntheticSpec: class " + std::to_string(c) +
                                            " is empty in both domains");
        }
        if (class_separation < 0.0 || domain_shift < 0.0)
            throw std::invalid_argument("SyntheticSpec: separation and shift must be nonnegative");
    }
};

inline DomainPair generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int C = spec.num_classes;
    const int m = spec.dim;

    // Class means pairwise `class_separation` apart when C <= dim (scaled
    // coordinate axes), random directions otherwise. Centering the means
    // keeps the pooled cloud near the origin.
    Eigen::MatrixXd means(m, C);
    if (C <= m) {
        means.setZero();
        const double a = spec.class_separation / std::sqrt(2.0);
        for (int c = 0; c < C; ++c)
            means(c, c) = a;
    } else {
        for (int c = 0; c < C; ++c) {
            Eigen::VectorXd dir(m);
            for (int i = 0; i < m; ++i)
                dir(i) = gauss(rng);
            const double norm = dir.norm();
            if (norm < 1e-12)
                dir.setUnit(0);
            else
                dir /= norm;
            means.col(c) = (spec.class_separation / std::sqrt(2.0)) * dir;
        }
    }
    const Eigen::VectorXd centroid = means.rowwise().mean();
    means.colwise() -= centroid;

    Eigen::VectorXd shift = Eigen::VectorXd::Zero(m);
    if (spec.domain_shift > 0.0) {
        for (int i = 0; i < m; ++i)
            shift(i) = gauss(rng);
        const double norm = shift.norm();
        if (norm < 1e-12)
            shift.setUnit(0);
        else
            shift /= norm;
        shift *= spec.domain_shift;
    }

    const auto draw_domain = [&](const std::vector<int>& counts, const Eigen::VectorXd& offset) {
        int n = 0;
        for (int c : counts)
            n += c;
        FeatureMatrix X(m, n);
        std::vector<int> ids;
        ids.reserve(static_cast<std::size_t>(n));
        int col = 0;
        for (int c = 0; c < C; ++c) {
            for (int k = 0; k < counts[static_cast<std::size_t>(c)]; ++k) {
                for (int i = 0; i < m; ++i)
                    X(i, col) = means(i, c) + offset(i) + gauss(rng);
                ids.push_back(c);
                ++col;
            }
        }
        return std::pair<FeatureMatrix, std::vector<int>>(std::move(X), std::move(ids));
    };

    auto [Xs, ids_s] = draw_domain(spec.per_class_source, Eigen::VectorXd::Zero(m));
    auto [Xt, ids_t] = draw_domain(spec.per_class_target, shift);

    DomainPair pair;
    pair.source_features = std::move(Xs);
    pair.source_labels = HardLabels(std::move(ids_s), C);
    pair.target_features = std::move(Xt);
    pair.target_truth = HardLabels(std::move(ids_t), C);
    pair.num_classes = C;
    pair.validate();
    return pair;
}

namespace detail {

// Chooses `drop` members of `index_pool` via a partial Fisher-Yates pass and
// returns the kept indices in their original order.
inline std::vector<int> drop_random(const std::vector<int>& index_pool, int drop,
                                    std::mt19937_64& rng) {
    std::vector<int> pool = index_pool;
    const int n = static_cast<int>(pool.size());
    for (int i = 0; i < drop; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<int> kept(pool.begin() + drop, pool.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

inline FeatureMatrix select_columns(const FeatureMatrix& X, const std::vector<int>& cols) {
    FeatureMatrix out(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = X.col(cols[j]);
    return out;
}

}  // namespace detail

/// Label-distribution-shift protocol: removes floor(drop_fraction * n_c)
/// randomly chosen samples of every class in the first half of classes from
/// the source, and of every class in the latter half from the target.
inline DomainPair simulate_label_shift(const DomainPair& pair, double drop_fraction,
                                       std::uint64_t seed) {
    pair.validate();
    if (drop_fraction < 0.0 || drop_fraction >= 1.0)
        throw std::invalid_argument("simulate_label_shift: drop_fraction must lie in [0, 1)");
    if (!pair.target_truth)
        throw std::invalid_argument("simulate_label_shift: target ground truth required");

    const int C = pair.num_classes;
    const int half = C / 2;
    std::mt19937_64 rng(seed);

    const auto kept_indices = [&](const HardLabels& labels, bool first_half, bool is_source) {
        std::vector<std::vector<int>> by_class(static_cast<std::size_t>(C));
        for (int j = 0; j < labels.size(); ++j)
            by_class[static_cast<std::size_t>(labels.ids[static_cast<std::size_t>(j)])].push_back(j);
        std::vector<int> kept;
        kept.reserve(static_cast<std::size_t>(labels.size()));
        for (int c = 0; c < C; ++c) {
            auto& members = by_class[static_cast<std::size_t>(c)];
            const bool affected = first_half ? (c < half) : (c >= half);
            if (!affected || members.empty()) {
                kept.insert(kept.end(), members.begin(), members.end());
                continue;
            }
            const int drop = static_cast<int>(std::floor(
                drop_fraction * static_cast<double>(members.size())));
            if (is_source && drop >= static_cast<int>(members.size()))
                throw std::runtime_error("simulate_label_shift: source class " +
                                         std::to_string(c) + " would be emptied");
            const std::vector<int> kept_c =
                drop > 0 ? detail::drop_random(members, drop, rng) : members;
            kept.insert(kept.end(), kept_c.begin(), kept_c.end());
        }
        std::sort(kept.begin(), kept.end());
        return kept;
    };

    const std::vector<int> keep_s = kept_indices(pair.source_labels, /*first_half=*/true, true);
    const std::vector<int> keep_t = kept_indices(*pair.target_truth, /*first_half=*/false, false);

    DomainPair out;
    out.num_classes = C;
    out.source_features = detail::select_columns(pair.source_features, keep_s);
    out.target_features = detail::select_columns(pair.target_features, keep_t);
    out.source_labels.num_classes = C;
    for (int j : keep_s)
        out.source_labels.ids.push_back(pair.source_labels.ids[static_cast<std::size_t>(j)]);
    HardLabels truth;
    truth.num_classes = C;
    for (int j : keep_t)
        truth.ids.push_back(pair.target_truth->ids[static_cast<std::size_t>(j)]);
    out.target_truth = std::move(truth);
    out.validate();
    return out;
}

}  // namespace ujmmd
