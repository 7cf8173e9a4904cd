#pragma once

#include "ujmmd/data.hpp"
#include "ujmmd/pipeline.hpp"
#include "ujmmd/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ujmmd {

/// Method knobs the user set explicitly (config file or flag). Anything
/// left unset keeps the preset's value.
struct MethodOverrides {
    std::optional<double> delta;
    std::optional<double> lambda;
    std::optional<int> dim;
    std::optional<int> iters;
    std::optional<std::string> kernel;
    std::optional<double> bandwidth;
    std::optional<int> degree;
    std::optional<double> offset;
    std::optional<double> ridge;
    std::optional<int> knn_k;
};

/// Builds the MethodSpec for a preset name with user overrides applied.
inline MethodSpec make_method(const std::string& preset, const MethodOverrides& ov) {
    MethodSpec spec = method_preset(preset);
    if (ov.delta)
        spec.delta = *ov.delta;
    if (ov.lambda)
        spec.lambda = *ov.lambda;
    if (ov.dim)
        spec.dim = *ov.dim;
    if (ov.iters)
        spec.iterations = *ov.iters;
    if (ov.kernel)
        spec.kernel.family = kernel_family_from_string(*ov.kernel);
    if (ov.bandwidth)
        spec.kernel.bandwidth = *ov.bandwidth;
    if (ov.degree)
        spec.kernel.degree = *ov.degree;
    if (ov.offset)
        spec.kernel.offset = *ov.offset;
    if (ov.ridge)
        spec.ridge = *ov.ridge;
    if (ov.knn_k)
        spec.knn_k = *ov.knn_k;
    spec.validate();
    return spec;
}

/// File-backed experiment inputs.
struct DataPaths {
    std::string source_features;
    std::string source_labels;
    std::string target_features;
    std::optional<std::string> target_labels;
    int num_classes = 0;
    std::string name;  // task label for reports; derived from paths if empty
};

/// One experiment description: where the data comes from (exactly one of
/// file paths / synthetic spec), which presets to run, and how to report.
struct ExperimentConfig {
    std::optional<SyntheticSpec> synthetic;
    std::optional<DataPaths> data;
    std::vector<std::string> presets = {"WC"};
    std::uint64_t seed = 0;
    std::optional<int> repeats;  // per-command default when unset
    std::optional<std::string> out_path;
    std::string format = "csv";
    MethodOverrides method;

    void validate() const {
        if (synthetic.has_value() == data.has_value())
            throw std::invalid_argument(
                "config: exactly one of a [data] section and a [synthetic] section is required");
        if (synthetic)
            synthetic->validate();
        if (data) {
            if (data->source_features.empty() || data->source_labels.empty() ||
                data->target_features.empty())
                throw std::invalid_argument(
                    "config: [data] needs source_features, source_labels, target_features");
            if (data->num_classes < 2)
                throw std::invalid_argument("config: [data] needs classes >= 2");
        }
        if (presets.empty())
            throw std::invalid_argument("config: at least one preset required");
        const auto& known = preset_names();
        for (const std::string& p : presets)
            if (std::find(known.begin(), known.end(), p) == known.end()) {
                std::string valid;
                for (const std::string& k : known)
                    valid += (valid.empty() ? "" : ", ") + k;
                throw std::invalid_argument("config: unknown preset '" + p +
                                            "' (valid: " + valid + ")");
            }
        if (repeats && *repeats < 1)
            throw std::invalid_argument("config: repeats must be >= 1");
        if (format != "csv" && format != "json")
            throw std::invalid_argument("config: format must be csv or json");
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        const std::string part(trim(text.substr(
            start, (comma == std::string::npos ? text.size() : comma) - start)));
        if (!part.empty())
            parts.push_back(part);
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return parts;
}

inline int parse_int(const std::string& value, const std::string& context) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": not an integer: '" + value + "'");
    }
}

inline double parse_real(const std::string& value, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": not a number: '" + value + "'");
    }
}

inline std::vector<int> parse_int_list(const std::string& value, const std::string& context) {
    std::vector<int> out;
    for (const std::string& part : split_list(value))
        out.push_back(parse_int(part, context));
    if (out.empty())
        throw std::runtime_error(context + ": empty list");
    return out;
}

}  // namespace detail

/// Parses the flat key=value config format. Sections are [synthetic],
/// [data], [run], and [method]; '#' and ';' start comments. Unknown keys
/// are errors so typos do not silently fall back to defaults.
inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);

    ExperimentConfig cfg;
    cfg.presets.clear();
    std::string section;
    std::string line;
    int line_no = 0;
    bool saw_synthetic = false;
    bool saw_data = false;
    SyntheticSpec synth;
    DataPaths data;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string ctx = path + ":" + std::to_string(line_no);
        std::string_view sv = detail::trim(line);
        const std::size_t comment = std::min(sv.find('#'), sv.find(';'));
        if (comment != std::string_view::npos)
            sv = detail::trim(sv.substr(0, comment));
        if (sv.empty())
            continue;
        if (sv.front() == '[') {
            if (sv.back() != ']')
                throw std::runtime_error(ctx + ": unterminated section header");
            section = std::string(sv.substr(1, sv.size() - 2));
            if (section != "synthetic" && section != "data" && section != "run" &&
                section != "method")
                throw std::runtime_error(ctx + ": unknown section [" + section + "]");
            if (section == "synthetic")
                saw_synthetic = true;
            if (section == "data")
                saw_data = true;
            continue;
        }
        const std::size_t eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error(ctx + ": expected key = value");
        const std::string key(detail::trim(sv.substr(0, eq)));
        const std::string value(detail::trim(sv.substr(eq + 1)));
        if (key.empty() || value.empty())
            throw std::runtime_error(ctx + ": empty key or value");

        if (section == "synthetic") {
            if (key == "classes")
                synth.num_classes = detail::parse_int(value, ctx);
            else if (key == "per_class_source")
                synth.per_class_source = detail::parse_int_list(value, ctx);
            else if (key == "per_class_target")
                synth.per_class_target = detail::parse_int_list(value, ctx);
            else if (key == "dim")
                synth.dim = detail::parse_int(value, ctx);
            else if (key == "separation")
                synth.class_separation = detail::parse_real(value, ctx);
            else if (key == "shift")
                synth.domain_shift = detail::parse_real(value, ctx);
            else
                throw std::runtime_error(ctx + ": unknown key '" + key + "' in [synthetic]");
        } else if (section == "data") {
            if (key == "source_features")
                data.source_features = value;
            else if (key == "source_labels")
                data.source_labels = value;
            else if (key == "target_features")
                data.target_features = value;
            else if (key == "target_labels")
                data.target_labels = value;
            else if (key == "classes")
                data.num_classes = detail::parse_int(value, ctx);
            else if (key == "name")
                data.name = value;
            else
                throw std::runtime_error(ctx + ": unknown key '" + key + "' in [data]");
        } else if (section == "run") {
            if (key == "preset")
                cfg.presets = detail::split_list(value);
            else if (key == "seed") {
                const int v = detail::parse_int(value, ctx);
                if (v < 0)
                    throw std::runtime_error(ctx + ": seed must be nonnegative");
                cfg.seed = static_cast<std::uint64_t>(v);
            }
            else if (key == "repeats")
                cfg.repeats = detail::parse_int(value, ctx);
            else if (key == "out")
                cfg.out_path = value;
            else if (key == "format")
                cfg.format = value;
            else
                throw std::runtime_error(ctx + ": unknown key '" + key + "' in [run]");
        } else if (section == "method") {
            if (key == "delta")
                cfg.method.delta = detail::parse_real(value, ctx);
            else if (key == "lambda")
                cfg.method.lambda = detail::parse_real(value, ctx);
            else if (key == "dim")
                cfg.method.dim = detail::parse_int(value, ctx);
            else if (key == "iters")
                cfg.method.iters = detail::parse_int(value, ctx);
            else if (key == "kernel")
                cfg.method.kernel = value;
            else if (key == "bandwidth")
                cfg.method.bandwidth = detail::parse_real(value, ctx);
            else if (key == "degree")
                cfg.method.degree = detail::parse_int(value, ctx);
            else if (key == "offset")
                cfg.method.offset = detail::parse_real(value, ctx);
            else if (key == "ridge")
                cfg.method.ridge = detail::parse_real(value, ctx);
            else if (key == "knn_k")
                cfg.method.knn_k = detail::parse_int(value, ctx);
            else
                throw std::runtime_error(ctx + ": unknown key '" + key + "' in [method]");
        } else {
            throw std::runtime_error(ctx + ": key outside any section");
        }
    }

    if (saw_synthetic)
        cfg.synthetic = synth;
    if (saw_data)
        cfg.data = data;
    if (cfg.presets.empty())
        cfg.presets = {"WC"};
    return cfg;
}

namespace detail {

inline std::string strip_extension(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    const std::size_t dot = base.find_last_of('.');
    if (dot != std::string::npos && dot > 0)
        base = base.substr(0, dot);
    return base;
}

}  // namespace detail

inline std::string task_name(const ExperimentConfig& cfg) {
    if (cfg.synthetic)
        return "synthetic";
    if (!cfg.data->name.empty())
        return cfg.data->name;
    return detail::strip_extension(cfg.data->source_features) + "->" +
           detail::strip_extension(cfg.data->target_features);
}

/// Materializes the experiment's domain pair. Synthetic pairs are redrawn
/// per seed; file-backed pairs ignore the seed.
inline DomainPair load_pair(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.synthetic) {
        SyntheticSpec spec = *cfg.synthetic;
        spec.seed = seed;
        return generate_synthetic(spec);
    }
    const DataPaths& d = *cfg.data;
    auto [Xs, Ls] = load_domain(d.source_features, d.source_labels, d.num_classes);
    auto [Xt, Lt] = load_domain(d.target_features, d.target_labels, d.num_classes);
    DomainPair pair;
    pair.source_features = std::move(Xs);
    pair.source_labels = std::move(*Ls);
    pair.target_features = std::move(Xt);
    pair.target_truth = std::move(Lt);
    pair.num_classes = d.num_classes;
    pair.validate();
    return pair;
}

/// One report row. `seed` is a number for per-run rows and "aggregate" for
/// the mean and population-std rows (in that order); `statistic` says which
/// of the three a row is.
struct ResultRow {
    std::string task;
    std::string preset;
    std::string seed;
    std::string statistic;  // "run", "mean", or "std"
    double final_accuracy = std::numeric_limits<double>::quiet_NaN();
    double feature_distance = 0.0;
    double hsi = 0.0;
    std::vector<double> per_iteration_accuracy;
};

struct ResultTable {
    std::vector<ResultRow> rows;

    /// Appends mean and population-std rows over the given per-run rows.
    void append_aggregates(const std::string& task, const std::string& preset,
                           const std::vector<ResultRow>& runs) {
        const double n = static_cast<double>(runs.size());
        ResultRow mean{task, preset, "aggregate", "mean", 0.0, 0.0, 0.0, {}};
        for (const ResultRow& r : runs) {
            mean.final_accuracy += r.final_accuracy / n;
            mean.feature_distance += r.feature_distance / n;
            mean.hsi += r.hsi / n;
        }
        ResultRow dev{task, preset, "aggregate", "std", 0.0, 0.0, 0.0, {}};
        for (const ResultRow& r : runs) {
            dev.final_accuracy +=
                (r.final_accuracy - mean.final_accuracy) * (r.final_accuracy - mean.final_accuracy) / n;
            dev.feature_distance +=
                (r.feature_distance - mean.feature_distance) * (r.feature_distance - mean.feature_distance) / n;
            dev.hsi += (r.hsi - mean.hsi) * (r.hsi - mean.hsi) / n;
        }
        dev.final_accuracy = std::sqrt(dev.final_accuracy);
        dev.feature_distance = std::sqrt(dev.feature_distance);
        dev.hsi = std::sqrt(dev.hsi);
        rows.push_back(std::move(mean));
        rows.push_back(std::move(dev));
    }
};

inline void write_csv(const ResultTable& table, std::ostream& out) {
    out << "task,preset,seed,final_accuracy,feature_distance,hsi\n";
    out.precision(10);
    for (const ResultRow& r : table.rows)
        out << r.task << ',' << r.preset << ',' << r.seed << ',' << r.final_accuracy << ','
            << r.feature_distance << ',' << r.hsi << '\n';
}

inline void write_json(const ResultTable& table, std::ostream& out) {
    nlohmann::json records = nlohmann::json::array();
    for (const ResultRow& r : table.rows) {
        nlohmann::json rec;
        rec["task"] = r.task;
        rec["preset"] = r.preset;
        rec["seed"] = r.seed;
        rec["statistic"] = r.statistic;
        if (std::isnan(r.final_accuracy))
            rec["final_accuracy"] = nullptr;
        else
            rec["final_accuracy"] = r.final_accuracy;
        rec["feature_distance"] = r.feature_distance;
        rec["hsi"] = r.hsi;
        if (r.statistic == "run")
            rec["per_iteration_accuracy"] = r.per_iteration_accuracy;
        records.push_back(std::move(rec));
    }
    out << records.dump(2) << '\n';
}

inline void write_table_file(const ResultTable& table, const std::string& path,
                             const std::string& format) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    if (format == "json")
        write_json(table, out);
    else
        write_csv(table, out);
}

/// Human-oriented fixed-width rendering for the terminal.
inline void print_table(const ResultTable& table, std::ostream& out) {
    out << std::left << std::setw(16) << "task" << std::setw(14) << "preset" << std::setw(11)
        << "seed" << std::right << std::setw(15) << "accuracy" << std::setw(19)
        << "feature_distance" << std::setw(14) << "hsi" << '\n';
    out << std::string(89, '-') << '\n';
    for (const ResultRow& r : table.rows) {
        std::string seed_label = r.seed;
        if (r.statistic == "mean")
            seed_label = "mean";
        else if (r.statistic == "std")
            seed_label = "std";
        out << std::left << std::setw(16) << r.task << std::setw(14) << r.preset << std::setw(11)
            << seed_label << std::right << std::fixed << std::setprecision(4) << std::setw(15)
            << r.final_accuracy << std::setw(19) << std::setprecision(6) << r.feature_distance
            << std::setw(14) << r.hsi << '\n';
        out.unsetf(std::ios_base::fixed);
    }
}

}  // namespace ujmmd
