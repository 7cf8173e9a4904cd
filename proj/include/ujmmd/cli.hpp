#pragma once

#include "ujmmd/config.hpp"
#include "ujmmd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace ujmmd {

namespace detail {

/// Worker cap: UJMMD_THREADS when set, hardware concurrency otherwise.
inline std::size_t worker_cap() {
    if (const char* env = std::getenv("UJMMD_THREADS")) {
        const int v = parse_int(env, "UJMMD_THREADS");
        if (v < 1)
            throw std::runtime_error("UJMMD_THREADS must be a positive integer");
        return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(0..count-1) across up to worker_cap() threads. Each index owns a
/// preallocated output slot, so results are identical for any thread count.
template <typename Fn>
void run_jobs(std::size_t count, Fn&& fn) {
    const std::size_t workers = std::min(worker_cap(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                    fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool)
        t.join();
    for (const std::exception_ptr& e : errors)
        if (e)
            std::rethrow_exception(e);
}

/// Presets reordered to the canonical list order so reports are stable
/// regardless of how the user listed them.
inline std::vector<std::string> canonical_presets(const std::vector<std::string>& requested) {
    std::vector<std::string> ordered;
    for (const std::string& name : preset_names())
        for (const std::string& r : requested)
            if (r == name && std::find(ordered.begin(), ordered.end(), name) == ordered.end())
                ordered.push_back(name);
    return ordered;
}

inline void finish_table(const ResultTable& table, const ExperimentConfig& cfg,
                         std::ostream& out) {
    print_table(table, out);
    if (cfg.out_path) {
        write_table_file(table, *cfg.out_path, cfg.format);
        out << "wrote " << *cfg.out_path << "\n";
    }
}

}  // namespace detail

/// Standard adaptation runs: one row per (preset, seed), synthetic pairs
/// redrawn per seed, followed by mean/std aggregate rows when repeats > 1.
inline ResultTable cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
    cfg.validate();
    const int repeats = cfg.repeats.value_or(1);
    const std::vector<std::string> presets = detail::canonical_presets(cfg.presets);
    const std::string task = task_name(cfg);

    std::optional<DomainPair> shared;
    if (cfg.data)
        shared = load_pair(cfg, cfg.seed);

    struct Job {
        std::string preset;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const std::string& preset : presets)
        for (int r = 0; r < repeats; ++r)
            jobs.push_back({preset, cfg.seed + static_cast<std::uint64_t>(r)});

    std::vector<ResultRow> rows(jobs.size());
    detail::run_jobs(jobs.size(), [&](std::size_t i) {
        const Job& job = jobs[i];
        const MethodSpec method = make_method(job.preset, cfg.method);
        const DomainPair pair = shared ? *shared : load_pair(cfg, job.seed);
        const RunResult res = run_da(pair, method);
        ResultRow row{task, job.preset, std::to_string(job.seed), "run", 0.0, 0.0, 0.0, {}};
        row.final_accuracy = res.final_accuracy;
        row.feature_distance = res.final_feature_distance;
        row.hsi = res.final_hsi;
        row.per_iteration_accuracy = res.per_iteration_accuracy;
        rows[i] = std::move(row);
    });

    ResultTable table;
    std::size_t i = 0;
    for (const std::string& preset : presets) {
        const std::size_t first = i;
        for (int r = 0; r < repeats; ++r, ++i)
            table.rows.push_back(rows[i]);
        if (repeats > 1)
            table.append_aggregates(task, preset,
                                    {rows.begin() + static_cast<std::ptrdiff_t>(first),
                                     rows.begin() + static_cast<std::ptrdiff_t>(i)});
    }
    detail::finish_table(table, cfg, out);
    return table;
}

/// Label-shift robustness: per preset, `repeats` (default 10) independent
/// 50%-drop simulations on the task pair, reported per run plus mean/std.
inline ResultTable cmd_shift(const ExperimentConfig& cfg, std::ostream& out) {
    cfg.validate();
    const int repeats = cfg.repeats.value_or(10);
    const std::vector<std::string> presets = detail::canonical_presets(cfg.presets);
    const std::string task = task_name(cfg);
    const DomainPair pair = load_pair(cfg, cfg.seed);
    if (!pair.target_truth)
        throw std::runtime_error(
            "cmd_shift: the drop protocol needs target labels (synthetic data or a "
            "target_labels file)");

    std::vector<ShiftSummary> summaries(presets.size());
    detail::run_jobs(presets.size(), [&](std::size_t i) {
        const MethodSpec method = make_method(presets[i], cfg.method);
        summaries[i] = run_label_shift_experiment(pair, method, repeats, cfg.seed);
    });

    ResultTable table;
    for (std::size_t p = 0; p < presets.size(); ++p) {
        const ShiftSummary& summary = summaries[p];
        std::vector<ResultRow> runs;
        for (std::size_t r = 0; r < summary.per_run_results.size(); ++r) {
            const RunResult& res = summary.per_run_results[r];
            ResultRow row{task, presets[p],
                          std::to_string(cfg.seed + static_cast<std::uint64_t>(r)), "run",
                          0.0, 0.0, 0.0, {}};
            row.final_accuracy = res.final_accuracy;
            row.feature_distance = res.final_feature_distance;
            row.hsi = res.final_hsi;
            row.per_iteration_accuracy = res.per_iteration_accuracy;
            runs.push_back(std::move(row));
        }
        table.rows.insert(table.rows.end(), runs.begin(), runs.end());
        table.append_aggregates(task, presets[p], runs);
    }
    detail::finish_table(table, cfg, out);
    return table;
}

/// Ablation diagnostics: accuracy, class-conditional feature distance, and
/// the within-domain dependence metric of the final embedding, all measured
/// against ground-truth target labels.
inline ResultTable cmd_ablate(const ExperimentConfig& cfg, std::ostream& out) {
    cfg.validate();
    const int repeats = cfg.repeats.value_or(1);
    const std::vector<std::string> presets = detail::canonical_presets(cfg.presets);
    const std::string task = task_name(cfg);

    std::optional<DomainPair> shared;
    if (cfg.data) {
        shared = load_pair(cfg, cfg.seed);
        if (!shared->target_truth)
            throw std::runtime_error(
                "cmd_ablate: ground-truth measurement needs a target_labels file");
    }

    struct Job {
        std::string preset;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const std::string& preset : presets)
        for (int r = 0; r < repeats; ++r)
            jobs.push_back({preset, cfg.seed + static_cast<std::uint64_t>(r)});

    std::vector<ResultRow> rows(jobs.size());
    detail::run_jobs(jobs.size(), [&](std::size_t i) {
        const Job& job = jobs[i];
        const MethodSpec method = make_method(job.preset, cfg.method);
        const DomainPair pair = shared ? *shared : load_pair(cfg, job.seed);
        const AblationMetrics metrics = evaluate_ablation(pair, method);
        ResultRow row{task, job.preset, std::to_string(job.seed), "run", 0.0, 0.0, 0.0, {}};
        row.final_accuracy = metrics.final_accuracy;
        row.feature_distance = metrics.feature_distance;
        row.hsi = metrics.hsi;
        rows[i] = std::move(row);
    });

    ResultTable table;
    std::size_t i = 0;
    for (const std::string& preset : presets) {
        const std::size_t first = i;
        for (int r = 0; r < repeats; ++r, ++i)
            table.rows.push_back(rows[i]);
        if (repeats > 1)
            table.append_aggregates(task, preset,
                                    {rows.begin() + static_cast<std::ptrdiff_t>(first),
                                     rows.begin() + static_cast<std::ptrdiff_t>(i)});
    }
    detail::finish_table(table, cfg, out);
    return table;
}

}  // namespace ujmmd
