#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdeval/ir_metrics.hpp"
#include "fdeval/statistics.hpp"

namespace fdeval {

enum class FdMode { standard, urr };

std::string_view to_string(FdMode mode);

/// Pooled Frechet distance of one system, with the bookkeeping needed to
/// judge how much of the input it actually saw.
struct FdResult {
    double value = 0.0;
    std::size_t k = 0;
    FdMode mode = FdMode::standard;
    std::size_t queries_used = 0;
    /// Queries with nothing to contribute to the retrieved pool.
    std::size_t queries_skipped = 0;
    std::size_t relevant_pool_size = 0;
    std::size_t retrieved_pool_size = 0;
    std::size_t missing_embedding_count = 0;
    bool regularized = false;
    bool clamp_warning = false;
};

struct SystemReport {
    std::string name;
    /// Metric name ("MRR@10", "nDCG@10", "FD@10", "FD@10-URR") -> value.
    std::map<std::string, double> metrics;
    std::map<std::string, FdResult> fd_details;
    std::map<std::string, std::vector<std::string>> excluded_queries;
    std::map<std::string, BootstrapResult> bootstrap;
    std::vector<std::string> warnings;
};

struct CorrelationEntry {
    std::string metric_a;
    std::string metric_b;
    /// Empty when tau is undefined (a metric ties across every system).
    std::optional<CorrelationResult> result;
};

struct ReportSettings {
    std::vector<std::size_t> cutoffs;
    bool urr = false;
    int relevance_threshold = 1;
    Gain gain = Gain::linear;
    double max_missing_fraction = 0.01;
    std::uint64_t seed = 0;
    std::size_t n_resamples = 0;
    double confidence = 0.95;
    std::string store_encoder;
    std::size_t store_dim = 0;
    std::size_t store_count = 0;
};

struct EvalReport {
    ReportSettings settings;
    std::vector<std::string> metric_names;
    std::vector<SystemReport> systems;
    std::vector<CorrelationEntry> correlations;
};

/// Rounds to 10 significant digits, the precision of serialized reports.
double round_significant(double value, int digits = 10);

/// Deterministic JSON with `systems`, `correlations`, `settings`, `diagnostics`.
std::string to_json(const EvalReport& report);

/// Fixed-width table, one row per system, three decimals.
std::string to_text(const EvalReport& report);

}  // namespace fdeval
