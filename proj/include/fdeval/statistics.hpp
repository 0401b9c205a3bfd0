#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fdeval {

struct BootstrapResult {
    std::string metric_name;
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t n_resamples = 0;
    double confidence = 0.95;
    std::uint64_t seed = 0;
};

struct CorrelationResult {
    double tau = 0.0;
    double p_value = 1.0;
    std::size_t n_systems = 0;
    /// Normal approximation is rough below 10 systems.
    bool approximate = false;
};

/// Empirical quantile of sorted data, q in [0,1], linear interpolation
/// between closest ranks.
double percentile(std::span<const double> sorted, double q);

/// Indices of one bootstrap resample: `count` draws with replacement from
/// [0, count). Resample `index` of a given seed is the same on every run.
std::vector<std::size_t> resample_indices(std::size_t count, std::uint64_t seed, std::size_t index);

/// Runs `statistic` on n_resamples resamples of `count` items and returns the
/// mean of the resampled statistics with a percentile interval.
/// Resamples may execute concurrently; the result does not depend on it.
BootstrapResult bootstrap(std::size_t count, std::size_t n_resamples, double confidence, std::uint64_t seed,
                          const std::function<double(std::span<const std::size_t>)>& statistic,
                          std::size_t threads = 1);

/// Percentile bootstrap of the mean of per-query scores.
BootstrapResult bootstrap_metric(const std::map<std::string, double>& per_query_scores, std::size_t n_resamples,
                                 double confidence, std::uint64_t seed, std::size_t threads = 1);

/// Kendall tau-b with a normal-approximation two-sided p-value.
/// Throws ValidationError on length mismatch, fewer than 2 items, or a list
/// whose values are all tied.
CorrelationResult kendall_tau(std::span<const double> a, std::span<const double> b);

}  // namespace fdeval
