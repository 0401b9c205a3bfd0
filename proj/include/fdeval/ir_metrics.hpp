#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fdeval/trec_io.hpp"

namespace fdeval {

enum class Gain { linear, exponential };

std::string_view to_string(Gain gain);
/// Accepts "linear", "exp", "exponential"; throws ValidationError otherwise.
Gain parse_gain(std::string_view text);

struct MetricConfig {
    std::size_t k = 10;
    /// Grades at or above this count as relevant for binary metrics.
    int relevance_threshold = 1;
    Gain gain = Gain::linear;

    void validate() const;
};

struct MetricResult {
    double mean = 0.0;
    std::map<std::string, double> per_query;
    /// Queries left out of the mean (nDCG: zero ideal DCG).
    std::vector<std::string> excluded;
};

/// Reciprocal rank of the first relevant document in the top k, averaged over
/// every query in `qrels`. Queries absent from the run score 0.
MetricResult mrr_at_k(const RunFile& run, const Qrels& qrels, const MetricConfig& cfg);

/// Graded nDCG@k with a log2(rank + 1) discount.
MetricResult ndcg_at_k(const RunFile& run, const Qrels& qrels, const MetricConfig& cfg);

}  // namespace fdeval
