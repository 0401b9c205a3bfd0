#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "fdeval/embedding_store.hpp"
#include "fdeval/ir_metrics.hpp"
#include "fdeval/report.hpp"
#include "fdeval/statistics.hpp"
#include "fdeval/trec_io.hpp"

namespace fdeval {

struct FdOptions {
    std::size_t k = 10;
    int relevance_threshold = 1;
    FdMode mode = FdMode::standard;
    /// Abort when more than this fraction of requested pool rows lack an embedding.
    double max_missing_fraction = 0.01;
};

/// Per-query embedding blocks of the two pools. Queries follow qrels order.
///
/// The relevant pool holds one row per (query, doc) judged at or above the
/// threshold; the retrieved pool holds one row per (query, doc) among the
/// top-k retrieved (standard) or the first k unjudged (urr) documents.
struct QueryPools {
    std::vector<std::string> query_ids;
    std::vector<Eigen::MatrixXd> relevant;
    std::vector<Eigen::MatrixXd> retrieved;
    /// Ids behind the rows above (missing embeddings excluded).
    std::vector<std::vector<std::string>> relevant_ids;
    std::vector<std::vector<std::string>> retrieved_ids;
    std::size_t missing_embedding_count = 0;
    std::size_t queries_skipped = 0;
};

/// Gathers both pools. Throws ValidationError when the missing-embedding
/// rate exceeds the configured threshold.
QueryPools build_pools(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store, const FdOptions& opts);

/// Pooled FD over a query multiset; `draw` indexes into pools.query_ids and a
/// query drawn twice contributes its rows twice.
FdResult pooled_fd(const QueryPools& pools, std::span<const std::size_t> draw, const FdOptions& opts);

FdResult fd_at_k(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store, std::size_t k,
                 int relevance_threshold = 1, double max_missing_fraction = 0.01);

/// FD against the first k documents of each ranking that carry no judgment
/// at all (grade 0 counts as judged).
FdResult fd_urr_at_k(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store, std::size_t k,
                     int relevance_threshold = 1, double max_missing_fraction = 0.01);

struct SparsifyDiagnostics {
    /// Grade -> number of judgments kept at that grade.
    std::map<int, std::size_t> tier_usage;
    std::size_t queries_without_relevant = 0;
};

/// Keeps at most `max_per_query` relevant judgments per query, filling from
/// the highest grade down and sampling uniformly within the tier that
/// overflows the quota. Judgments below `relevance_threshold` (including
/// grade 0) are dropped. Sampling is keyed by (seed, query id).
Qrels sparsify_qrels(const Qrels& qrels, std::size_t max_per_query, std::uint64_t seed,
                     int relevance_threshold = 1, SparsifyDiagnostics* diagnostics = nullptr);

/// Bootstrap of pooled FD over resampled query multisets.
BootstrapResult bootstrap_fd(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store,
                             const FdOptions& opts, std::size_t n_resamples, double confidence, std::uint64_t seed,
                             std::size_t threads = 1);

struct CompareConfig {
    std::vector<std::size_t> cutoffs{10};
    bool mrr = true;
    bool ndcg = true;
    bool fd = true;
    bool fd_urr = false;
    int relevance_threshold = 1;
    Gain gain = Gain::linear;
    double max_missing_fraction = 0.01;
    /// 0 disables bootstrap intervals.
    std::size_t n_resamples = 0;
    double confidence = 0.95;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

std::string fd_metric_name(std::size_t k, FdMode mode);

/// Every configured metric for a single run; no correlations.
EvalReport evaluate_run(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store,
                        const CompareConfig& config);

/// Every configured metric for every run, then Kendall tau-b between every
/// pair of metric-induced system score vectors (diagonal included).
/// Needs at least two runs.
EvalReport compare_systems(const std::vector<RunFile>& runs, const Qrels& qrels, const EmbeddingStore& store,
                           const CompareConfig& config);

}  // namespace fdeval
