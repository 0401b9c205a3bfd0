#include "fdeval/pipeline.hpp"

#include <algorithm>
#include <unordered_set>

#include "fdeval/error.hpp"
#include "fdeval/gaussian_fd.hpp"
#include "fdeval/parallel.hpp"
#include "fdeval/random.hpp"

namespace fdeval {
namespace {

Eigen::MatrixXd stack_blocks(const std::vector<Eigen::MatrixXd>& blocks, std::span<const std::size_t> draw,
                             Eigen::Index dim) {
    Eigen::Index rows = 0;
    for (auto q : draw) rows += blocks[q].rows();
    Eigen::MatrixXd out(rows, dim);
    Eigen::Index at = 0;
    for (auto q : draw) {
        const auto& b = blocks[q];
        if (b.rows() == 0) continue;
        out.middleRows(at, b.rows()) = b;
        at += b.rows();
    }
    return out;
}

std::vector<std::size_t> identity_draw(std::size_t n) {
    std::vector<std::size_t> draw(n);
    for (std::size_t i = 0; i < n; ++i) draw[i] = i;
    return draw;
}

void validate(const FdOptions& opts) {
    if (opts.k < 1) throw ValidationError("FD cutoff k must be >= 1");
    if (opts.relevance_threshold < 1) throw ValidationError("relevance threshold must be >= 1");
    if (!(opts.max_missing_fraction >= 0.0)) throw ValidationError("missing-embedding threshold must be >= 0");
}

std::string cutoff_name(const char* base, std::size_t k) { return std::string(base) + "@" + std::to_string(k); }

SystemReport evaluate_system(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store,
                             const CompareConfig& config, std::size_t threads) {
    SystemReport sys;
    sys.name = run.system_tag();
    sys.warnings = run.warnings();
    for (const auto k : config.cutoffs) {
        const MetricConfig mc{k, config.relevance_threshold, config.gain};
        if (config.mrr) {
            const auto name = cutoff_name("MRR", k);
            const auto r = mrr_at_k(run, qrels, mc);
            sys.metrics[name] = r.mean;
            if (config.n_resamples > 0 && r.per_query.size() >= 2) {
                auto b = bootstrap_metric(r.per_query, config.n_resamples, config.confidence, config.seed, threads);
                b.metric_name = name;
                sys.bootstrap[name] = b;
            }
        }
        if (config.ndcg) {
            const auto name = cutoff_name("nDCG", k);
            const auto r = ndcg_at_k(run, qrels, mc);
            sys.metrics[name] = r.mean;
            if (!r.excluded.empty()) sys.excluded_queries[name] = r.excluded;
            if (config.n_resamples > 0 && r.per_query.size() >= 2) {
                auto b = bootstrap_metric(r.per_query, config.n_resamples, config.confidence, config.seed, threads);
                b.metric_name = name;
                sys.bootstrap[name] = b;
            }
        }
        for (const auto mode : {FdMode::standard, FdMode::urr}) {
            if (mode == FdMode::standard ? !config.fd : !config.fd_urr) continue;
            const FdOptions opts{k, config.relevance_threshold, mode, config.max_missing_fraction};
            const auto name = fd_metric_name(k, mode);
            const auto pools = build_pools(run, qrels, store, opts);
            const auto all = identity_draw(pools.query_ids.size());
            auto r = pooled_fd(pools, all, opts);
            sys.metrics[name] = r.value;
            sys.fd_details[name] = r;
            if (config.n_resamples > 0) {
                auto b = bootstrap(
                    pools.query_ids.size(), config.n_resamples, config.confidence, config.seed,
                    [&](std::span<const std::size_t> draw) { return pooled_fd(pools, draw, opts).value; }, threads);
                b.metric_name = name;
                sys.bootstrap[name] = b;
            }
        }
    }
    return sys;
}

EvalReport make_report(const CompareConfig& config, const EmbeddingStore& store) {
    if (config.cutoffs.empty()) throw ValidationError("at least one cutoff is required");
    if (!config.mrr && !config.ndcg && !config.fd && !config.fd_urr) throw ValidationError("no metrics configured");
    EvalReport report;
    auto& s = report.settings;
    s.cutoffs = config.cutoffs;
    s.urr = config.fd_urr;
    s.relevance_threshold = config.relevance_threshold;
    s.gain = config.gain;
    s.max_missing_fraction = config.max_missing_fraction;
    s.seed = config.seed;
    s.n_resamples = config.n_resamples;
    s.confidence = config.confidence;
    s.store_encoder = store.encoder();
    s.store_dim = store.dim();
    s.store_count = store.count();
    for (const auto k : config.cutoffs) {
        if (config.mrr) report.metric_names.push_back(cutoff_name("MRR", k));
        if (config.ndcg) report.metric_names.push_back(cutoff_name("nDCG", k));
        if (config.fd) report.metric_names.push_back(fd_metric_name(k, FdMode::standard));
        if (config.fd_urr) report.metric_names.push_back(fd_metric_name(k, FdMode::urr));
    }
    return report;
}

}  // namespace

std::string_view to_string(FdMode mode) { return mode == FdMode::standard ? "standard" : "urr"; }

std::string fd_metric_name(std::size_t k, FdMode mode) {
    return cutoff_name("FD", k) + (mode == FdMode::urr ? "-URR" : "");
}

QueryPools build_pools(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store, const FdOptions& opts) {
    validate(opts);
    std::unordered_set<std::string> judged;
    if (opts.mode == FdMode::urr) {
        for (const auto& qid : qrels.query_ids()) {
            for (const auto& j : qrels.judgments(qid)) judged.insert(j.doc_id);
        }
    }

    QueryPools pools;
    std::size_t requested = 0;
    for (const auto& qid : qrels.query_ids()) {
        std::vector<std::string> relevant;
        for (const auto& j : qrels.judgments(qid)) {
            if (j.grade >= opts.relevance_threshold) relevant.push_back(j.doc_id);
        }
        std::vector<std::string> retrieved;
        for (const auto& d : run.ranking(qid)) {
            if (retrieved.size() == opts.k) break;
            if (opts.mode == FdMode::urr && judged.count(d.doc_id)) continue;
            retrieved.push_back(d.doc_id);
        }
        if (retrieved.empty()) ++pools.queries_skipped;

        auto rel = store.gather(relevant);
        auto ret = store.gather(retrieved);
        requested += relevant.size() + retrieved.size();
        pools.missing_embedding_count += rel.missing.size() + ret.missing.size();
        pools.query_ids.push_back(qid);
        pools.relevant.push_back(std::move(rel.rows));
        pools.retrieved.push_back(std::move(ret.rows));
        std::erase_if(relevant, [&](const std::string& id) { return !store.contains(id); });
        std::erase_if(retrieved, [&](const std::string& id) { return !store.contains(id); });
        pools.relevant_ids.push_back(std::move(relevant));
        pools.retrieved_ids.push_back(std::move(retrieved));
    }
    if (requested > 0) {
        const double rate = static_cast<double>(pools.missing_embedding_count) / static_cast<double>(requested);
        if (rate > opts.max_missing_fraction) {
            throw ValidationError(std::to_string(pools.missing_embedding_count) + " of " + std::to_string(requested) +
                                  " pool documents have no embedding (limit " +
                                  std::to_string(opts.max_missing_fraction * 100.0) + "%)");
        }
    }
    return pools;
}

FdResult pooled_fd(const QueryPools& pools, std::span<const std::size_t> draw, const FdOptions& opts) {
    const auto dim = [&] {
        for (const auto& b : pools.relevant) if (b.cols() > 0) return b.cols();
        for (const auto& b : pools.retrieved) if (b.cols() > 0) return b.cols();
        return Eigen::Index{0};
    }();
    const Eigen::MatrixXd relevant = stack_blocks(pools.relevant, draw, dim);
    const Eigen::MatrixXd retrieved = stack_blocks(pools.retrieved, draw, dim);
    if (relevant.rows() < 2 || retrieved.rows() < 2) {
        throw ValidationError("FD needs at least 2 embedded documents per pool (relevant " +
                              std::to_string(relevant.rows()) + ", retrieved " + std::to_string(retrieved.rows()) + ")");
    }

    const auto fd = frechet_distance_detailed(fit_gaussian(relevant), fit_gaussian(retrieved));
    FdResult r;
    r.value = fd.value;
    r.k = opts.k;
    r.mode = opts.mode;
    r.relevant_pool_size = static_cast<std::size_t>(relevant.rows());
    r.retrieved_pool_size = static_cast<std::size_t>(retrieved.rows());
    r.missing_embedding_count = pools.missing_embedding_count;
    r.queries_skipped = pools.queries_skipped;
    r.regularized = fd.regularized;
    r.clamp_warning = fd.clamp_warning;
    for (auto q : draw) r.queries_used += pools.retrieved[q].rows() > 0 ? 1 : 0;
    return r;
}

FdResult fd_at_k(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store, std::size_t k,
                 int relevance_threshold, double max_missing_fraction) {
    const FdOptions opts{k, relevance_threshold, FdMode::standard, max_missing_fraction};
    const auto pools = build_pools(run, qrels, store, opts);
    return pooled_fd(pools, identity_draw(pools.query_ids.size()), opts);
}

FdResult fd_urr_at_k(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store, std::size_t k,
                     int relevance_threshold, double max_missing_fraction) {
    const FdOptions opts{k, relevance_threshold, FdMode::urr, max_missing_fraction};
    const auto pools = build_pools(run, qrels, store, opts);
    return pooled_fd(pools, identity_draw(pools.query_ids.size()), opts);
}

Qrels sparsify_qrels(const Qrels& qrels, std::size_t max_per_query, std::uint64_t seed, int relevance_threshold,
                     SparsifyDiagnostics* diagnostics) {
    if (max_per_query < 1) throw ValidationError("max_per_query must be >= 1");
    if (relevance_threshold < 1) throw ValidationError("relevance threshold must be >= 1");
    SparsifyDiagnostics diag;
    Qrels out;
    for (const auto& qid : qrels.query_ids()) {
        const auto judgments = qrels.judgments(qid);
        std::map<int, std::vector<std::size_t>, std::greater<>> tiers;
        for (std::size_t i = 0; i < judgments.size(); ++i) {
            if (judgments[i].grade >= relevance_threshold) tiers[judgments[i].grade].push_back(i);
        }
        if (tiers.empty()) {
            ++diag.queries_without_relevant;
            continue;
        }

        auto rng = keyed_generator(seed, qid);
        std::vector<bool> keep(judgments.size(), false);
        std::size_t remaining = max_per_query;
        for (auto& [grade, members] : tiers) {
            if (remaining == 0) break;
            if (members.size() > remaining) {
                // partial Fisher-Yates: the first `remaining` slots are a uniform sample
                for (std::size_t i = 0; i < remaining; ++i) {
                    const auto j = i + static_cast<std::size_t>(uniform_index(rng, members.size() - i));
                    std::swap(members[i], members[j]);
                }
                members.resize(remaining);
            }
            for (auto i : members) keep[i] = true;
            diag.tier_usage[grade] += members.size();
            remaining -= members.size();
        }
        for (std::size_t i = 0; i < judgments.size(); ++i) {
            if (keep[i]) out.add(qid, judgments[i].doc_id, judgments[i].grade);
        }
    }
    if (diagnostics) *diagnostics = std::move(diag);
    return out;
}

BootstrapResult bootstrap_fd(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store,
                             const FdOptions& opts, std::size_t n_resamples, double confidence, std::uint64_t seed,
                             std::size_t threads) {
    const auto pools = build_pools(run, qrels, store, opts);
    auto result = bootstrap(
        pools.query_ids.size(), n_resamples, confidence, seed,
        [&](std::span<const std::size_t> draw) { return pooled_fd(pools, draw, opts).value; }, threads);
    result.metric_name = fd_metric_name(opts.k, opts.mode);
    return result;
}

EvalReport evaluate_run(const RunFile& run, const Qrels& qrels, const EmbeddingStore& store,
                        const CompareConfig& config) {
    EvalReport report = make_report(config, store);
    report.systems.push_back(evaluate_system(run, qrels, store, config, config.threads));
    if (report.systems.back().name.empty()) report.systems.back().name = "system-1";
    return report;
}

EvalReport compare_systems(const std::vector<RunFile>& runs, const Qrels& qrels, const EmbeddingStore& store,
                           const CompareConfig& config) {
    if (runs.size() < 2) throw ValidationError("compare needs at least 2 runs, got " + std::to_string(runs.size()));
    EvalReport report = make_report(config, store);
    report.systems.resize(runs.size());
    parallel_for(runs.size(), config.threads, [&](std::size_t i) {
        report.systems[i] = evaluate_system(runs[i], qrels, store, config, 1);
    });

    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < report.systems.size(); ++i) {
        auto& name = report.systems[i].name;
        if (name.empty()) name = "system-" + std::to_string(i + 1);
        if (const int n = ++seen[name]; n > 1) name += "#" + std::to_string(n);
    }

    const auto& names = report.metric_names;
    for (std::size_t a = 0; a < names.size(); ++a) {
        for (std::size_t b = a; b < names.size(); ++b) {
            std::vector<double> xs, ys;
            for (const auto& sys : report.systems) {
                xs.push_back(sys.metrics.at(names[a]));
                ys.push_back(sys.metrics.at(names[b]));
            }
            CorrelationEntry entry{names[a], names[b], std::nullopt};
            try {
                entry.result = kendall_tau(xs, ys);
            } catch (const ValidationError&) {
                // tau undefined when a metric ties across every system
            }
            report.correlations.push_back(std::move(entry));
        }
    }
    return report;
}

}  // namespace fdeval
