#include "fdeval/ir_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fdeval/error.hpp"

namespace fdeval {
namespace {

double gain_of(int grade, Gain gain) {
    if (grade <= 0) return 0.0;
    return gain == Gain::linear ? static_cast<double>(grade) : std::exp2(static_cast<double>(grade)) - 1.0;
}

double discount(std::size_t position) {
    // position is 0-based; rank = position + 1
    return 1.0 / std::log2(static_cast<double>(position) + 2.0);
}

}  // namespace

std::string_view to_string(Gain gain) {
    return gain == Gain::linear ? "linear" : "exp";
}

Gain parse_gain(std::string_view text) {
    if (text == "linear") return Gain::linear;
    if (text == "exp" || text == "exponential") return Gain::exponential;
    throw ValidationError("unknown gain '" + std::string(text) + "' (expected linear or exp)");
}

void MetricConfig::validate() const {
    if (k < 1) throw ValidationError("metric cutoff k must be >= 1");
    if (relevance_threshold < 1) throw ValidationError("relevance threshold must be >= 1");
}

MetricResult mrr_at_k(const RunFile& run, const Qrels& qrels, const MetricConfig& cfg) {
    cfg.validate();
    MetricResult result;
    double total = 0.0;
    for (const auto& qid : qrels.query_ids()) {
        const auto ranking = run.ranking(qid);
        const auto depth = std::min(cfg.k, ranking.size());
        double rr = 0.0;
        for (std::size_t i = 0; i < depth; ++i) {
            const auto grade = qrels.grade(qid, ranking[i].doc_id);
            if (grade && *grade >= cfg.relevance_threshold) {
                rr = 1.0 / static_cast<double>(i + 1);
                break;
            }
        }
        result.per_query[qid] = rr;
        total += rr;
    }
    result.mean = qrels.query_count() ? total / static_cast<double>(qrels.query_count()) : 0.0;
    return result;
}

MetricResult ndcg_at_k(const RunFile& run, const Qrels& qrels, const MetricConfig& cfg) {
    cfg.validate();
    MetricResult result;
    double total = 0.0;
    std::size_t counted = 0;
    for (const auto& qid : qrels.query_ids()) {
        std::vector<int> grades;
        for (const auto& j : qrels.judgments(qid)) grades.push_back(j.grade);
        std::sort(grades.begin(), grades.end(), std::greater<>());
        double ideal = 0.0;
        for (std::size_t i = 0; i < std::min(cfg.k, grades.size()); ++i) ideal += gain_of(grades[i], cfg.gain) * discount(i);
        if (ideal <= 0.0) {
            result.excluded.push_back(qid);
            continue;
        }
        const auto ranking = run.ranking(qid);
        double dcg = 0.0;
        for (std::size_t i = 0; i < std::min(cfg.k, ranking.size()); ++i) {
            if (const auto grade = qrels.grade(qid, ranking[i].doc_id)) dcg += gain_of(*grade, cfg.gain) * discount(i);
        }
        const double score = dcg / ideal;
        result.per_query[qid] = score;
        total += score;
        ++counted;
    }
    result.mean = counted ? total / static_cast<double>(counted) : 0.0;
    return result;
}

}  // namespace fdeval
