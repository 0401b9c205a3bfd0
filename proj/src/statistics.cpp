#include "fdeval/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "fdeval/error.hpp"
#include "fdeval/parallel.hpp"
#include "fdeval/random.hpp"

namespace fdeval {
namespace {

// Mean computed relative to the first element; all-equal input yields that
// element exactly.
double shifted_mean(std::span<const double> values) {
    const double ref = values.front();
    double acc = 0.0;
    for (double v : values) acc += v - ref;
    return ref + acc / static_cast<double>(values.size());
}

struct TieSums {
    double pairs = 0;    // sum t(t-1)/2
    double v0 = 0;       // sum t(t-1)(2t+5)
    double v1 = 0;       // sum t(t-1)
    double v2 = 0;       // sum t(t-1)(t-2)
};

TieSums tie_sums(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    TieSums s;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        s.pairs += t * (t - 1) / 2;
        s.v0 += t * (t - 1) * (2 * t + 5);
        s.v1 += t * (t - 1);
        s.v2 += t * (t - 1) * (t - 2);
        i = j;
    }
    return s;
}

}  // namespace

double percentile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw ValidationError("percentile of empty data");
    q = std::clamp(q, 0.0, 1.0);
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<std::size_t> resample_indices(std::size_t count, std::uint64_t seed, std::size_t index) {
    auto rng = keyed_generator(seed, static_cast<std::uint64_t>(index));
    std::vector<std::size_t> draw(count);
    for (auto& d : draw) d = static_cast<std::size_t>(uniform_index(rng, count));
    return draw;
}

BootstrapResult bootstrap(std::size_t count, std::size_t n_resamples, double confidence, std::uint64_t seed,
                          const std::function<double(std::span<const std::size_t>)>& statistic,
                          std::size_t threads) {
    if (count < 2) throw ValidationError("bootstrap needs at least 2 items, got " + std::to_string(count));
    if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
    if (n_resamples < 1) throw ValidationError("bootstrap needs at least one resample");

    std::vector<double> stats(n_resamples);
    parallel_for(n_resamples, threads, [&](std::size_t r) {
        const auto draw = resample_indices(count, seed, r);
        stats[r] = statistic(draw);
    });

    BootstrapResult result;
    result.n_resamples = n_resamples;
    result.confidence = confidence;
    result.seed = seed;
    result.mean = shifted_mean(stats);
    std::sort(stats.begin(), stats.end());
    const double tail = (1.0 - confidence) / 2.0;
    result.lower = percentile(stats, tail);
    result.upper = percentile(stats, 1.0 - tail);
    return result;
}

BootstrapResult bootstrap_metric(const std::map<std::string, double>& per_query_scores, std::size_t n_resamples,
                                 double confidence, std::uint64_t seed, std::size_t threads) {
    std::vector<double> scores;
    scores.reserve(per_query_scores.size());
    for (const auto& [_, s] : per_query_scores) scores.push_back(s);
    return bootstrap(
        scores.size(), n_resamples, confidence, seed,
        [&](std::span<const std::size_t> draw) {
            const double ref = scores[draw.front()];
            double acc = 0.0;
            for (auto i : draw) acc += scores[i] - ref;
            return ref + acc / static_cast<double>(draw.size());
        },
        threads);
}

CorrelationResult kendall_tau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("kendall_tau: length mismatch (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    const std::size_t n = a.size();
    if (n < 2) throw ValidationError("kendall_tau needs at least 2 items");

    double concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const int s = ((a[i] > a[j]) - (a[i] < a[j])) * ((b[i] > b[j]) - (b[i] < b[j]));
            if (s > 0) ++concordant;
            else if (s < 0) ++discordant;
        }
    }
    const double nd = static_cast<double>(n);
    const double n0 = nd * (nd - 1) / 2;
    const TieSums ta = tie_sums(a);
    const TieSums tb = tie_sums(b);
    if (ta.pairs == n0 || tb.pairs == n0) throw ValidationError("kendall_tau: all values tied; tau is undefined");

    CorrelationResult r;
    r.n_systems = n;
    r.approximate = n < 10;
    const double s = concordant - discordant;
    r.tau = std::clamp(s / std::sqrt((n0 - ta.pairs) * (n0 - tb.pairs)), -1.0, 1.0);

    double var = (nd * (nd - 1) * (2 * nd + 5) - ta.v0 - tb.v0) / 18.0 + ta.v1 * tb.v1 / (2 * nd * (nd - 1));
    if (n > 2) var += ta.v2 * tb.v2 / (9 * nd * (nd - 1) * (nd - 2));
    const double z = s / std::sqrt(var);
    r.p_value = std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0);
    return r;
}

}  // namespace fdeval
