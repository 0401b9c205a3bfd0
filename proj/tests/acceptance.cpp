// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fdeval/error.hpp"
#include "fdeval/gaussian_fd.hpp"
#include "fdeval/ir_metrics.hpp"
#include "fdeval/parallel.hpp"
#include "fdeval/pipeline.hpp"
#include "fdeval/statistics.hpp"
#include "fdeval/trec_io.hpp"
#include "support.hpp"

using namespace fdeval;
using fdeval::testing::make_planted_world;
using fdeval::testing::PlantedConfig;

namespace {

/// Collects failed expectations for one criterion.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    bool ok() const { return failed_ == 0; }
    std::string summary() const {
        std::string s;
        for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
        if (failed_ > failures_.size()) s += "; +" + std::to_string(failed_ - failures_.size()) + " more";
        return s;
    }

private:
    std::vector<std::string> failures_;
    std::size_t failed_ = 0;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<void(Checks&)> body;
};

void fd_identities(Checks& c) {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd cov = fdeval::testing::random_spd(6, rng);
    const Eigen::VectorXd mu = fdeval::testing::gaussian_matrix(6, 1, rng);
    const auto g = make_gaussian<double>(mu, cov);
    const double same = frechet_distance(g, g);
    c.expect(std::abs(same) <= 1e-8, "identical stats gave " + fmt(same));

    const double uni = frechet_distance_1d(0.0, 1.0, 3.0, 2.0);
    c.expect(std::abs(uni - 10.0) <= 1e-9, "univariate gave " + fmt(uni));
    const auto ua = make_gaussian<double>(Eigen::VectorXd::Constant(1, 0.0), Eigen::MatrixXd::Constant(1, 1, 1.0));
    const auto ub = make_gaussian<double>(Eigen::VectorXd::Constant(1, 3.0), Eigen::MatrixXd::Constant(1, 1, 4.0));
    const double uni_matrix = frechet_distance(ua, ub);
    c.expect(std::abs(uni_matrix - 10.0) <= 1e-9, "univariate via matrices gave " + fmt(uni_matrix));

    const auto da = make_gaussian<double>(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    const auto db = make_gaussian<double>(Eigen::VectorXd::Ones(2), 4.0 * Eigen::MatrixXd::Identity(2, 2));
    const double diag = frechet_distance(da, db);
    c.expect(std::abs(diag - 4.0) <= 1e-9, "commuting diagonal gave " + fmt(diag));
}

void fd_oracle(Checks& c) {
    for (const Eigen::Index p : {2, 8, 64}) {
        std::mt19937_64 rng(100 + static_cast<std::uint64_t>(p));
        double worst = 0.0;
        for (int pair = 0; pair < 100; ++pair) {
            const Eigen::MatrixXd ca = fdeval::testing::random_spd(p, rng);
            const Eigen::MatrixXd cb = fdeval::testing::random_spd(p, rng);
            const Eigen::VectorXd ma = fdeval::testing::gaussian_matrix(p, 1, rng);
            const Eigen::VectorXd mb = fdeval::testing::gaussian_matrix(p, 1, rng);
            const double got = frechet_distance(make_gaussian<double>(ma, ca), make_gaussian<double>(mb, cb));
            const double want = fdeval::testing::oracle_frechet(ma, ca, mb, cb);
            worst = std::max(worst, std::abs(got - want) / std::max(std::abs(want), 1e-300));
        }
        c.expect(worst <= 1e-6, "p=" + std::to_string(p) + " worst relative error " + fmt(worst));
    }
}

void singular_regime(Checks& c) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(seed);
        const Eigen::MatrixXd xa = fdeval::testing::gaussian_matrix(40, 64, rng);
        const Eigen::MatrixXd xb = fdeval::testing::gaussian_matrix(40, 64, rng).array() + 0.5;
        try {
            const auto r = frechet_distance_detailed(fit_gaussian(xa), fit_gaussian(xb));
            c.expect(std::isfinite(r.value) && r.value >= 0.0, "seed " + std::to_string(seed) + " gave " + fmt(r.value));
            c.expect(!r.regularized, "seed " + std::to_string(seed) + " needed regularization");
        } catch (const std::exception& e) {
            c.expect(false, "seed " + std::to_string(seed) + ": " + e.what());
        }
    }
}

PlantedConfig planted_config() {
    PlantedConfig cfg;
    cfg.queries = 2000;
    cfg.dim = 8;
    cfg.shifts = {0.0, 1.0, 2.0};
    cfg.hit_rates = {0.9, 0.6, 0.3};
    cfg.seed = 2024;
    return cfg;
}

bool strictly_increasing(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

void planted_ordering(Checks& c) {
    const auto w = make_planted_world(planted_config());
    std::vector<double> fd, mrr;
    for (const auto& run : w.runs) {
        fd.push_back(fd_at_k(run, w.qrels, w.store, 10).value);
        mrr.push_back(mrr_at_k(run, w.qrels, {10, 1, Gain::linear}).mean);
    }
    c.expect(strictly_increasing(fd), "FD@10 not increasing: " + fmt(fd[0]) + ", " + fmt(fd[1]) + ", " + fmt(fd[2]));
    std::vector<double> neg_mrr(mrr.size());
    std::transform(mrr.begin(), mrr.end(), neg_mrr.begin(), std::negate<>());
    c.expect(strictly_increasing(neg_mrr),
             "MRR@10 not decreasing: " + fmt(mrr[0]) + ", " + fmt(mrr[1]) + ", " + fmt(mrr[2]));
    const std::vector<double> quality{3, 2, 1};
    const double tau = kendall_tau(quality, fd).tau;
    c.expect(tau == -1.0, "tau(quality, FD@10) = " + fmt(tau));
}

void urr_ordering(Checks& c) {
    auto cfg = planted_config();
    cfg.nonrelevant_judged_per_query = 2;
    const auto w = make_planted_world(cfg);
    std::vector<double> fd, fd_urr;
    for (const auto& run : w.runs) {
        fd.push_back(fd_at_k(run, w.qrels, w.store, 10).value);
        const auto r = fd_urr_at_k(run, w.qrels, w.store, 10);
        fd_urr.push_back(r.value);
        c.expect(r.retrieved_pool_size == cfg.queries * 10, "URR pool not filled to k");
    }
    c.expect(strictly_increasing(fd_urr),
             "FD@10-URR not increasing: " + fmt(fd_urr[0]) + ", " + fmt(fd_urr[1]) + ", " + fmt(fd_urr[2]));
    const double tau = kendall_tau(fd, fd_urr).tau;
    c.expect(tau == 1.0, "tau(FD@10, FD@10-URR) = " + fmt(tau));
}

void sparsification_stability(Checks& c) {
    auto cfg = planted_config();
    cfg.relevant_per_query = 10;
    const auto w = make_planted_world(cfg);
    const auto& run = w.runs[2];
    const double full = fd_at_k(run, w.qrels, w.store, 10).value;
    double worst = 0.0;
    for (const std::size_t max : {1u, 5u, 10u}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto sparse = sparsify_qrels(w.qrels, max, seed);
            const double v = fd_at_k(run, sparse, w.store, 10).value;
            worst = std::max(worst, std::abs(v - full) / full);
        }
    }
    c.expect(worst < 0.10, "largest relative deviation " + fmt(worst));
}

void bootstrap_criterion(Checks& c) {
    auto cfg = planted_config();
    cfg.queries = 500;
    const auto w = make_planted_world(cfg);
    const FdOptions opts{10, 1, FdMode::standard, 0.01};
    const auto a = bootstrap_fd(w.runs[1], w.qrels, w.store, opts, 1000, 0.95, 17, default_thread_count());
    const auto b = bootstrap_fd(w.runs[1], w.qrels, w.store, opts, 1000, 0.95, 17, 1);
    c.expect(a.lower == b.lower && a.upper == b.upper && a.mean == b.mean, "same seed gave different FD intervals");
    c.expect(a.lower <= a.mean && a.mean <= a.upper && a.lower < a.upper, "malformed FD interval");

    const auto mrr = mrr_at_k(w.runs[1], w.qrels, {10, 1, Gain::linear});
    const auto ma = bootstrap_metric(mrr.per_query, 1000, 0.95, 17);
    const auto mb = bootstrap_metric(mrr.per_query, 1000, 0.95, 17, 4);
    c.expect(ma.lower == mb.lower && ma.upper == mb.upper && ma.mean == mb.mean, "same seed gave different MRR intervals");

    std::map<std::string, double> flat;
    for (int i = 0; i < 500; ++i) flat["q" + std::to_string(i)] = 0.7;
    const auto z = bootstrap_metric(flat, 1000, 0.95, 5);
    c.expect(z.lower == z.upper && z.mean == 0.7 && z.lower == 0.7, "all-equal scores gave nonzero width");
}

RunFile run_from(const std::vector<std::pair<std::string, std::vector<std::string>>>& rankings) {
    RunFile run("fixture");
    for (const auto& [qid, docs] : rankings) {
        std::vector<RankedDoc> ranked;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            ranked.push_back({docs[i], static_cast<int>(i + 1), static_cast<double>(docs.size() - i)});
        }
        run.set_ranking(qid, ranked);
    }
    return run;
}

void metric_oracles(Checks& c) {
    Qrels q;
    q.add("q1", "a", 1);
    q.add("q2", "b", 2);
    q.add("q2", "c", 1);
    q.add("q3", "d", 3);
    q.add("q3", "e", 0);
    q.add("q4", "f", 1);
    q.add("q5", "g", 0);
    const auto run = run_from({{"q1", {"a"}}, {"q2", {"x", "c", "b"}}, {"q3", {"e", "y", "z", "d"}}, {"q5", {"g"}}});

    const auto mrr = mrr_at_k(run, q, {10, 1, Gain::linear});
    const std::map<std::string, double> mrr_expected{{"q1", 1.0}, {"q2", 0.5}, {"q3", 0.25}, {"q4", 0.0}, {"q5", 0.0}};
    c.expect(mrr.per_query == mrr_expected, "MRR per-query values differ");
    c.expect(mrr.mean == 1.75 / 5.0, "MRR@10 = " + fmt(mrr.mean));

    const double l3 = std::log2(3.0);
    const std::map<std::string, double> ndcg_expected{
        {"q1", 1.0}, {"q2", (1.0 / l3 + 1.0) / (2.0 + 1.0 / l3)}, {"q3", 1.0 / std::log2(5.0)}, {"q4", 0.0}};
    const auto ndcg = ndcg_at_k(run, q, {10, 1, Gain::linear});
    c.expect(ndcg.per_query == ndcg_expected, "nDCG per-query values differ");
    c.expect(ndcg.excluded == std::vector<std::string>{"q5"}, "q5 should be excluded from nDCG");
    const double mean = (1.0 + ndcg_expected.at("q2") + ndcg_expected.at("q3") + 0.0) / 4.0;
    c.expect(std::abs(ndcg.mean - mean) <= 1e-15, "nDCG@10 = " + fmt(ndcg.mean) + ", expected " + fmt(mean));

    std::vector<int> perm{0, 1, 2, 3, 4};
    const std::vector<double> base{0, 1, 2, 3, 4};
    std::size_t seen = 0;
    do {
        int concordant = 0, discordant = 0;
        for (int i = 0; i < 5; ++i) {
            for (int j = i + 1; j < 5; ++j) (perm[i] < perm[j] ? concordant : discordant)++;
        }
        const std::vector<double> other(perm.begin(), perm.end());
        const double tau = kendall_tau(base, other).tau;
        c.expect(tau == (concordant - discordant) / 10.0, "tau mismatch on a permutation");
        ++seen;
    } while (std::next_permutation(perm.begin(), perm.end()));
    c.expect(seen == 120, "expected 120 permutations");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

template <class Parse>
void expect_parse_error(Checks& c, Parse parse, const std::string& text, std::size_t line, const std::string& label) {
    std::istringstream in(text);
    try {
        parse(in);
        c.expect(false, label + ": accepted");
    } catch (const ParseError& e) {
        c.expect(e.line() == line, label + ": reported line " + std::to_string(e.line()));
    }
}

void parser_golden(Checks& c) {
    const std::string dir = FDEVAL_TEST_DATA;
    std::ostringstream q, r;
    write_qrels(q, load_qrels(dir + "/qrels.golden.txt"));
    write_run(r, load_run(dir + "/run.golden.txt"));
    c.expect(q.str() == slurp(dir + "/qrels.golden.txt"), "qrels golden file did not round-trip");
    c.expect(r.str() == slurp(dir + "/run.golden.txt"), "run golden file did not round-trip");

    auto qp = [](std::istream& in) { return parse_qrels(in); };
    auto rp = [](std::istream& in) { return parse_run(in); };
    expect_parse_error(c, qp, "q1 0 d1 1\nq1 0 d2\n", 2, "qrels field count");
    expect_parse_error(c, qp, "q1 0 d1 1\n\nq1 0 d2 x\n", 3, "qrels non-integer grade");
    expect_parse_error(c, qp, "q1 0 d1 -2\n", 1, "qrels negative grade");
    expect_parse_error(c, qp, "q1 0 d1 1\nq2 0 d1 1\nq1 0 d1 2\n", 3, "qrels duplicate judgment");
    expect_parse_error(c, rp, "q1 Q0 d1 1 1.0 t\nq1 Q0 d2 2 0.5\n", 2, "run field count");
    expect_parse_error(c, rp, "q1 Q0 d1 one 1.0 t\n", 1, "run non-integer rank");
    expect_parse_error(c, rp, "q1 Q0 d1 1 1.0 t\nq1 Q0 d2 0 0.5 t\n", 2, "run rank below one");
    expect_parse_error(c, rp, "q1 Q0 d1 1 high t\n", 1, "run non-numeric score");
    expect_parse_error(c, rp, "q1 Q0 d1 1 inf t\n", 1, "run non-finite score");
    expect_parse_error(c, rp, "q1 Q0 d1 1 1.0 t\nq2 Q0 d1 1 1.0 t\nq1 Q0 d1 2 0.5 t\n", 3, "run duplicate doc");
    expect_parse_error(c, rp, "q1 Q0 d1 1 1.0 t\nq1 Q0 d2 1 0.5 t\n", 2, "run duplicate rank");
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"fd-analytic-identities", 1.0, fd_identities},
        {"fd-oracle-equivalence", 30.0, fd_oracle},
        {"singular-covariance-regime", 10.0, singular_regime},
        {"planted-ordering", 60.0, planted_ordering},
        {"urr-ordering", 60.0, urr_ordering},
        {"sparsification-stability", 60.0, sparsification_stability},
        {"bootstrap", 30.0, bootstrap_criterion},
        {"metric-oracles", 10.0, metric_oracles},
        {"parser-golden-files", 10.0, parser_golden},
    };
    int failed = 0;
    for (const auto& criterion : criteria) {
        Checks checks;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.body(checks);
        } catch (const std::exception& e) {
            checks.expect(false, std::string("unexpected exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        checks.expect(seconds < criterion.budget_seconds,
                      "took " + fmt(seconds) + " s, budget " + fmt(criterion.budget_seconds) + " s");
        std::printf("%s %-28s %8.3f s%s%s\n", checks.ok() ? "PASS" : "FAIL", criterion.name.c_str(), seconds,
                    checks.ok() ? "" : "  ", checks.summary().c_str());
        failed += !checks.ok();
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
