#pragma once

// Test-only helpers: scratch directories, a planted-geometry world with a
// known system ordering, and an FD oracle independent of the library path.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <unistd.h>
#include <string>
#include <vector>

#include "fdeval/embedding_store.hpp"
#include "fdeval/trec_io.hpp"

namespace fdeval::testing {

class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("fdeval-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n01(rng);
    return m;
}

/// Random SPD matrix A A^T / m with A of shape p x (p + extra).
inline Eigen::MatrixXd random_spd(Eigen::Index p, std::mt19937_64& rng, Eigen::Index extra = 4) {
    const Eigen::MatrixXd a = gaussian_matrix(p, p + extra, rng);
    return a * a.transpose() / static_cast<double>(p + extra);
}

/// Oracle: evaluates |mu_a - mu_b|^2 + Tr(S_a + S_b) - 2 sum_i sqrt(lambda_i(S_a S_b))
/// from the eigenvalues of the non-symmetric product, via a general
/// (Hessenberg/Schur) eigensolver.
inline double oracle_frechet(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a, const Eigen::VectorXd& mu_b,
                             const Eigen::MatrixXd& cov_b) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(cov_a * cov_b, false);
    double trace_sqrt = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        trace_sqrt += std::sqrt(std::max(es.eigenvalues()[i].real(), 0.0));
    }
    return (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * trace_sqrt;
}

/// A synthetic collection where relevant documents sit around the origin and
/// system s retrieves documents around origin + shifts[s] * u, u a unit vector.
/// With probability hit_rates[s] a query's first relevant doc is placed at rank 1.
struct PlantedConfig {
    std::size_t queries = 200;
    Eigen::Index dim = 8;
    std::size_t relevant_per_query = 1;
    std::size_t ranking_depth = 20;
    /// Grade-0 judgments per query, embedded like retrieved noise of system 0.
    std::size_t nonrelevant_judged_per_query = 0;
    std::vector<double> shifts{0.0, 1.0, 2.0};
    std::vector<double> hit_rates{0.9, 0.6, 0.3};
    std::uint64_t seed = 1;
};

struct PlantedWorld {
    Qrels qrels;
    std::vector<RunFile> runs;
    EmbeddingStore store;
};

inline std::string relevant_id(std::size_t q, std::size_t j) {
    return "q" + std::to_string(q) + "-r" + std::to_string(j);
}

inline PlantedWorld make_planted_world(const PlantedConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const Eigen::VectorXd direction = Eigen::VectorXd::Ones(cfg.dim) / std::sqrt(static_cast<double>(cfg.dim));

    std::vector<std::string> ids;
    std::vector<Eigen::VectorXd> vecs;
    auto emit = [&](const std::string& id, const Eigen::VectorXd& center) {
        Eigen::VectorXd v(cfg.dim);
        for (Eigen::Index i = 0; i < cfg.dim; ++i) v[i] = center[i] + n01(rng);
        ids.push_back(id);
        vecs.push_back(v);
    };

    PlantedWorld world;
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(cfg.dim);
    static const int kGrades[] = {3, 2, 1};
    for (std::size_t q = 0; q < cfg.queries; ++q) {
        const std::string qid = "q" + std::to_string(q);
        for (std::size_t j = 0; j < cfg.relevant_per_query; ++j) {
            const auto id = relevant_id(q, j);
            emit(id, origin);
            world.qrels.add(qid, id, kGrades[(j * 3) / std::max<std::size_t>(cfg.relevant_per_query, 1)]);
        }
        for (std::size_t j = 0; j < cfg.nonrelevant_judged_per_query; ++j) {
            const auto id = qid + "-n" + std::to_string(j);
            emit(id, origin + cfg.shifts.front() * direction);
            world.qrels.add(qid, id, 0);
        }
    }
    for (std::size_t s = 0; s < cfg.shifts.size(); ++s) {
        RunFile run("sys" + std::to_string(s));
        const Eigen::VectorXd center = origin + cfg.shifts[s] * direction;
        for (std::size_t q = 0; q < cfg.queries; ++q) {
            const std::string qid = "q" + std::to_string(q);
            std::vector<RankedDoc> ranking;
            int rank = 1;
            if (u01(rng) < cfg.hit_rates[s]) {
                ranking.push_back({relevant_id(q, 0), rank, 100.0 - rank});
                ++rank;
            }
            for (std::size_t j = 0; ranking.size() < cfg.ranking_depth; ++j) {
                const auto id = "s" + std::to_string(s) + "-q" + std::to_string(q) + "-d" + std::to_string(j);
                emit(id, center);
                ranking.push_back({id, rank, 100.0 - rank});
                ++rank;
            }
            run.set_ranking(qid, std::move(ranking));
        }
        world.runs.push_back(std::move(run));
    }

    RowMatrixXf matrix(static_cast<Eigen::Index>(vecs.size()), cfg.dim);
    for (std::size_t i = 0; i < vecs.size(); ++i) matrix.row(static_cast<Eigen::Index>(i)) = vecs[i].cast<float>().transpose();
    world.store = EmbeddingStore(std::move(ids), std::move(matrix), "planted-gaussian");
    return world;
}

}  // namespace fdeval::testing
