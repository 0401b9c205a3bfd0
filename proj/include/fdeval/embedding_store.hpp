#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fdeval {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Rows of a gather in input order, plus the ids that had no embedding.
struct Gathered {
    Eigen::MatrixXd rows;
    std::vector<std::string> missing;
};

/// Document id -> p-dimensional embedding.
///
/// On disk a store is a directory with three files:
///   meta.json    {"dim": p, "count": n, "encoder": "..."}
///   ids.tsv      n lines, line i names row i
///   vectors.f32  n*p little-endian IEEE-754 float32, row-major
///
/// Vectors are kept in float32 and promoted to double when gathered.
class EmbeddingStore {
public:
    EmbeddingStore() = default;

    /// Throws ValidationError on shape mismatch, non-finite values, or duplicate ids.
    EmbeddingStore(std::vector<std::string> ids, RowMatrixXf vectors, std::string encoder = {});

    std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors_.cols()); }
    std::size_t count() const noexcept { return ids_.size(); }
    const std::string& encoder() const noexcept { return encoder_; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    bool contains(const std::string& id) const { return index_.count(id) != 0; }
    /// Row of `id` promoted to double; throws std::out_of_range if absent.
    Eigen::VectorXd vector(const std::string& id) const;

    /// Rows for `ids` in order, skipping (and reporting) absent ids.
    Gathered gather(std::span<const std::string> ids) const;

    bool operator==(const EmbeddingStore& other) const;

private:
    std::vector<std::string> ids_;
    RowMatrixXf vectors_;
    std::string encoder_;
    std::unordered_map<std::string, Eigen::Index> index_;
};

/// Reads a store directory. Missing files raise IoError; anything
/// inconsistent raises ValidationError.
EmbeddingStore load_store(const std::filesystem::path& dir);

/// Writes the three store files, creating `dir` if needed.
void write_store(const std::filesystem::path& dir, const EmbeddingStore& store);

}  // namespace fdeval
