#include "fdeval/embedding_store.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <json.hpp>

#include "fdeval/error.hpp"

namespace fdeval {
namespace {

constexpr const char* kMetaFile = "meta.json";
constexpr const char* kIdsFile = "ids.tsv";
constexpr const char* kVectorsFile = "vectors.f32";

std::ifstream open_required(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    if (!std::filesystem::is_regular_file(path)) throw IoError("missing file " + path.string());
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

float decode_le(const unsigned char* p) {
    const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                               (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
    return std::bit_cast<float>(bits);
}

void encode_le(float value, char* p) {
    const auto bits = std::bit_cast<std::uint32_t>(value);
    for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::vector<std::string> ids, RowMatrixXf vectors, std::string encoder)
    : ids_(std::move(ids)), vectors_(std::move(vectors)), encoder_(std::move(encoder)) {
    if (static_cast<Eigen::Index>(ids_.size()) != vectors_.rows()) {
        throw ValidationError("store has " + std::to_string(ids_.size()) + " ids but " +
                              std::to_string(vectors_.rows()) + " vectors");
    }
    if (vectors_.cols() < 1) throw ValidationError("store dimension must be positive");
    index_.reserve(ids_.size());
    for (Eigen::Index i = 0; i < vectors_.rows(); ++i) {
        const auto& id = ids_[static_cast<std::size_t>(i)];
        if (id.empty()) throw ValidationError("empty doc id at row " + std::to_string(i));
        if (!vectors_.row(i).allFinite()) throw ValidationError("non-finite embedding for doc " + id);
        if (!index_.emplace(id, i).second) throw ValidationError("duplicate doc id " + id);
    }
}

Eigen::VectorXd EmbeddingStore::vector(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("no embedding for " + id);
    return vectors_.row(it->second).transpose().cast<double>();
}

Gathered EmbeddingStore::gather(std::span<const std::string> ids) const {
    std::vector<Eigen::Index> rows;
    rows.reserve(ids.size());
    Gathered out;
    for (const auto& id : ids) {
        auto it = index_.find(id);
        if (it == index_.end()) {
            out.missing.push_back(id);
        } else {
            rows.push_back(it->second);
        }
    }
    out.rows.resize(static_cast<Eigen::Index>(rows.size()), vectors_.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.rows.row(static_cast<Eigen::Index>(r)) = vectors_.row(rows[r]).cast<double>();
    }
    return out;
}

bool EmbeddingStore::operator==(const EmbeddingStore& other) const {
    return ids_ == other.ids_ && encoder_ == other.encoder_ && vectors_.rows() == other.vectors_.rows() &&
           vectors_.cols() == other.vectors_.cols() && vectors_ == other.vectors_;
}

EmbeddingStore load_store(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("store directory not found: " + dir.string());

    nlohmann::json meta;
    {
        auto in = open_required(dir / kMetaFile);
        try {
            in >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("meta.json: ") + e.what());
        }
    }
    if (!meta.is_object() || !meta.contains("dim") || !meta.contains("count") ||
        !meta["dim"].is_number_integer() || !meta["count"].is_number_integer()) {
        throw ValidationError("meta.json must carry integer fields 'dim' and 'count'");
    }
    const auto dim = meta["dim"].get<std::int64_t>();
    const auto count = meta["count"].get<std::int64_t>();
    if (dim < 1 || count < 0) throw ValidationError("meta.json: dim must be positive and count non-negative");
    std::string encoder;
    if (auto it = meta.find("encoder"); it != meta.end() && it->is_string()) encoder = it->get<std::string>();

    std::vector<std::string> ids;
    {
        auto in = open_required(dir / kIdsFile);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            ids.push_back(std::move(line));
        }
    }
    if (static_cast<std::int64_t>(ids.size()) != count) {
        throw ValidationError("ids.tsv has " + std::to_string(ids.size()) + " lines, meta count is " +
                              std::to_string(count));
    }

    auto in = open_required(dir / kVectorsFile, std::ios::binary);
    const std::vector<unsigned char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto expected = static_cast<std::uint64_t>(count) * static_cast<std::uint64_t>(dim) * 4u;
    if (payload.size() != expected) {
        throw ValidationError("vectors.f32 has " + std::to_string(payload.size()) + " bytes, expected " +
                              std::to_string(expected) + " (count*dim*4)");
    }
    RowMatrixXf vectors(count, dim);
    const unsigned char* p = payload.data();
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j, p += 4) vectors(i, j) = decode_le(p);
    }
    return EmbeddingStore(std::move(ids), std::move(vectors), std::move(encoder));
}

void write_store(const std::filesystem::path& dir, const EmbeddingStore& store) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const nlohmann::json meta = {{"dim", store.dim()}, {"count", store.count()}, {"encoder", store.encoder()}};
    std::ofstream meta_out(dir / kMetaFile);
    meta_out << meta.dump() << '\n';

    std::ofstream ids_out(dir / kIdsFile, std::ios::binary);
    for (const auto& id : store.ids()) ids_out << id << '\n';

    std::ofstream vec_out(dir / kVectorsFile, std::ios::binary);
    std::vector<char> buffer(store.dim() * 4);
    for (const auto& id : store.ids()) {
        const Eigen::VectorXd v = store.vector(id);
        for (Eigen::Index j = 0; j < v.size(); ++j) encode_le(static_cast<float>(v[j]), &buffer[4 * j]);
        vec_out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    }
    if (!meta_out || !ids_out || !vec_out) throw IoError("failed writing store to " + dir.string());
}

}  // namespace fdeval
