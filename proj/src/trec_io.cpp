#include "fdeval/trec_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "fdeval/error.hpp"

namespace fdeval {
namespace {

bool valid_id(const std::string& id) {
    return !id.empty() &&
           std::none_of(id.begin(), id.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

bool skippable(const std::vector<std::string_view>& fields) {
    return fields.empty() || fields.front().front() == '#';
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

}  // namespace

// ---------------------------------------------------------------- Qrels

void Qrels::add(const std::string& query_id, const std::string& doc_id, int grade) {
    if (!valid_id(query_id) || !valid_id(doc_id)) {
        throw ValidationError("query and doc ids must be non-empty without whitespace");
    }
    if (grade < 0) throw ValidationError("negative grade for " + query_id + "/" + doc_id);
    auto [it, inserted] = queries_.try_emplace(query_id);
    QueryEntry& entry = it->second;
    if (!entry.index.emplace(doc_id, grade).second) {
        throw ValidationError("duplicate judgment " + query_id + "/" + doc_id);
    }
    if (inserted) order_.push_back(query_id);
    entry.judgments.push_back({doc_id, grade});
}

std::span<const Judgment> Qrels::judgments(const std::string& query_id) const {
    auto it = queries_.find(query_id);
    if (it == queries_.end()) return {};
    return it->second.judgments;
}

std::optional<int> Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
    auto it = queries_.find(query_id);
    if (it == queries_.end()) return std::nullopt;
    auto d = it->second.index.find(doc_id);
    if (d == it->second.index.end()) return std::nullopt;
    return d->second;
}

std::size_t Qrels::size() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, entry] : queries_) n += entry.judgments.size();
    return n;
}

void Qrels::merge(const Qrels& other) {
    for (const auto& qid : other.order_) {
        for (const auto& j : other.judgments(qid)) add(qid, j.doc_id, j.grade);
    }
}

bool Qrels::operator==(const Qrels& other) const {
    if (order_ != other.order_) return false;
    for (const auto& qid : order_) {
        const auto a = judgments(qid);
        const auto b = other.judgments(qid);
        if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) return false;
    }
    return true;
}

Qrels parse_qrels(std::istream& in) {
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (skippable(fields)) continue;
        if (fields.size() < 4) {
            throw ParseError(line_no, "expected 4 fields <qid> <iter> <docid> <grade>, got " +
                                          std::to_string(fields.size()));
        }
        const auto grade = parse_number<int>(fields[3]);
        if (!grade) throw ParseError(line_no, "grade is not an integer: '" + std::string(fields[3]) + "'");
        if (*grade < 0) throw ParseError(line_no, "negative grade " + std::to_string(*grade));
        try {
            qrels.add(std::string(fields[0]), std::string(fields[2]), *grade);
        } catch (const ValidationError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return qrels;
}

Qrels load_qrels(const std::string& path) {
    auto in = open_input(path);
    return parse_qrels(in);
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
    for (const auto& qid : qrels.query_ids()) {
        for (const auto& j : qrels.judgments(qid)) {
            out << qid << " 0 " << j.doc_id << ' ' << j.grade << '\n';
        }
    }
}

// ---------------------------------------------------------------- RunFile

void RunFile::set_ranking(const std::string& query_id, std::vector<RankedDoc> ranking) {
    if (!valid_id(query_id)) throw ValidationError("invalid query id '" + query_id + "'");
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const RankedDoc& a, const RankedDoc& b) { return a.rank < b.rank; });
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        const auto& d = ranking[i];
        if (!valid_id(d.doc_id)) throw ValidationError("invalid doc id in query " + query_id);
        if (d.rank < 1) throw ValidationError("non-positive rank for " + query_id + "/" + d.doc_id);
        if (i > 0 && ranking[i - 1].rank == d.rank) {
            throw ValidationError("duplicate rank " + std::to_string(d.rank) + " in query " + query_id);
        }
        if (!seen.insert(d.doc_id).second) {
            throw ValidationError("duplicate doc " + d.doc_id + " in query " + query_id);
        }
    }
    if (rankings_.find(query_id) == rankings_.end()) order_.push_back(query_id);
    rankings_[query_id] = std::move(ranking);
}

std::span<const RankedDoc> RunFile::ranking(const std::string& query_id) const {
    auto it = rankings_.find(query_id);
    if (it == rankings_.end()) return {};
    return it->second;
}

bool RunFile::operator==(const RunFile& other) const {
    if (tag_ != other.tag_ || order_ != other.order_) return false;
    for (const auto& qid : order_) {
        const auto a = ranking(qid);
        const auto b = other.ranking(qid);
        if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) return false;
    }
    return true;
}

RunFile parse_run(std::istream& in) {
    struct Pending {
        std::vector<RankedDoc> docs;
        std::unordered_map<std::string, std::size_t> line_of_doc;
        std::unordered_map<int, std::size_t> line_of_rank;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, Pending> pending;
    std::string tag;
    bool have_tag = false;
    bool mixed_tags = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (skippable(fields)) continue;
        if (fields.size() != 6) {
            throw ParseError(line_no, "expected 6 fields <qid> Q0 <docid> <rank> <score> <tag>, got " +
                                          std::to_string(fields.size()));
        }
        const auto rank = parse_number<int>(fields[3]);
        if (!rank) throw ParseError(line_no, "rank is not an integer: '" + std::string(fields[3]) + "'");
        if (*rank < 1) throw ParseError(line_no, "rank must be positive, got " + std::to_string(*rank));
        const auto score = parse_number<double>(fields[4]);
        if (!score || !std::isfinite(*score)) {
            throw ParseError(line_no, "score is not a finite number: '" + std::string(fields[4]) + "'");
        }
        if (!have_tag) {
            tag = std::string(fields[5]);
            have_tag = true;
        } else if (fields[5] != tag) {
            mixed_tags = true;
        }

        std::string qid(fields[0]);
        std::string doc(fields[2]);
        auto [it, inserted] = pending.try_emplace(qid);
        if (inserted) order.push_back(qid);
        Pending& p = it->second;
        if (auto [d, fresh] = p.line_of_doc.emplace(doc, line_no); !fresh) {
            throw ParseError(line_no, "duplicate doc " + doc + " in query " + qid + " (first at line " +
                                          std::to_string(d->second) + ")");
        }
        if (auto [r, fresh] = p.line_of_rank.emplace(*rank, line_no); !fresh) {
            throw ParseError(line_no, "duplicate rank " + std::to_string(*rank) + " in query " + qid +
                                          " (first at line " + std::to_string(r->second) + ")");
        }
        p.docs.push_back({std::move(doc), *rank, *score});
    }

    RunFile run(tag);
    if (mixed_tags) run.add_warning("run file mixes system tags; using '" + tag + "'");
    for (const auto& qid : order) {
        run.set_ranking(qid, std::move(pending[qid].docs));
        const auto ranking = run.ranking(qid);
        for (std::size_t i = 1; i < ranking.size(); ++i) {
            if (ranking[i].score > ranking[i - 1].score) {
                run.add_warning("query " + qid + ": scores increase with rank at rank " +
                                std::to_string(ranking[i].rank) + "; rank order is used");
                break;
            }
        }
    }
    return run;
}

RunFile load_run(const std::string& path) {
    auto in = open_input(path);
    return parse_run(in);
}

std::string format_score(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void write_run(std::ostream& out, const RunFile& run) {
    for (const auto& qid : run.query_ids()) {
        for (const auto& d : run.ranking(qid)) {
            out << qid << " Q0 " << d.doc_id << ' ' << d.rank << ' ' << format_score(d.score) << ' '
                << run.system_tag() << '\n';
        }
    }
}

RunFile truncate(const RunFile& run, std::size_t k) {
    RunFile out(run.system_tag());
    for (const auto& qid : run.query_ids()) {
        const auto ranking = run.ranking(qid);
        const auto n = std::min(k, ranking.size());
        out.set_ranking(qid, std::vector<RankedDoc>(ranking.begin(), ranking.begin() + n));
    }
    return out;
}

}  // namespace fdeval
