#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fdeval {

struct Judgment {
    std::string doc_id;
    int grade = 0;

    bool operator==(const Judgment&) const = default;
};

/// Graded relevance judgments, `qid -> doc -> grade`.
///
/// Queries and, within a query, judgments keep their input order so that a
/// parsed file serializes back to the same bytes.
class Qrels {
public:
    /// Throws ValidationError on a duplicate (query, doc) pair, a negative
    /// grade, or an empty/whitespace-bearing id.
    void add(const std::string& query_id, const std::string& doc_id, int grade);

    const std::vector<std::string>& query_ids() const noexcept { return order_; }
    std::span<const Judgment> judgments(const std::string& query_id) const;
    std::optional<int> grade(const std::string& query_id, const std::string& doc_id) const;
    bool judged(const std::string& query_id, const std::string& doc_id) const {
        return grade(query_id, doc_id).has_value();
    }

    std::size_t query_count() const noexcept { return order_.size(); }
    std::size_t size() const noexcept;
    bool empty() const noexcept { return order_.empty(); }

    /// Appends every judgment of `other`; duplicates are an error.
    void merge(const Qrels& other);

    bool operator==(const Qrels& other) const;

private:
    struct QueryEntry {
        std::vector<Judgment> judgments;
        std::unordered_map<std::string, int> index;
    };

    std::vector<std::string> order_;
    std::unordered_map<std::string, QueryEntry> queries_;
};

struct RankedDoc {
    std::string doc_id;
    int rank = 0;
    double score = 0.0;

    bool operator==(const RankedDoc&) const = default;
};

/// One retrieval system's ranked output. Per-query lists are sorted by rank
/// ascending; rank order is authoritative over score order.
class RunFile {
public:
    RunFile() = default;
    explicit RunFile(std::string system_tag) : tag_(std::move(system_tag)) {}

    const std::string& system_tag() const noexcept { return tag_; }
    void set_system_tag(std::string tag) { tag_ = std::move(tag); }

    /// Replaces the ranking for a query. Entries are sorted by rank; throws
    /// ValidationError on duplicate docs or duplicate/non-positive ranks.
    void set_ranking(const std::string& query_id, std::vector<RankedDoc> ranking);

    const std::vector<std::string>& query_ids() const noexcept { return order_; }
    /// Empty span for queries absent from the run.
    std::span<const RankedDoc> ranking(const std::string& query_id) const;

    /// Non-fatal findings from parsing (mixed tags, score/rank disagreement).
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

    bool operator==(const RunFile& other) const;

private:
    std::string tag_;
    std::vector<std::string> order_;
    std::unordered_map<std::string, std::vector<RankedDoc>> rankings_;
    std::vector<std::string> warnings_;
};

/// `qid iter docid grade` per line. Blank lines and `#` comments are skipped.
Qrels parse_qrels(std::istream& in);
Qrels load_qrels(const std::string& path);

/// `qid Q0 docid rank score tag` per line.
RunFile parse_run(std::istream& in);
RunFile load_run(const std::string& path);

void write_qrels(std::ostream& out, const Qrels& qrels);
void write_run(std::ostream& out, const RunFile& run);

/// Keeps at most the first k entries of each query's ranking.
RunFile truncate(const RunFile& run, std::size_t k);

/// Shortest decimal text that parses back to the same double.
std::string format_score(double value);

}  // namespace fdeval
