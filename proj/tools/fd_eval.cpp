// fd-eval: Frechet-distance evaluation of TREC run files.
//
//   fd-eval eval      --qrels Q --run R --store DIR [--k 1,10] [--urr] --out OUT
//   fd-eval compare   --qrels Q --run R1 --run R2 ... --store DIR --out OUT
//   fd-eval bootstrap --qrels Q --run R ... --store DIR [--resamples 1000] --out OUT
//   fd-eval sparsify  --qrels Q --max-per-query N [--seed S] --out OUT
//   fd-eval validate-store --store DIR
//
// Exit codes: 0 ok, 1 usage/parse/validation, 2 numerical, 3 I/O.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdeval/embedding_store.hpp"
#include "fdeval/error.hpp"
#include "fdeval/parallel.hpp"
#include "fdeval/pipeline.hpp"
#include "fdeval/trec_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string qrels;
    std::vector<std::string> runs;
    std::string store;
    std::vector<std::size_t> cutoffs{10};
    bool urr = false;
    int threshold = 1;
    std::string gain = "linear";
    std::size_t resamples = 1000;
    double confidence = 0.95;
    std::uint64_t seed = 0;
    std::size_t max_per_query = 0;
    double max_missing = 0.01;
    std::string out;
};

class UsageError : public fdeval::Error {
public:
    using Error::Error;
};

int report_error(const char* kind, const std::string& message, int code, std::optional<std::size_t> line = {}) {
    nlohmann::json err = {{"error", kind}, {"message", message}, {"exit_code", code}};
    if (line) err["line"] = *line;
    std::cerr << err.dump() << '\n';
    return code;
}

void require_file(const std::string& path, const char* flag) {
    if (path.empty()) throw UsageError(std::string(flag) + " is required");
    if (!fs::is_regular_file(path)) throw fdeval::IoError(std::string(flag) + ": no such file " + path);
}

fdeval::EmbeddingStore open_store(const std::string& dir) {
    if (dir.empty()) throw UsageError("--store is required");
    if (!fs::is_directory(dir)) throw fdeval::IoError("--store: no such directory " + dir);
    return fdeval::load_store(dir);
}

std::vector<fdeval::RunFile> load_runs(const Options& o) {
    std::vector<fdeval::RunFile> runs;
    for (const auto& path : o.runs) {
        require_file(path, "--run");
        auto run = fdeval::load_run(path);
        if (run.system_tag().empty()) run.set_system_tag(fs::path(path).stem().string());
        runs.push_back(std::move(run));
    }
    return runs;
}

fs::path output_dir(const Options& o) {
    if (o.out.empty()) throw UsageError("--out is required");
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw fdeval::IoError("cannot create " + o.out + ": " + ec.message());
    return o.out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw fdeval::IoError("cannot write " + path.string());
}

fdeval::CompareConfig compare_config(const Options& o) {
    fdeval::CompareConfig c;
    if (o.cutoffs.empty()) throw UsageError("--k needs at least one cutoff");
    for (auto k : o.cutoffs) {
        if (k < 1) throw UsageError("--k cutoffs must be >= 1");
    }
    c.cutoffs = o.cutoffs;
    c.fd_urr = o.urr;
    c.relevance_threshold = o.threshold;
    c.gain = fdeval::parse_gain(o.gain);
    c.max_missing_fraction = o.max_missing;
    c.seed = o.seed;
    c.confidence = o.confidence;
    c.threads = fdeval::default_thread_count();
    return c;
}

void emit_report(const Options& o, const fdeval::EvalReport& report) {
    const auto dir = output_dir(o);
    write_text(dir / "report.json", fdeval::to_json(report));
    const auto table = fdeval::to_text(report);
    write_text(dir / "report.txt", table);
    std::cout << table;
}

int run_eval(const Options& o) {
    if (o.runs.size() != 1) throw UsageError("eval takes exactly one --run");
    require_file(o.qrels, "--qrels");
    const auto qrels = fdeval::load_qrels(o.qrels);
    const auto runs = load_runs(o);
    const auto store = open_store(o.store);
    emit_report(o, fdeval::evaluate_run(runs.front(), qrels, store, compare_config(o)));
    return 0;
}

int run_compare(const Options& o) {
    if (o.runs.size() < 2) throw UsageError("compare needs at least two --run files");
    require_file(o.qrels, "--qrels");
    const auto qrels = fdeval::load_qrels(o.qrels);
    const auto runs = load_runs(o);
    const auto store = open_store(o.store);
    emit_report(o, fdeval::compare_systems(runs, qrels, store, compare_config(o)));
    return 0;
}

int run_bootstrap(const Options& o) {
    if (o.runs.empty()) throw UsageError("bootstrap needs at least one --run");
    if (o.resamples < 1) throw UsageError("--resamples must be >= 1");
    require_file(o.qrels, "--qrels");
    const auto qrels = fdeval::load_qrels(o.qrels);
    const auto runs = load_runs(o);
    const auto store = open_store(o.store);
    auto config = compare_config(o);
    config.n_resamples = o.resamples;
    emit_report(o, runs.size() == 1 ? fdeval::evaluate_run(runs.front(), qrels, store, config)
                                    : fdeval::compare_systems(runs, qrels, store, config));
    return 0;
}

int run_sparsify(const Options& o) {
    if (o.max_per_query < 1) throw UsageError("--max-per-query must be >= 1");
    require_file(o.qrels, "--qrels");
    const auto qrels = fdeval::load_qrels(o.qrels);
    fdeval::SparsifyDiagnostics diag;
    const auto sparse = fdeval::sparsify_qrels(qrels, o.max_per_query, o.seed, o.threshold, &diag);
    const auto dir = output_dir(o);
    std::ostringstream text;
    fdeval::write_qrels(text, sparse);
    write_text(dir / "qrels.txt", text.str());

    nlohmann::json summary = {{"queries", sparse.query_count()},
                              {"judgments", sparse.size()},
                              {"queries_without_relevant", diag.queries_without_relevant},
                              {"max_per_query", o.max_per_query},
                              {"seed", o.seed}};
    for (const auto& [grade, n] : diag.tier_usage) summary["tier_usage"][std::to_string(grade)] = n;
    std::cout << summary.dump() << '\n';
    return 0;
}

int run_validate_store(const Options& o) {
    const auto store = open_store(o.store);
    std::cout << nlohmann::json{{"valid", true}, {"dim", store.dim()}, {"count", store.count()},
                                {"encoder", store.encoder()}}
                     .dump()
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frechet-distance evaluation of retrieval runs"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* cmd, bool runs, bool store, bool out) {
        if (runs) {
            cmd->add_option("--qrels", o.qrels, "TREC qrels file");
            cmd->add_option("--run", o.runs, "TREC run file (repeatable)");
        }
        if (store) cmd->add_option("--store", o.store, "embedding store directory");
        if (out) cmd->add_option("--out", o.out, "output directory");
    };
    auto add_metrics = [&](CLI::App* cmd) {
        cmd->add_option("--k", o.cutoffs, "comma-separated cutoffs")->delimiter(',');
        cmd->add_flag("--urr", o.urr, "also report FD over unjudged retrieved results");
        cmd->add_option("--threshold", o.threshold, "minimum relevant grade")->check(CLI::PositiveNumber);
        cmd->add_option("--gain", o.gain, "nDCG gain")->check(CLI::IsMember({"linear", "exp"}));
        cmd->add_option("--seed", o.seed, "random seed");
        cmd->add_option("--max-missing", o.max_missing, "abort above this missing-embedding fraction");
    };

    auto* eval = app.add_subcommand("eval", "evaluate one run");
    add_common(eval, true, true, true);
    add_metrics(eval);

    auto* compare = app.add_subcommand("compare", "evaluate several runs and correlate metrics");
    add_common(compare, true, true, true);
    add_metrics(compare);

    auto* boot = app.add_subcommand("bootstrap", "bootstrap confidence intervals over queries");
    add_common(boot, true, true, true);
    add_metrics(boot);
    boot->add_option("--resamples", o.resamples, "number of resamples");
    boot->add_option("--confidence", o.confidence, "interval confidence")->check(CLI::Range(0.0, 1.0));

    auto* sparsify = app.add_subcommand("sparsify", "cap relevant judgments per query");
    sparsify->add_option("--qrels", o.qrels, "TREC qrels file");
    sparsify->add_option("--max-per-query", o.max_per_query, "relevant judgments kept per query");
    sparsify->add_option("--seed", o.seed, "random seed");
    sparsify->add_option("--threshold", o.threshold, "minimum relevant grade")->check(CLI::PositiveNumber);
    sparsify->add_option("--out", o.out, "output directory");

    auto* validate = app.add_subcommand("validate-store", "check an embedding store directory");
    validate->add_option("--store", o.store, "embedding store directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), 1);
    }

    try {
        if (*eval) return run_eval(o);
        if (*compare) return run_compare(o);
        if (*boot) return run_bootstrap(o);
        if (*sparsify) return run_sparsify(o);
        if (*validate) return run_validate_store(o);
    } catch (const UsageError& e) {
        return report_error("usage", e.what(), 1);
    } catch (const fdeval::ParseError& e) {
        return report_error("parse", e.what(), 1, e.line());
    } catch (const fdeval::ValidationError& e) {
        return report_error("validation", e.what(), 1);
    } catch (const fdeval::NumericalError& e) {
        return report_error("numerical", e.what(), 2);
    } catch (const fdeval::IoError& e) {
        return report_error("io", e.what(), 3);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 1);
    }
    return 1;
}
