#include "fdeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

namespace fdeval {
namespace {

using nlohmann::json;

json number(double v) { return round_significant(v); }

json to_json(const FdResult& r) {
    return {{"k", r.k},
            {"mode", std::string(to_string(r.mode))},
            {"queries_used", r.queries_used},
            {"queries_skipped", r.queries_skipped},
            {"relevant_pool_size", r.relevant_pool_size},
            {"retrieved_pool_size", r.retrieved_pool_size},
            {"missing_embedding_count", r.missing_embedding_count},
            {"regularized", r.regularized},
            {"clamp_warning", r.clamp_warning}};
}

json to_json(const BootstrapResult& b) {
    return {{"mean", number(b.mean)},       {"lower", number(b.lower)},
            {"upper", number(b.upper)},     {"n_resamples", b.n_resamples},
            {"confidence", number(b.confidence)}, {"seed", b.seed}};
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

double round_significant(double value, int digits) {
    if (!std::isfinite(value) || value == 0.0) return value;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return std::strtod(buf, nullptr);
}

std::string to_json(const EvalReport& report) {
    json root;
    const auto& s = report.settings;
    root["settings"] = {{"cutoffs", s.cutoffs},
                        {"urr", s.urr},
                        {"relevance_threshold", s.relevance_threshold},
                        {"gain", std::string(to_string(s.gain))},
                        {"max_missing_fraction", number(s.max_missing_fraction)},
                        {"seed", s.seed},
                        {"n_resamples", s.n_resamples},
                        {"confidence", number(s.confidence)},
                        {"metrics", report.metric_names},
                        {"store", {{"encoder", s.store_encoder}, {"dim", s.store_dim}, {"count", s.store_count}}}};

    json systems = json::object();
    json order = json::array();
    json diagnostics = json::object();
    json bootstrap = json::object();
    for (const auto& sys : report.systems) {
        order.push_back(sys.name);
        json metrics = json::object();
        for (const auto& [name, v] : sys.metrics) metrics[name] = number(v);
        systems[sys.name] = metrics;

        json fd = json::object();
        for (const auto& [name, r] : sys.fd_details) fd[name] = to_json(r);
        diagnostics[sys.name] = {{"fd", fd}, {"excluded_queries", sys.excluded_queries}, {"warnings", sys.warnings}};

        if (!sys.bootstrap.empty()) {
            json b = json::object();
            for (const auto& [name, r] : sys.bootstrap) b[name] = to_json(r);
            bootstrap[sys.name] = b;
        }
    }
    root["systems"] = systems;
    root["system_order"] = order;
    root["diagnostics"] = diagnostics;
    if (!bootstrap.empty()) root["bootstrap"] = bootstrap;

    json correlations = json::object();
    for (const auto& c : report.correlations) {
        const auto key = c.metric_a + "|" + c.metric_b;
        if (c.result) {
            correlations[key] = {{"tau", number(c.result->tau)},
                                 {"p_value", number(c.result->p_value)},
                                 {"n_systems", c.result->n_systems},
                                 {"approximate", c.result->approximate}};
        } else {
            correlations[key] = nullptr;
        }
    }
    root["correlations"] = correlations;
    return root.dump(2) + "\n";
}

std::string to_text(const EvalReport& report) {
    std::size_t name_width = 6;
    for (const auto& sys : report.systems) name_width = std::max(name_width, sys.name.size());
    std::vector<std::size_t> widths;
    for (const auto& m : report.metric_names) widths.push_back(std::max<std::size_t>(m.size(), 8));

    std::ostringstream out;
    auto pad = [&](const std::string& text, std::size_t width, bool left) {
        const std::string fill(width > text.size() ? width - text.size() : 0, ' ');
        out << (left ? text + fill : fill + text);
    };
    pad("System", name_width, true);
    for (std::size_t i = 0; i < widths.size(); ++i) {
        out << "  ";
        pad(report.metric_names[i], widths[i], false);
    }
    out << '\n';
    std::size_t rule = name_width;
    for (auto w : widths) rule += w + 2;
    out << std::string(rule, '-') << '\n';
    for (const auto& sys : report.systems) {
        pad(sys.name, name_width, true);
        for (std::size_t i = 0; i < widths.size(); ++i) {
            out << "  ";
            const auto it = sys.metrics.find(report.metric_names[i]);
            pad(it == sys.metrics.end() ? "-" : fixed3(it->second), widths[i], false);
        }
        out << '\n';
    }

    bool header = false;
    for (const auto& c : report.correlations) {
        if (c.metric_a == c.metric_b) continue;
        if (!header) {
            out << "\nKendall tau\n";
            header = true;
        }
        out << "  " << c.metric_a << " vs " << c.metric_b << ": ";
        if (c.result) {
            out << fixed3(c.result->tau) << " (p=" << fixed3(c.result->p_value) << ")";
        } else {
            out << "undefined";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace fdeval
