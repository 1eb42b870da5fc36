#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arlcp/errors.hpp"
#include "arlcp/format.hpp"

namespace arlcp {

struct EvalSample {
    bool correct = false;
    std::int64_t len = 1;
};

/// One case's k samples.
using EvalCase = std::vector<EvalSample>;

/// Dataset name to its list of cases.
using DatasetRuns = std::map<std::string, std::vector<EvalCase>>;

struct DatasetMetrics {
    double pass1_accuracy = 0.0;
    double mean_length = 0.0;
};

struct EvalReport {
    std::map<std::string, DatasetMetrics> per_dataset;
    std::optional<double> delta_acc;
    std::optional<double> delta_length_pct;
};

/// pass@1 per dataset (mean over cases of the fraction correct), mean
/// length over all samples, and, against a baseline report, the deltas
/// averaged uniformly across datasets: accuracy in percentage points,
/// length as percent change.
inline EvalReport compute_eval_metrics(const DatasetRuns& runs,
                                       const std::optional<EvalReport>& baseline = std::nullopt) {
    if (runs.empty()) throw InvalidInputError("evaluation needs at least one dataset");
    EvalReport report;
    for (const auto& [dataset, cases] : runs) {
        if (cases.empty()) {
            throw InvalidInputError("dataset '" + dataset + "' has no cases");
        }
        const std::size_t k = cases.front().size();
        if (k < 1) {
            throw InvalidInputError("dataset '" + dataset + "' has a case with no samples");
        }
        double acc_sum = 0.0;
        double len_sum = 0.0;
        std::size_t n_samples = 0;
        for (const auto& samples : cases) {
            if (samples.size() != k) {
                throw InvalidInputError("dataset '" + dataset +
                                        "' has unequal sample counts per case: expected " +
                                        std::to_string(k) + ", got " +
                                        std::to_string(samples.size()));
            }
            std::size_t n_correct = 0;
            for (const auto& s : samples) {
                if (s.correct) ++n_correct;
                len_sum += static_cast<double>(s.len);
                ++n_samples;
            }
            acc_sum += static_cast<double>(n_correct) / static_cast<double>(k);
        }
        DatasetMetrics metrics;
        metrics.pass1_accuracy = acc_sum / static_cast<double>(cases.size());
        metrics.mean_length = len_sum / static_cast<double>(n_samples);
        report.per_dataset.emplace(dataset, metrics);
    }
    if (baseline) {
        double acc_delta_sum = 0.0;
        double len_delta_sum = 0.0;
        for (const auto& [dataset, metrics] : report.per_dataset) {
            const auto it = baseline->per_dataset.find(dataset);
            if (it == baseline->per_dataset.end()) {
                throw InvalidInputError("dataset '" + dataset + "' is absent from the baseline");
            }
            if (it->second.mean_length == 0.0) {
                throw InvalidInputError("baseline mean_length for dataset '" + dataset +
                                        "' must be nonzero");
            }
            acc_delta_sum += (metrics.pass1_accuracy - it->second.pass1_accuracy) * 100.0;
            len_delta_sum += (metrics.mean_length - it->second.mean_length) /
                             it->second.mean_length * 100.0;
        }
        const auto n = static_cast<double>(report.per_dataset.size());
        report.delta_acc = acc_delta_sum / n;
        report.delta_length_pct = len_delta_sum / n;
    }
    return report;
}

/// JSON serialization keeps full double precision so a report can serve
/// as a later run's baseline without drift.
inline nlohmann::json eval_report_to_json(const EvalReport& report) {
    nlohmann::json datasets = nlohmann::json::object();
    for (const auto& [dataset, metrics] : report.per_dataset) {
        datasets[dataset] = {{"pass1_accuracy", metrics.pass1_accuracy},
                             {"mean_length", metrics.mean_length}};
    }
    nlohmann::json out = {{"per_dataset", datasets}};
    if (report.delta_acc) out["delta_acc"] = *report.delta_acc;
    if (report.delta_length_pct) out["delta_length_pct"] = *report.delta_length_pct;
    return out;
}

inline EvalReport eval_report_from_json(const nlohmann::json& obj) {
    if (!obj.is_object() || !obj.contains("per_dataset") || !obj["per_dataset"].is_object()) {
        throw ConfigError("evaluation report must be an object with a 'per_dataset' map");
    }
    EvalReport report;
    for (const auto& [dataset, metrics] : obj["per_dataset"].items()) {
        if (!metrics.is_object() || !metrics.contains("pass1_accuracy") ||
            !metrics.contains("mean_length")) {
            throw ConfigError("dataset '" + dataset +
                              "' must carry pass1_accuracy and mean_length");
        }
        DatasetMetrics m;
        m.pass1_accuracy = metrics["pass1_accuracy"].get<double>();
        m.mean_length = metrics["mean_length"].get<double>();
        report.per_dataset.emplace(dataset, m);
    }
    if (obj.contains("delta_acc")) report.delta_acc = obj["delta_acc"].get<double>();
    if (obj.contains("delta_length_pct")) {
        report.delta_length_pct = obj["delta_length_pct"].get<double>();
    }
    return report;
}

inline EvalReport read_eval_report(std::istream& in) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed evaluation report: ") + e.what());
    }
    return eval_report_from_json(obj);
}

inline void write_eval_report_csv(std::ostream& out, const EvalReport& report) {
    out << "dataset,pass1_accuracy,mean_length\n";
    for (const auto& [dataset, metrics] : report.per_dataset) {
        out << dataset << "," << format_real(metrics.pass1_accuracy) << ","
            << format_real(metrics.mean_length) << "\n";
    }
}

}  // namespace arlcp
