#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "arlcp/advantage.hpp"
#include "arlcp/corpus.hpp"
#include "arlcp/errors.hpp"
#include "arlcp/format.hpp"
#include "arlcp/lexicon.hpp"
#include "arlcp/metrics.hpp"
#include "arlcp/reward.hpp"
#include "arlcp/rollout.hpp"
#include "arlcp/simulator.hpp"

namespace arlcp {

/// Toolkit-wide configuration: penalty parameters, optional lexicon
/// override, optional simulator section, output directory.
struct ToolkitConfig {
    PenaltyConfig penalty;
    std::optional<std::string> lexicon_path;
    std::optional<SimConfig> sim;
    std::string output_dir = "arlcp_out";

    void validate() const {
        penalty.validate();
        if (sim) sim->validate();
        if (output_dir.empty()) throw ConfigError("output_dir must be non-empty");
    }
};

/// Optional command-line overrides. Flag values beat config-file values,
/// which beat built-in defaults.
struct CliOverrides {
    std::optional<int> n1;
    std::optional<int> n2;
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    std::optional<double> lambda3;
    std::optional<double> alpha;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> lexicon_path;
    std::optional<std::string> output_dir;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::vector<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read_number(const nlohmann::json& obj, const char* key, T& target) {
    if (const auto it = obj.find(key); it != obj.end()) {
        if (!it->is_number()) {
            throw ConfigError(std::string("key '") + key + "' must be a number");
        }
        target = it->get<T>();
    }
}

}  // namespace detail

inline nlohmann::json penalty_to_json(const PenaltyConfig& p) {
    return {{"n1", p.n1},         {"n2", p.n2},       {"lambda1", p.lambda1},
            {"lambda2", p.lambda2}, {"lambda3", p.lambda3}, {"alpha", p.alpha},
            {"std_epsilon", p.std_epsilon}};
}

inline PenaltyConfig penalty_from_json(const nlohmann::json& obj) {
    if (!obj.is_object()) throw ConfigError("'penalty' must be an object");
    detail::reject_unknown_keys(
        obj, {"n1", "n2", "lambda1", "lambda2", "lambda3", "alpha", "std_epsilon"}, "penalty");
    PenaltyConfig p;
    detail::read_number(obj, "n1", p.n1);
    detail::read_number(obj, "n2", p.n2);
    detail::read_number(obj, "lambda1", p.lambda1);
    detail::read_number(obj, "lambda2", p.lambda2);
    detail::read_number(obj, "lambda3", p.lambda3);
    detail::read_number(obj, "alpha", p.alpha);
    detail::read_number(obj, "std_epsilon", p.std_epsilon);
    return p;
}

inline nlohmann::json sim_to_json(const SimConfig& s) {
    nlohmann::json archetypes = nlohmann::json::array();
    for (const auto& a : s.archetypes) {
        archetypes.push_back({{"name", a.name},
                              {"p_correct", a.p_correct},
                              {"len_mean", a.len_mean},
                              {"len_std", a.len_std},
                              {"rtc_mean", a.rtc_mean},
                              {"rtc_std", a.rtc_std}});
    }
    nlohmann::json out = {{"archetypes", archetypes},
                          {"m", s.m},
                          {"steps", s.steps},
                          {"reward_mode", to_string(s.reward_mode)},
                          {"clip_eps", s.clip_eps},
                          {"epochs_per_batch", s.epochs_per_batch},
                          {"learning_rate", s.learning_rate},
                          {"seed", s.seed}};
    if (!s.initial_logits.empty()) out["initial_logits"] = s.initial_logits;
    return out;
}

inline SimConfig sim_from_json(const nlohmann::json& obj) {
    if (!obj.is_object()) throw ConfigError("'sim' must be an object");
    detail::reject_unknown_keys(obj,
                                {"archetypes", "m", "steps", "penalty", "reward_mode", "clip_eps",
                                 "epochs_per_batch", "learning_rate", "seed", "initial_logits"},
                                "sim");
    SimConfig s;
    if (const auto it = obj.find("archetypes"); it != obj.end()) {
        if (!it->is_array()) throw ConfigError("'sim.archetypes' must be an array");
        s.archetypes.clear();
        for (const auto& item : *it) {
            if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
                throw ConfigError("each archetype must be an object with a string 'name'");
            }
            detail::reject_unknown_keys(
                item, {"name", "p_correct", "len_mean", "len_std", "rtc_mean", "rtc_std"},
                "archetype");
            Archetype a;
            a.name = item["name"].get<std::string>();
            detail::read_number(item, "p_correct", a.p_correct);
            detail::read_number(item, "len_mean", a.len_mean);
            detail::read_number(item, "len_std", a.len_std);
            detail::read_number(item, "rtc_mean", a.rtc_mean);
            detail::read_number(item, "rtc_std", a.rtc_std);
            s.archetypes.push_back(std::move(a));
        }
    }
    detail::read_number(obj, "m", s.m);
    detail::read_number(obj, "steps", s.steps);
    if (const auto it = obj.find("penalty"); it != obj.end()) {
        s.penalty = penalty_from_json(*it);
    }
    if (const auto it = obj.find("reward_mode"); it != obj.end()) {
        if (!it->is_string()) throw ConfigError("'sim.reward_mode' must be a string");
        s.reward_mode = reward_mode_from_string(it->get<std::string>());
    }
    detail::read_number(obj, "clip_eps", s.clip_eps);
    detail::read_number(obj, "epochs_per_batch", s.epochs_per_batch);
    detail::read_number(obj, "learning_rate", s.learning_rate);
    detail::read_number(obj, "seed", s.seed);
    if (const auto it = obj.find("initial_logits"); it != obj.end()) {
        if (!it->is_array()) throw ConfigError("'sim.initial_logits' must be an array");
        s.initial_logits.clear();
        for (const auto& v : *it) {
            if (!v.is_number()) throw ConfigError("'sim.initial_logits' must hold numbers");
            s.initial_logits.push_back(v.get<double>());
        }
    }
    return s;
}

inline nlohmann::json toolkit_config_to_json(const ToolkitConfig& cfg) {
    nlohmann::json out = {{"penalty", penalty_to_json(cfg.penalty)},
                          {"output_dir", cfg.output_dir}};
    if (cfg.lexicon_path) out["lexicon_path"] = *cfg.lexicon_path;
    if (cfg.sim) out["sim"] = sim_to_json(*cfg.sim);
    return out;
}

inline ToolkitConfig toolkit_config_from_json(const nlohmann::json& obj) {
    if (!obj.is_object()) throw ConfigError("config must be a JSON object");
    detail::reject_unknown_keys(obj, {"penalty", "lexicon_path", "sim", "output_dir"}, "config");
    ToolkitConfig cfg;
    if (const auto it = obj.find("penalty"); it != obj.end()) {
        cfg.penalty = penalty_from_json(*it);
    }
    if (const auto it = obj.find("lexicon_path"); it != obj.end()) {
        if (!it->is_string()) throw ConfigError("'lexicon_path' must be a string");
        cfg.lexicon_path = it->get<std::string>();
    }
    if (const auto it = obj.find("sim"); it != obj.end()) {
        cfg.sim = sim_from_json(*it);
    }
    if (const auto it = obj.find("output_dir"); it != obj.end()) {
        if (!it->is_string()) throw ConfigError("'output_dir' must be a string");
        cfg.output_dir = it->get<std::string>();
    }
    return cfg;
}

inline ToolkitConfig load_toolkit_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed config file " + path + ": " + e.what());
    }
    return toolkit_config_from_json(obj);
}

inline void apply_overrides(ToolkitConfig& cfg, const CliOverrides& o) {
    if (o.n1) cfg.penalty.n1 = *o.n1;
    if (o.n2) cfg.penalty.n2 = *o.n2;
    if (o.lambda1) cfg.penalty.lambda1 = *o.lambda1;
    if (o.lambda2) cfg.penalty.lambda2 = *o.lambda2;
    if (o.lambda3) cfg.penalty.lambda3 = *o.lambda3;
    if (o.alpha) cfg.penalty.alpha = *o.alpha;
    if (o.lexicon_path) cfg.lexicon_path = *o.lexicon_path;
    if (o.output_dir) cfg.output_dir = *o.output_dir;
    if (o.seed && cfg.sim) cfg.sim->seed = *o.seed;
    if (cfg.sim) {
        cfg.sim->penalty = cfg.penalty;
    }
    cfg.validate();
}

/// Write-then-rename so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write file: " + tmp.string());
        out << content;
        out.flush();
        if (!out.good()) throw Error("failed writing file: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::filesystem::path ensure_output_dir(const ToolkitConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void save_effective_config(const std::filesystem::path& dir, const ToolkitConfig& cfg) {
    write_file_atomic(dir / "effective_config.json", toolkit_config_to_json(cfg).dump(2) + "\n");
}

inline TriggerLexicon load_lexicon(const ToolkitConfig& cfg) {
    if (cfg.lexicon_path) return TriggerLexicon::load_file(*cfg.lexicon_path);
    return TriggerLexicon::default_lexicon();
}

namespace detail {

struct PromptGroup {
    std::string prompt_id;
    std::vector<std::size_t> entry_indices;
};

// Group corpus entries by prompt_id, keeping first-appearance order of
// prompts and line order inside each group.
inline std::vector<PromptGroup> group_by_prompt(const std::vector<CorpusEntry>& entries) {
    std::vector<PromptGroup> groups;
    std::unordered_map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string& pid = entries[i].rollout.prompt_id;
        const auto it = index_of.find(pid);
        if (it == index_of.end()) {
            index_of.emplace(pid, groups.size());
            groups.push_back({pid, {i}});
        } else {
            groups[it->second].entry_indices.push_back(i);
        }
    }
    return groups;
}

struct AnalyzedRecord {
    std::string dataset;
    int rtc = 0;
    std::int64_t len = 1;
    bool correct = false;
};

inline AnalyzedRecord analyze_record(const CorpusEntry& entry, const TriggerLexicon& lex) {
    AnalyzedRecord rec;
    rec.dataset = entry.dataset;
    rec.rtc = count_reflection_tokens(entry.rollout.text, lex);
    rec.len = response_length(entry.rollout);
    const SegmentedRollout seg = split_thinking(entry.rollout);
    const auto answer = extract_answer(seg);
    rec.correct = answer.has_value() && *answer == normalize_answer(entry.rollout.ground_truth);
    return rec;
}

}  // namespace detail

/// Score every prompt group in the corpus; write scored.jsonl (input line
/// order) and score_summary.csv (one row per prompt).
inline void cmd_score(const std::string& input_path, const ToolkitConfig& cfg,
                      bool emit_advantages = false) {
    cfg.validate();
    const std::vector<CorpusEntry> entries = parse_corpus_file(input_path);
    if (entries.empty()) throw EmptyInputError("corpus contains no records: " + input_path);
    const TriggerLexicon lex = load_lexicon(cfg);
    const auto groups = detail::group_by_prompt(entries);

    std::vector<ScoredRollout> scored_by_entry(entries.size());
    std::vector<std::optional<double>> advantage_by_entry(entries.size());
    std::ostringstream summary;
    summary << "prompt_id,n_total,n_correct,mean_rtc_correct,std_rtc_correct,"
               "mean_len_correct,std_len_correct,mean_reward\n";
    for (const auto& group : groups) {
        std::vector<Rollout> rollouts;
        rollouts.reserve(group.entry_indices.size());
        for (std::size_t idx : group.entry_indices) rollouts.push_back(entries[idx].rollout);
        auto [scored, stats] = score_group(rollouts, lex, cfg.penalty);
        double reward_sum = 0.0;
        for (const auto& s : scored) reward_sum += s.reward;
        const double mean_reward = reward_sum / static_cast<double>(scored.size());
        if (emit_advantages && scored.size() >= 2) {
            std::vector<double> rewards;
            rewards.reserve(scored.size());
            for (const auto& s : scored) rewards.push_back(s.reward);
            const auto advantages = rloo_advantages(rewards);
            for (std::size_t j = 0; j < scored.size(); ++j) {
                advantage_by_entry[group.entry_indices[j]] = advantages[j];
            }
        }
        for (std::size_t j = 0; j < scored.size(); ++j) {
            scored_by_entry[group.entry_indices[j]] = std::move(scored[j]);
        }
        summary << group.prompt_id << "," << stats.n_total << "," << stats.n_correct << ","
                << format_real(stats.mean_rtc_correct) << ","
                << format_real(stats.std_rtc_correct) << ","
                << format_real(stats.mean_len_correct) << ","
                << format_real(stats.std_len_correct) << "," << format_real(mean_reward) << "\n";
    }

    std::ostringstream scored_lines;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        scored_lines << serialize_scored_record(entries[i].rollout.prompt_id, scored_by_entry[i],
                                                advantage_by_entry[i])
                     << "\n";
    }

    const auto dir = ensure_output_dir(cfg);
    write_file_atomic(dir / "scored.jsonl", scored_lines.str());
    write_file_atomic(dir / "score_summary.csv", summary.str());
    save_effective_config(dir, cfg);
    std::cout << "scored " << entries.size() << " rollouts across " << groups.size()
              << " prompts; outputs in " << dir.string() << "\n";
}

/// Corpus analysis reports: per-dataset mean RTC, correct/incorrect
/// split, accuracy by RTC bin, and the exact RTC histogram.
inline void cmd_analyze(const std::string& input_path, const ToolkitConfig& cfg,
                        int bin_width = 20) {
    cfg.validate();
    if (bin_width < 1) throw ConfigError("bin width must be >= 1, got " + std::to_string(bin_width));
    const std::vector<CorpusEntry> entries = parse_corpus_file(input_path);
    if (entries.empty()) throw EmptyInputError("corpus contains no records: " + input_path);
    const TriggerLexicon lex = load_lexicon(cfg);

    std::vector<detail::AnalyzedRecord> records;
    records.reserve(entries.size());
    for (const auto& entry : entries) records.push_back(detail::analyze_record(entry, lex));

    std::map<std::string, std::pair<std::size_t, double>> per_dataset;
    for (const auto& r : records) {
        auto& [n, rtc_sum] = per_dataset[r.dataset];
        ++n;
        rtc_sum += static_cast<double>(r.rtc);
    }
    std::ostringstream dataset_csv;
    dataset_csv << "dataset,n,mean_rtc\n";
    for (const auto& [dataset, acc] : per_dataset) {
        dataset_csv << dataset << "," << acc.first << ","
                    << format_real(acc.second / static_cast<double>(acc.first)) << "\n";
    }

    std::ostringstream split_csv;
    split_csv << "group,n,mean_rtc,mean_len\n";
    for (const bool want_correct : {true, false}) {
        std::size_t n = 0;
        double rtc_sum = 0.0;
        double len_sum = 0.0;
        for (const auto& r : records) {
            if (r.correct != want_correct) continue;
            ++n;
            rtc_sum += static_cast<double>(r.rtc);
            len_sum += static_cast<double>(r.len);
        }
        split_csv << (want_correct ? "correct" : "incorrect") << "," << n << ",";
        if (n > 0) {
            split_csv << format_real(rtc_sum / static_cast<double>(n)) << ","
                      << format_real(len_sum / static_cast<double>(n));
        } else {
            split_csv << ",";
        }
        split_csv << "\n";
    }

    int max_rtc = 0;
    for (const auto& r : records) max_rtc = std::max(max_rtc, r.rtc);
    const int n_bins = max_rtc / bin_width + 1;
    std::vector<std::size_t> bin_n(static_cast<std::size_t>(n_bins), 0);
    std::vector<std::size_t> bin_correct(static_cast<std::size_t>(n_bins), 0);
    for (const auto& r : records) {
        const auto b = static_cast<std::size_t>(r.rtc / bin_width);
        ++bin_n[b];
        if (r.correct) ++bin_correct[b];
    }
    std::ostringstream bins_csv;
    bins_csv << "bin_start,bin_end,n,accuracy\n";
    for (int b = 0; b < n_bins; ++b) {
        const auto idx = static_cast<std::size_t>(b);
        bins_csv << b * bin_width << "," << (b + 1) * bin_width << "," << bin_n[idx] << ",";
        if (bin_n[idx] > 0) {
            bins_csv << format_real(static_cast<double>(bin_correct[idx]) /
                                    static_cast<double>(bin_n[idx]));
        }
        bins_csv << "\n";
    }

    std::map<int, std::size_t> histogram;
    for (const auto& r : records) ++histogram[r.rtc];
    std::ostringstream hist_csv;
    hist_csv << "rtc,count\n";
    for (const auto& [rtc, count] : histogram) hist_csv << rtc << "," << count << "\n";

    const auto dir = ensure_output_dir(cfg);
    write_file_atomic(dir / "dataset_mean_rtc.csv", dataset_csv.str());
    write_file_atomic(dir / "correctness_split.csv", split_csv.str());
    write_file_atomic(dir / "accuracy_by_rtc_bin.csv", bins_csv.str());
    write_file_atomic(dir / "rtc_histogram.csv", hist_csv.str());
    save_effective_config(dir, cfg);
    std::cout << "analyzed " << records.size() << " rollouts; outputs in " << dir.string()
              << "\n";
}

/// Run the synthetic trainer; write the trace CSV, the final-policy
/// summary with oracle estimates, and a convergence summary.
inline void cmd_train_sim(const ToolkitConfig& base_cfg, bool use_benchmark = false,
                          std::optional<std::uint64_t> seed_override = std::nullopt) {
    ToolkitConfig cfg = base_cfg;
    if (use_benchmark) {
        SimConfig sim = benchmark_sim_config();
        sim.penalty = cfg.penalty;
        cfg.sim = sim;
    }
    if (!cfg.sim) {
        throw ConfigError("train-sim needs a sim configuration (config file 'sim' section or "
                          "--benchmark)");
    }
    if (seed_override) cfg.sim->seed = *seed_override;
    cfg.validate();
    const SimConfig& sim = *cfg.sim;

    const TrainingResult result = run_training(sim);

    std::ostringstream trace_csv;
    write_trace_csv(trace_csv, sim, result.trace);

    const GroupStats ref = uniform_reference_stats(sim, 10000, sim.seed + 1);
    std::vector<OracleEstimate> estimates;
    estimates.reserve(sim.archetypes.size());
    for (std::size_t k = 0; k < sim.archetypes.size(); ++k) {
        RandomStream oracle_rng(sim.seed + 100 + k);
        estimates.push_back(brute_force_expected_reward(sim.archetypes[k], ref, sim.penalty,
                                                        100000, oracle_rng));
    }

    const std::vector<double> final_probs = result.final_policy.probabilities();
    std::ostringstream policy_csv;
    policy_csv << "archetype,probability,oracle_expected_reward,oracle_standard_error\n";
    for (std::size_t k = 0; k < sim.archetypes.size(); ++k) {
        policy_csv << sim.archetypes[k].name << "," << format_real(final_probs[k]) << ","
                   << format_real(estimates[k].expected_reward) << ","
                   << format_real(estimates[k].standard_error) << "\n";
    }

    const std::size_t top_idx = static_cast<std::size_t>(
        std::max_element(final_probs.begin(), final_probs.end()) - final_probs.begin());
    std::size_t oracle_idx = 0;
    for (std::size_t k = 1; k < estimates.size(); ++k) {
        if (estimates[k].expected_reward > estimates[oracle_idx].expected_reward) oracle_idx = k;
    }
    const bool converged = !result.trace.empty() && final_probs[top_idx] > 0.9;
    nlohmann::json summary = {{"steps", sim.steps},
                              {"reward_mode", to_string(sim.reward_mode)},
                              {"converged", converged},
                              {"top_archetype", sim.archetypes[top_idx].name},
                              {"top_probability", final_probs[top_idx]},
                              {"oracle_argmax", sim.archetypes[oracle_idx].name}};

    const auto dir = ensure_output_dir(cfg);
    write_file_atomic(dir / "training_trace.csv", trace_csv.str());
    write_file_atomic(dir / "final_policy.csv", policy_csv.str());
    write_file_atomic(dir / "train_summary.json", summary.dump(2) + "\n");
    save_effective_config(dir, cfg);
    std::cout << "trained " << sim.steps << " steps; top archetype "
              << sim.archetypes[top_idx].name << " at p=" << format_real(final_probs[top_idx])
              << "; outputs in " << dir.string() << "\n";
}

/// Grade a corpus and report pass@1 and mean length per dataset, with
/// deltas against an optional baseline report.
inline void cmd_eval(const std::string& input_path, const ToolkitConfig& cfg,
                     const std::optional<std::string>& baseline_path = std::nullopt) {
    cfg.validate();
    const std::vector<CorpusEntry> entries = parse_corpus_file(input_path);
    if (entries.empty()) throw EmptyInputError("corpus contains no records: " + input_path);

    std::map<std::string, std::vector<EvalCase>> runs;
    std::map<std::string, std::map<std::string, std::size_t>> case_index;
    for (const auto& entry : entries) {
        const SegmentedRollout seg = split_thinking(entry.rollout);
        const auto answer = extract_answer(seg);
        EvalSample sample;
        sample.correct =
            answer.has_value() && *answer == normalize_answer(entry.rollout.ground_truth);
        sample.len = response_length(entry.rollout);
        auto& cases = runs[entry.dataset];
        auto& index = case_index[entry.dataset];
        const auto it = index.find(entry.rollout.prompt_id);
        if (it == index.end()) {
            index.emplace(entry.rollout.prompt_id, cases.size());
            cases.push_back({sample});
        } else {
            cases[it->second].push_back(sample);
        }
    }

    std::optional<EvalReport> baseline;
    if (baseline_path) {
        std::ifstream in(*baseline_path);
        if (!in) throw ConfigError("cannot open baseline report: " + *baseline_path);
        baseline = read_eval_report(in);
    }
    const EvalReport report = compute_eval_metrics(runs, baseline);

    std::ostringstream csv;
    write_eval_report_csv(csv, report);

    const auto dir = ensure_output_dir(cfg);
    write_file_atomic(dir / "eval_report.json", eval_report_to_json(report).dump(2) + "\n");
    write_file_atomic(dir / "eval_report.csv", csv.str());
    save_effective_config(dir, cfg);
    std::cout << "evaluated " << entries.size() << " rollouts across " << runs.size()
              << " datasets";
    if (report.delta_acc) {
        std::cout << "; delta_acc=" << format_real(*report.delta_acc)
                  << " points, delta_length_pct=" << format_real(*report.delta_length_pct);
    }
    std::cout << "; outputs in " << dir.string() << "\n";
}

}  // namespace arlcp
