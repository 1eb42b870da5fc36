#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "arlcp/errors.hpp"
#include "arlcp/format.hpp"
#include "arlcp/reward.hpp"
#include "arlcp/rollout.hpp"

namespace arlcp {

/// One parsed corpus line: the rollout, the dataset it belongs to
/// ("default" when the record carries no dataset key) and its 1-based
/// source line number.
struct CorpusEntry {
    Rollout rollout;
    std::string dataset = "default";
    std::size_t line = 0;
};

namespace detail {

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  std::size_t line_no) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(line_no, std::string("missing required key '") + key + "'");
    }
    if (!it->is_string()) {
        throw ParseError(line_no, std::string("key '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

inline bool is_blank(const std::string& s) {
    for (char c : s) {
        if (!detail::is_space(c)) return false;
    }
    return true;
}

}  // namespace detail

/// Parse line-delimited JSON records from a stream. Blank lines are
/// skipped; an empty stream yields an empty list. Malformed lines raise
/// ParseError carrying the 1-based line number; a repeated
/// (dataset, prompt_id, rollout_id) combination raises
/// DuplicateRecordError.
inline std::vector<CorpusEntry> parse_corpus(std::istream& in) {
    std::vector<CorpusEntry> entries;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::is_blank(line)) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line_no, e.what());
        }
        if (!obj.is_object()) {
            throw ParseError(line_no, "record must be a JSON object");
        }
        CorpusEntry entry;
        entry.line = line_no;
        entry.rollout.prompt_id = detail::require_string(obj, "prompt_id", line_no);
        entry.rollout.rollout_id = detail::require_string(obj, "rollout_id", line_no);
        entry.rollout.text = detail::require_string(obj, "text", line_no);
        entry.rollout.ground_truth = detail::require_string(obj, "ground_truth", line_no);
        if (entry.rollout.prompt_id.empty()) {
            throw ParseError(line_no, "prompt_id must be non-empty");
        }
        if (entry.rollout.rollout_id.empty()) {
            throw ParseError(line_no, "rollout_id must be non-empty");
        }
        if (entry.rollout.text.empty()) {
            throw ParseError(line_no, "text must be non-empty");
        }
        if (const auto it = obj.find("token_count"); it != obj.end()) {
            if (!it->is_number_integer()) {
                throw ParseError(line_no, "key 'token_count' must be an integer");
            }
            const auto tc = it->get<std::int64_t>();
            if (tc < 1) {
                throw ParseError(line_no,
                                 "key 'token_count' must be >= 1, got " + std::to_string(tc));
            }
            entry.rollout.declared_token_count = tc;
        }
        if (const auto it = obj.find("dataset"); it != obj.end()) {
            if (!it->is_string()) {
                throw ParseError(line_no, "key 'dataset' must be a string");
            }
            entry.dataset = it->get<std::string>();
            if (entry.dataset.empty()) {
                throw ParseError(line_no, "key 'dataset' must be non-empty");
            }
        }
        const std::string key =
            entry.dataset + '\x1f' + entry.rollout.prompt_id + '\x1f' + entry.rollout.rollout_id;
        if (!seen.insert(key).second) {
            throw DuplicateRecordError(
                line_no, "duplicate record (prompt_id='" + entry.rollout.prompt_id +
                             "', rollout_id='" + entry.rollout.rollout_id + "')");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

/// Parse a record file from disk. A file with no records yields an empty
/// list; an unreadable path raises ConfigError.
inline std::vector<Rollout> parse_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file: " + path);
    auto entries = parse_corpus(in);
    std::vector<Rollout> rollouts;
    rollouts.reserve(entries.size());
    for (auto& e : entries) rollouts.push_back(std::move(e.rollout));
    return rollouts;
}

inline std::vector<CorpusEntry> parse_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file: " + path);
    return parse_corpus(in);
}

namespace detail {

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace detail

/// Serialize one rollout as a single JSON line. Key order is fixed so
/// output files diff cleanly.
inline std::string serialize_rollout(const Rollout& r,
                                     const std::optional<std::string>& dataset = std::nullopt) {
    std::ostringstream out;
    out << "{\"prompt_id\":" << detail::json_string(r.prompt_id)
        << ",\"rollout_id\":" << detail::json_string(r.rollout_id)
        << ",\"text\":" << detail::json_string(r.text)
        << ",\"ground_truth\":" << detail::json_string(r.ground_truth);
    if (r.declared_token_count) {
        out << ",\"token_count\":" << *r.declared_token_count;
    }
    if (dataset && *dataset != "default") {
        out << ",\"dataset\":" << detail::json_string(*dataset);
    }
    out << "}";
    return out.str();
}

/// Serialize a scored rollout as a single JSON line. Reals are printed at
/// 9 decimal digits, matching the CSV convention.
inline std::string serialize_scored_record(const std::string& prompt_id, const ScoredRollout& s,
                                           std::optional<double> advantage = std::nullopt) {
    std::ostringstream out;
    out << "{\"prompt_id\":" << detail::json_string(prompt_id)
        << ",\"rollout_id\":" << detail::json_string(s.rollout_id)
        << ",\"rtc\":" << s.rtc
        << ",\"len\":" << s.len
        << ",\"bucket\":\"" << to_string(s.bucket) << "\""
        << ",\"alpha1\":" << format_real(s.alpha1)
        << ",\"alpha2\":" << format_real(s.alpha2)
        << ",\"correct\":" << (s.correct ? "true" : "false")
        << ",\"reflection_penalty\":" << format_real(s.reflection_penalty)
        << ",\"length_penalty\":" << format_real(s.length_penalty)
        << ",\"reward\":" << format_real(s.reward);
    if (advantage) {
        out << ",\"advantage\":" << format_real(*advantage);
    }
    out << "}";
    return out.str();
}

}  // namespace arlcp
