#pragma once

#include <algorithm>
#include <fstream>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "arlcp/errors.hpp"

namespace arlcp {

namespace detail {

inline bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z');
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline bool is_space(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u == ' ' || u == '\t' || u == '\n' || u == '\r' || u == '\f' || u == '\v';
}

inline std::string lower_copy(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
    return out;
}

// Trim plus collapse of internal whitespace runs to single spaces.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_run = false;
    for (char c : s) {
        if (is_space(c)) {
            in_run = true;
            continue;
        }
        if (in_run && !out.empty()) out.push_back(' ');
        in_run = false;
        out.push_back(c);
    }
    return out;
}

}  // namespace detail

struct MatchPolicy {
    bool case_insensitive = true;
    bool word_boundary = true;
    bool longest_match_first = true;
};

/// Ordered list of reflection-trigger phrases plus matching flags.
///
/// Phrases are stored lowercase with single-space word separators.
/// Matching rules (all on by default): case-insensitive ASCII folding,
/// word boundaries (a trigger never matches inside a longer alphanumeric
/// run, so "check" does not hit "checkpoint"), longest-match-first at each
/// position ("double-check" counts once, not as an extra "check"), and a
/// space inside a multi-word trigger matches any whitespace run.
class TriggerLexicon {
  public:
    explicit TriggerLexicon(const std::vector<std::string>& phrases, MatchPolicy policy = {})
        : policy_(policy) {
        if (phrases.empty()) throw ConfigError("lexicon is empty");
        triggers_.reserve(phrases.size());
        for (const auto& raw : phrases) {
            std::string t = detail::lower_copy(detail::collapse_whitespace(raw));
            if (t.empty()) throw ConfigError("lexicon contains an empty phrase");
            const auto words = 1 + std::count(t.begin(), t.end(), ' ');
            if (words > 3) throw ConfigError("trigger phrase longer than 3 words: " + raw);
            if (std::find(triggers_.begin(), triggers_.end(), t) != triggers_.end()) {
                throw ConfigError("duplicate trigger phrase: " + raw);
            }
            triggers_.push_back(std::move(t));
        }
        build_match_order();
    }

    // Appendix lexicon used throughout the toolkit unless overridden.
    static TriggerLexicon default_lexicon() {
        return TriggerLexicon({"wait", "alternatively", "hold on", "another thought",
                               "verify", "think again", "but", "however", "alternative",
                               "check", "double-check", "oh", "hmm"});
    }

    // One phrase per line; blank lines and '#' comments skipped.
    static TriggerLexicon load_file(const std::string& path, MatchPolicy policy = {}) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open lexicon file: " + path);
        std::vector<std::string> phrases;
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::string phrase = detail::collapse_whitespace(line);
            if (!phrase.empty()) phrases.push_back(std::move(phrase));
        }
        if (phrases.empty()) throw ConfigError("lexicon file has no phrases: " + path);
        return TriggerLexicon(phrases, policy);
    }

    const std::vector<std::string>& triggers() const { return triggers_; }
    const MatchPolicy& policy() const { return policy_; }

    /// Number of non-overlapping trigger occurrences in `text`.
    int count_occurrences(std::string_view text) const {
        int count = 0;
        std::size_t i = 0;
        while (i < text.size()) {
            if (policy_.word_boundary && i > 0 && detail::is_word_char(text[i - 1])) {
                ++i;
                continue;
            }
            std::size_t end = 0;
            if (match_at(text, i, end)) {
                ++count;
                i = end;
            } else {
                ++i;
            }
        }
        return count;
    }

  private:
    void build_match_order() {
        order_.resize(triggers_.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        if (policy_.longest_match_first) {
            std::stable_sort(order_.begin(), order_.end(), [this](std::size_t a, std::size_t b) {
                return triggers_[a].size() > triggers_[b].size();
            });
        }
    }

    // First trigger (in match order) that matches at position `pos` with
    // valid boundaries; writes one-past-the-end of the match into `end`.
    bool match_at(std::string_view text, std::size_t pos, std::size_t& end) const {
        for (std::size_t idx : order_) {
            const std::string& trig = triggers_[idx];
            std::size_t ti = 0;
            std::size_t si = pos;
            bool ok = true;
            while (ti < trig.size()) {
                if (trig[ti] == ' ') {
                    if (si >= text.size() || !detail::is_space(text[si])) {
                        ok = false;
                        break;
                    }
                    while (si < text.size() && detail::is_space(text[si])) ++si;
                    ++ti;
                    continue;
                }
                if (si >= text.size()) {
                    ok = false;
                    break;
                }
                const char tc = policy_.case_insensitive ? detail::ascii_lower(text[si]) : text[si];
                if (tc != trig[ti]) {
                    ok = false;
                    break;
                }
                ++si;
                ++ti;
            }
            if (!ok) continue;
            if (policy_.word_boundary && si < text.size() && detail::is_word_char(text[si])) {
                continue;
            }
            end = si;
            return true;
        }
        return false;
    }

    std::vector<std::string> triggers_;
    std::vector<std::size_t> order_;
    MatchPolicy policy_;
};

}  // namespace arlcp
