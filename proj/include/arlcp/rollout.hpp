#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "arlcp/errors.hpp"
#include "arlcp/lexicon.hpp"

namespace arlcp {

inline constexpr std::string_view kThinkTerminator = "</think>";
inline constexpr std::string_view kBoxedMarker = "\\boxed{";

/// One sampled response to a prompt.
struct Rollout {
    std::string prompt_id;
    std::string rollout_id;
    std::string text;
    std::string ground_truth;
    std::optional<std::int64_t> declared_token_count;

    bool operator==(const Rollout&) const = default;
};

/// Thinking/solution split of a rollout's text.
struct SegmentedRollout {
    std::string thinking;
    std::string solution;
    bool had_terminator = false;
};

/// Split at the first "</think>". Without a terminator the whole text is
/// the thinking phase and the solution is empty.
inline SegmentedRollout split_thinking(const Rollout& r) {
    const auto pos = r.text.find(kThinkTerminator);
    if (pos == std::string::npos) {
        return {r.text, "", false};
    }
    return {r.text.substr(0, pos), r.text.substr(pos + kThinkTerminator.size()), true};
}

/// Answer normalization: trim, strip enclosing '$', collapse whitespace.
inline std::string normalize_answer(std::string_view raw) {
    std::string s = detail::collapse_whitespace(raw);
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && s[begin] == '$') ++begin;
    while (end > begin && s[end - 1] == '$') --end;
    return detail::collapse_whitespace(std::string_view(s).substr(begin, end - begin));
}

namespace detail {

// Content of the last \boxed{...} with balanced braces, if any.
inline std::optional<std::string> last_boxed_content(std::string_view hay) {
    std::optional<std::string> best;
    std::size_t search = 0;
    while (true) {
        const auto pos = hay.find(kBoxedMarker, search);
        if (pos == std::string_view::npos) break;
        std::size_t j = pos + kBoxedMarker.size();
        const std::size_t content_start = j;
        int depth = 1;
        while (j < hay.size() && depth > 0) {
            if (hay[j] == '{') ++depth;
            else if (hay[j] == '}') --depth;
            ++j;
        }
        if (depth == 0) best = std::string(hay.substr(content_start, j - 1 - content_start));
        search = pos + 1;
    }
    return best;
}

// Last standalone numeric token: optional sign, digits, optional single
// fractional part; not embedded in an alphanumeric or decimal context.
// Candidates are consumed left to right, so an embedded token cannot be
// re-read as a shorter standalone one.
inline std::optional<std::string> last_numeric_token(std::string_view hay) {
    std::optional<std::string> best;
    const auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    std::size_t i = 0;
    while (i < hay.size()) {
        const std::size_t start = i;
        std::size_t j = i;
        if (hay[j] == '+' || hay[j] == '-') ++j;
        const std::size_t digits_start = j;
        while (j < hay.size() && is_digit(hay[j])) ++j;
        const bool has_int = j > digits_start;
        bool parsed = has_int;
        if (j < hay.size() && hay[j] == '.' && j + 1 < hay.size() && is_digit(hay[j + 1])) {
            ++j;
            while (j < hay.size() && is_digit(hay[j])) ++j;
            parsed = true;
        }
        if (!parsed) {
            ++i;
            continue;
        }
        const bool bad_lead =
            start > 0 && (is_word_char(hay[start - 1]) || hay[start - 1] == '.');
        const bool bad_tail = j < hay.size() && is_word_char(hay[j]);
        if (!bad_lead && !bad_tail) {
            best = std::string(hay.substr(start, j - start));
        }
        i = j;
    }
    return best;
}

}  // namespace detail

/// Extracted, normalized answer of a segmented rollout. Searches the
/// solution segment, falling back to the thinking segment only when the
/// solution is empty. Boxed markers win over bare numeric tokens; absent
/// means the rollout is unanswerable (incorrect downstream).
inline std::optional<std::string> extract_answer(const SegmentedRollout& seg) {
    const std::string& hay = seg.solution.empty() ? seg.thinking : seg.solution;
    if (auto boxed = detail::last_boxed_content(hay)) {
        return normalize_answer(*boxed);
    }
    if (auto numeric = detail::last_numeric_token(hay)) {
        return normalize_answer(*numeric);
    }
    return std::nullopt;
}

/// Reflection token count over the full response text.
inline int count_reflection_tokens(std::string_view text, const TriggerLexicon& lex) {
    return lex.count_occurrences(text);
}

/// Response length in tokens: the producer-declared count when present,
/// otherwise the whitespace-delimited token count of the text (documented
/// approximation of model tokenization).
inline std::int64_t response_length(const Rollout& r) {
    if (r.declared_token_count.has_value()) {
        if (*r.declared_token_count <= 0) {
            throw InvalidInputError("declared token_count must be >= 1 for rollout " +
                                    r.rollout_id);
        }
        return *r.declared_token_count;
    }
    std::int64_t tokens = 0;
    bool in_token = false;
    for (char c : r.text) {
        if (detail::is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++tokens;
        }
    }
    if (tokens == 0) {
        throw InvalidInputError("rollout " + r.rollout_id + " has no countable tokens");
    }
    return tokens;
}

}  // namespace arlcp
