#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "editforge/dataset.hpp"

namespace editforge {

struct LengthSummary {
    double mean = 0.0;
    double q25 = 0.0;
    double q50 = 0.0;
    double q75 = 0.0;
    std::size_t min = 0;
    std::size_t max = 0;

    friend bool operator==(const LengthSummary&, const LengthSummary&) = default;
};

/// Quartiles use linear interpolation between order statistics.
LengthSummary summarize_lengths(std::vector<std::size_t> lengths);

struct VerbEntry {
    std::string verb;
    std::size_t count = 0;
    std::vector<std::pair<std::string, std::size_t>> objects;

    friend bool operator==(const VerbEntry&, const VerbEntry&) = default;
};

inline constexpr std::size_t kTopVerbs = 20;
inline constexpr std::size_t kTopObjects = 4;
inline constexpr std::size_t kNDiffHistogramCap = 40;

struct CorpusStats {
    std::size_t instances = 0;
    std::map<std::string, std::size_t> sources;
    LengthSummary instruction;
    LengthSummary input;
    LengthSummary output;
    double mean_n_diff = 0.0;
    double mean_r_diff = 0.0;
    /// Most frequent root verbs with their most frequent objects.
    std::vector<VerbEntry> verbs;
    /// Share of instructions whose verb is outside the top list.
    double other_verb_share = 0.0;
    std::map<std::string, std::size_t> intents;
    std::array<std::size_t, kEditRatioBins> bins{};
    /// Index i counts instances with n_diff == i; the last slot holds every
    /// n_diff above the cap.
    std::vector<std::size_t> n_diff_histogram;

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// Throws ContractViolation for an empty corpus.
CorpusStats compute_stats(const std::vector<TaskInstance>& instances,
                          const Tokenizer& tokenizer = whitespace_token_count);

nlohmann::ordered_json to_json(const CorpusStats& stats);

/// Human-readable summary table.
std::string format_stats(const CorpusStats& stats);

/// Root verb (lowercased, lightly lemmatised) and the head noun of the
/// first noun phrase after it. A leading courtesy word or introductory
/// phrase ending in a comma is skipped. The object is empty when none is
/// found. Throws ContractViolation for an empty instruction.
std::pair<std::string, std::string> parse_root_verb(std::string_view instruction);

/// Light lemmatiser used by parse_root_verb.
std::string lemmatize_verb(std::string_view word);

}  // namespace editforge
