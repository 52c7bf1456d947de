#include "editforge/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include <spdlog/fmt/fmt.h>

#include "editforge/error.hpp"
#include "editforge/util/text.hpp"

namespace editforge {
namespace {

constexpr std::string_view kSkipWords[] = {
    "a",    "an",   "the",   "this",  "that",  "these", "those", "all",   "each", "every",
    "some", "any",  "my",    "your",  "its",   "their", "our",   "his",   "her",  "one",
    "more", "both", "other", "another", "such", "new",  "also",  "it",    "them",
};

constexpr std::string_view kBoundaryWords[] = {
    "to",     "in",      "into",   "for",     "with",    "from",    "of",      "on",
    "at",     "by",      "as",     "so",      "that",    "which",   "when",    "where",
    "and",    "or",      "if",     "before",  "after",   "instead", "using",   "via",
    "than",   "without", "inside", "within",  "throughout", "over", "while",  "because",
    "since",  "is",      "are",    "be",      "rather",  "then",    "but",     "until",
    "whose",  "so",      "across", "between", "under",   "about",   "per",     "out",
};

constexpr std::string_view kIntroWords[] = {
    "in", "for", "within", "as", "when", "after", "before", "inside", "on", "to", "using",
};

template <std::size_t N>
bool in(const std::string_view (&list)[N], std::string_view w) {
    return std::find(std::begin(list), std::end(list), w) != std::end(list);
}

struct Word {
    std::string text;   // lowercased, punctuation stripped
    bool ends_clause;   // token ended with , . ; : ! ?
};

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Word> words_of(std::string_view s) {
    std::vector<Word> out;
    for (auto tok : text::split_whitespace(s)) {
        char last = tok.back();
        bool ends = last == ',' || last == '.' || last == ';' || last == ':' || last == '!' ||
                    last == '?';
        std::size_t b = 0, e = tok.size();
        while (b < e && !word_char(tok[b])) ++b;
        while (e > b && !word_char(tok[e - 1])) --e;
        out.push_back({text::to_lower(tok.substr(b, e - b)), ends});
    }
    return out;
}

bool is_consonant(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) && std::string_view("aeiou").find(c) ==
                                                              std::string_view::npos;
}

// "running" -> "runn" -> "run"; keeps "ll", "ss", "zz" endings ("call", "pass").
std::string undouble(std::string w) {
    std::size_t n = w.size();
    if (n >= 3 && w[n - 1] == w[n - 2] && is_consonant(w[n - 1]) &&
        std::string_view("lsz").find(w[n - 1]) == std::string_view::npos)
        w.pop_back();
    return w;
}

double quantile(const std::vector<std::size_t>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return static_cast<double>(sorted[lo]) +
           frac * (static_cast<double>(sorted[hi]) - static_cast<double>(sorted[lo]));
}

template <class Map>
std::vector<std::pair<std::string, std::size_t>> ranked(const Map& counts) {
    std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return v;
}

nlohmann::ordered_json summary_json(const LengthSummary& s) {
    return {{"mean", s.mean}, {"q25", s.q25}, {"q50", s.q50},
            {"q75", s.q75},   {"min", s.min}, {"max", s.max}};
}

}  // namespace

LengthSummary summarize_lengths(std::vector<std::size_t> lengths) {
    LengthSummary s;
    if (lengths.empty()) return s;
    std::sort(lengths.begin(), lengths.end());
    double total = 0;
    for (auto n : lengths) total += static_cast<double>(n);
    s.mean = total / static_cast<double>(lengths.size());
    s.q25 = quantile(lengths, 0.25);
    s.q50 = quantile(lengths, 0.50);
    s.q75 = quantile(lengths, 0.75);
    s.min = lengths.front();
    s.max = lengths.back();
    return s;
}

std::string lemmatize_verb(std::string_view raw) {
    static const std::unordered_map<std::string_view, std::string_view> kExceptions = {
        {"made", "make"},       {"makes", "make"},       {"making", "make"},
        {"uses", "use"},        {"using", "use"},        {"used", "use"},
        {"creates", "create"},  {"creating", "create"},  {"created", "create"},
        {"updates", "update"},  {"updating", "update"},  {"updated", "update"},
        {"removes", "remove"},  {"removing", "remove"},  {"removed", "remove"},
        {"changes", "change"},  {"changing", "change"},  {"changed", "change"},
        {"replaces", "replace"}, {"replacing", "replace"}, {"replaced", "replace"},
        {"moves", "move"},      {"moving", "move"},      {"moved", "move"},
        {"writes", "write"},    {"writing", "write"},    {"wrote", "write"},
        {"written", "write"},   {"handles", "handle"},   {"handling", "handle"},
        {"handled", "handle"},  {"improves", "improve"}, {"improving", "improve"},
        {"improved", "improve"}, {"optimizes", "optimize"}, {"optimizing", "optimize"},
        {"optimized", "optimize"}, {"validates", "validate"}, {"validating", "validate"},
        {"validated", "validate"}, {"gave", "give"},      {"gives", "give"},
        {"giving", "give"},     {"took", "take"},        {"takes", "take"},
        {"taking", "take"},     {"ran", "run"},          {"fixes", "fix"},
        {"does", "do"},         {"did", "do"},           {"done", "do"},
        {"wraps", "wrap"},      {"split", "split"},      {"set", "set"},
        {"put", "put"},         {"cut", "cut"},          {"kept", "keep"},
        {"built", "build"},     {"sent", "send"},        {"caches", "cache"},
        {"caching", "cache"},   {"cached", "cache"},     {"stores", "store"},
        {"storing", "store"},   {"stored", "store"},     {"includes", "include"},
        {"including", "include"}, {"included", "include"}, {"converts", "convert"},
        {"reduces", "reduce"},  {"reducing", "reduce"},  {"reduced", "reduce"},
        {"parses", "parse"},    {"parsing", "parse"},    {"parsed", "parse"},
        {"saves", "save"},      {"saving", "save"},      {"saved", "save"},
        {"raises", "raise"},    {"raising", "raise"},    {"raised", "raise"},
        {"is", "be"},           {"are", "be"},           {"was", "be"},
    };
    static constexpr std::string_view kKeep[] = {
        "process", "access", "pass", "class", "address", "focus", "bias", "alias",
        "this",    "has",    "always", "does", "status", "unless", "analysis",
        "red",     "need",   "feed",   "embed", "shed", "bring", "string", "ring",
        "thing",   "sing",   "spring", "wing",  "speed", "seed",
    };
    std::string w = text::to_lower(raw);
    if (auto it = kExceptions.find(w); it != kExceptions.end()) return std::string(it->second);
    if (in(kKeep, w)) return w;
    auto ends = [&](std::string_view suf) { return w.size() > suf.size() && w.ends_with(suf); };
    if (ends("ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
    if (ends("ing") && w.size() > 5) return undouble(w.substr(0, w.size() - 3));
    if (ends("ied") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
    if (ends("ed") && w.size() > 4) return undouble(w.substr(0, w.size() - 2));
    if (ends("sses") || ends("shes") || ends("ches") || ends("xes") || ends("zes"))
        return w.substr(0, w.size() - 2);
    if (ends("s") && w.size() > 3 && !ends("ss") && !ends("us") && !ends("is"))
        return w.substr(0, w.size() - 1);
    return w;
}

std::pair<std::string, std::string> parse_root_verb(std::string_view instruction) {
    if (text::trim(instruction).empty()) throw ContractViolation("instruction is empty");
    std::vector<Word> words = words_of(instruction);
    std::size_t i = 0;
    auto skip_empty = [&] {
        while (i < words.size() && words[i].text.empty()) ++i;
    };
    skip_empty();
    // "In the parser module, add ..." -> restart after the comma.
    if (i < words.size() && in(kIntroWords, words[i].text)) {
        for (std::size_t k = i; k < words.size() && k < i + 8; ++k) {
            if (words[k].ends_clause && k + 1 < words.size()) {
                i = k + 1;
                break;
            }
        }
    }
    skip_empty();
    if (i < words.size() && (words[i].text == "please" || words[i].text == "kindly")) ++i;
    skip_empty();
    if (i >= words.size()) {
        auto w = words_of(instruction);
        return {w.empty() ? std::string() : w.front().text, ""};
    }
    const std::string verb = lemmatize_verb(words[i].text);
    const bool verb_ends = words[i].ends_clause;
    ++i;

    std::string head;
    if (!verb_ends) {
        while (i < words.size() && (words[i].text.empty() || in(kSkipWords, words[i].text))) {
            if (words[i].ends_clause) return {verb, ""};
            ++i;
        }
        for (; i < words.size(); ++i) {
            const Word& w = words[i];
            if (w.text.empty()) {
                if (w.ends_clause) break;
                continue;
            }
            if (in(kBoundaryWords, w.text)) break;
            head = w.text;
            if (w.ends_clause) break;
        }
    }
    return {verb, head};
}

CorpusStats compute_stats(const std::vector<TaskInstance>& instances, const Tokenizer& tokenizer) {
    if (instances.empty()) throw ContractViolation("cannot compute statistics of an empty corpus");
    const Tokenizer& tok = tokenizer ? tokenizer : Tokenizer(whitespace_token_count);
    CorpusStats s;
    s.instances = instances.size();
    s.n_diff_histogram.assign(kNDiffHistogramCap + 2, 0);

    std::vector<std::size_t> li, lin, lout;
    double n_diff_total = 0, r_diff_total = 0;
    std::map<std::string, std::size_t> verb_counts;
    std::map<std::string, std::map<std::string, std::size_t>> object_counts;
    for (const auto& inst : instances) {
        ++s.sources[std::string(to_string(inst.source))];
        li.push_back(tok(inst.instruction));
        lin.push_back(tok(inst.input_code));
        lout.push_back(tok(inst.output_code));
        n_diff_total += static_cast<double>(inst.diff.n_diff);
        r_diff_total += inst.diff.r_diff;
        ++s.bins[static_cast<std::size_t>(inst.diff.bin - 1)];
        ++s.n_diff_histogram[std::min(inst.diff.n_diff, kNDiffHistogramCap + 1)];
        if (inst.intent) ++s.intents[*inst.intent];
        if (!text::trim(inst.instruction).empty()) {
            auto [verb, object] = parse_root_verb(inst.instruction);
            ++verb_counts[verb];
            if (!object.empty()) ++object_counts[verb][object];
        }
    }
    const double n = static_cast<double>(instances.size());
    s.instruction = summarize_lengths(std::move(li));
    s.input = summarize_lengths(std::move(lin));
    s.output = summarize_lengths(std::move(lout));
    s.mean_n_diff = n_diff_total / n;
    s.mean_r_diff = r_diff_total / n;

    std::size_t covered = 0, total_verbs = 0;
    auto verbs = ranked(verb_counts);
    for (const auto& [_, c] : verbs) total_verbs += c;
    for (std::size_t k = 0; k < verbs.size() && k < kTopVerbs; ++k) {
        VerbEntry e{verbs[k].first, verbs[k].second, {}};
        auto objs = ranked(object_counts[e.verb]);
        if (objs.size() > kTopObjects) objs.resize(kTopObjects);
        e.objects = std::move(objs);
        covered += e.count;
        s.verbs.push_back(std::move(e));
    }
    s.other_verb_share =
        total_verbs ? static_cast<double>(total_verbs - covered) / static_cast<double>(total_verbs)
                    : 0.0;
    return s;
}

nlohmann::ordered_json to_json(const CorpusStats& s) {
    nlohmann::ordered_json j;
    j["instances"] = s.instances;
    j["sources"] = s.sources;
    j["token_lengths"] = {{"instruction", summary_json(s.instruction)},
                          {"input", summary_json(s.input)},
                          {"output", summary_json(s.output)}};
    j["mean_n_diff"] = s.mean_n_diff;
    j["mean_r_diff"] = s.mean_r_diff;
    auto verbs = nlohmann::ordered_json::array();
    for (const auto& v : s.verbs) {
        auto objs = nlohmann::ordered_json::array();
        for (const auto& [o, c] : v.objects) objs.push_back({{"object", o}, {"count", c}});
        verbs.push_back({{"verb", v.verb}, {"count", v.count}, {"objects", objs}});
    }
    j["verbs"] = verbs;
    j["other_verb_share"] = s.other_verb_share;
    j["intents"] = s.intents;
    j["edit_ratio_bins"] = s.bins;
    j["n_diff_histogram"] = s.n_diff_histogram;
    return j;
}

std::string format_stats(const CorpusStats& s) {
    std::string out = fmt::format("instances: {}\n", s.instances);
    for (const auto& [src, c] : s.sources) out += fmt::format("  {:<13} {}\n", src, c);
    out += fmt::format("\n{:<12} {:>8} {:>8} {:>8} {:>8} {:>6} {:>6}\n", "tokens", "mean", "25%",
                       "50%", "75%", "min", "max");
    auto row = [&](std::string_view name, const LengthSummary& l) {
        out += fmt::format("{:<12} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f} {:>6} {:>6}\n", name, l.mean,
                           l.q25, l.q50, l.q75, l.min, l.max);
    };
    row("instruction", s.instruction);
    row("input", s.input);
    row("output", s.output);
    out += fmt::format("\nmean n_diff: {:.2f}\nmean r_diff: {:.3f}\n", s.mean_n_diff,
                       s.mean_r_diff);
    out += "edit-ratio bins:";
    for (std::size_t b = 0; b < s.bins.size(); ++b) out += fmt::format(" [{}] {}", b + 1, s.bins[b]);
    out += "\n\ntop verbs:\n";
    for (const auto& v : s.verbs) {
        out += fmt::format("  {:<12} {:>5}", v.verb, v.count);
        for (const auto& [o, c] : v.objects) out += fmt::format("  {} ({})", o, c);
        out += '\n';
    }
    out += fmt::format("  other verbs: {:.1f}%\n", 100.0 * s.other_verb_share);
    if (!s.intents.empty()) {
        out += "\nintents:\n";
        for (const auto& [label, c] : ranked(s.intents))
            out += fmt::format("  {:<28} {}\n", label, c);
    }
    return out;
}

}  // namespace editforge
