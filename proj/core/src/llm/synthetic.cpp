#include "editforge/llm/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <vector>

#include "editforge/llm/prompts.hpp"
#include "editforge/util/hash.hpp"
#include "editforge/util/rng.hpp"
#include "editforge/util/text.hpp"

namespace editforge::llm {
namespace {

using Slots = std::map<std::string, std::string>;

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& options) {
    return options[rng.below(N)];
}

std::string fill(std::string_view tmpl, const Slots& slots) {
    return render({PromptKind::judge, std::string(tmpl)}, slots);
}

bool contains(std::string_view hay, std::string_view needle) {
    return hay.find(needle) != std::string_view::npos;
}

// Text following `marker` on the same line.
std::string line_after(std::string_view prompt, std::string_view marker) {
    auto pos = prompt.rfind(marker);
    if (pos == std::string_view::npos) return {};
    auto rest = prompt.substr(pos + marker.size());
    return std::string(text::trim(rest.substr(0, rest.find('\n'))));
}

constexpr std::array<std::string_view, 32> kNouns{
    "order",   "invoice", "sensor",  "patient", "tweet",   "record",  "image",   "playlist",
    "ticket",  "user",    "account", "payment", "message", "product", "review",  "article",
    "booking", "device",  "report",  "session", "course",  "student", "vehicle", "shipment",
    "recipe",  "comment", "event",   "job",     "metric",  "song",    "task",    "customer",
};

constexpr std::array<std::string_view, 24> kVerbs{
    "load",  "parse",  "compute", "update",    "fetch", "render", "process", "validate",
    "export", "build", "merge",   "filter",    "send",  "sync",   "score",   "normalize",
    "group", "format", "collect", "summarize", "apply", "rank",   "clean",   "resolve",
};

constexpr std::array<std::string_view, 16> kAttrs{
    "price", "timestamp", "count", "name", "status", "score", "size", "rating",
    "amount", "priority", "duration", "weight", "level", "total", "age", "quantity",
};

constexpr std::string_view kStopwords[] = {
    "a",     "an",    "the",   "and",   "or",    "for",   "with",  "that",  "this",  "from",
    "into",  "where", "which", "when",  "their", "there", "they",  "them",  "have",  "has",
    "been",  "will",  "would", "could", "should", "about", "using", "used", "uses", "each",
    "every", "other", "some",  "more",  "most",  "than",  "then",  "such",  "only",  "also",
    "code",  "python", "function", "task", "scenario", "your", "what",  "while", "over",
};

bool is_stopword(std::string_view w) {
    return std::find(std::begin(kStopwords), std::end(kStopwords), w) != std::end(kStopwords);
}

// Lowercase alphabetic words (4..12 chars) usable as identifiers.
std::vector<std::string> identifier_words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 4 && cur.size() <= 12 && !is_stopword(cur) &&
            std::find(out.begin(), out.end(), cur) == out.end())
            out.push_back(cur);
        cur.clear();
    };
    for (char c : s) {
        if (std::isalpha(static_cast<unsigned char>(c)))
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else
            flush();
    }
    flush();
    return out;
}

// ---------------------------------------------------------------------------
// Instruction generation
// ---------------------------------------------------------------------------

constexpr std::array<std::string_view, 36> kCoreActions{
    "add a docstring to `{fn}` describing its parameters and return value",
    "add logging statements to `{fn}` that record each {noun} being processed",
    "wrap the file access in `{fn}` in a try/except block and report {attr} errors",
    "add type hints to every parameter of `{fn}` and annotate its return type",
    "rename the variable `{var}` to `{var2}` throughout `{fn}`",
    "validate that `{var}` is not empty at the start of `{fn}` and raise ValueError otherwise",
    "cache the results of `{fn}` with functools.lru_cache to avoid repeated {noun} lookups",
    "replace the nested loops in `{fn}` with a dictionary keyed by {noun} id",
    "turn `{fn}` into a generator that yields one {noun} at a time",
    "move the {noun} parsing logic out of `{fn}` into a helper named `{fn2}`",
    "fix the off-by-one error in the loop over `{var}` inside `{fn}`",
    "use a with statement so the {resource} opened in `{fn}` is always closed",
    "read the {attr} limit from an environment variable instead of hard-coding it in `{fn}`",
    "sort the {noun} list returned by `{fn}` by `{attr}` in descending order",
    "give `{fn}` a `{param}` keyword argument that defaults to {default}",
    "replace string concatenation in `{fn}` with f-strings",
    "delete the unused import of `{module}` and the dead branch in `{fn}`",
    "write a unit test for `{fn}` that covers an empty `{var}`",
    "run the {noun} requests in `{fn}` concurrently with a ThreadPoolExecutor",
    "hash the {noun} password with hashlib before `{fn}` stores it",
    "comment each step of the {attr} calculation in `{fn}`",
    "return None from `{fn}` instead of raising KeyError when a {noun} is missing",
    "keep the seen {noun} ids in `{fn}` in a set rather than a list",
    "translate the user-facing messages in `{fn}` with gettext",
    "retry the {resource} call in `{fn}` with exponential backoff",
    "make `{fn}` accept several {noun}s and return the {agg} of their `{attr}` values",
    "swap the print calls in `{fn}` for a module-level logger",
    "split `{fn}` so loading the {noun} data and {verb2}ing it happen in separate functions",
    "cap how many {noun}s `{fn}` returns using a new `{param}` argument",
    "round the computed {attr} in `{fn}` to two decimal places",
    "skip {noun}s whose `{attr}` is negative in `{fn}`",
    "convert the {noun} timestamps in `{fn}` to timezone-aware UTC datetimes",
    "store the intermediate {noun} totals of `{fn}` in a collections.Counter",
    "make `{fn}` raise a custom `{exc}` when the {resource} is unavailable",
    "format the output of `{fn}` according to PEP 8 line length limits",
    "remove the duplicated {attr} check that appears twice in `{fn}`",
};

constexpr std::array<std::string_view, 8> kOpeners{
    "", "", "", "In the {noun} module, ", "For the {noun} service, ", "Please ",
    "Within the {scope} code, ", "As a small cleanup, ",
};

constexpr std::array<std::string_view, 14> kSuffixes{
    "",
    "",
    "",
    "",
    " so the behaviour is easier to verify",
    " without changing its public signature",
    " and keep the existing behaviour for valid input",
    " to make failures easier to diagnose",
    " so that large {noun} batches stay fast",
    " while keeping the code readable",
    " because the {attr} values can be missing",
    " for the nightly {noun} import job",
    " since callers rely on consistent {attr} ordering",
    " before the next release",
};

constexpr std::array<std::string_view, 6> kResources{"file", "database connection", "socket",
                                                     "HTTP session", "cursor", "lock"};
constexpr std::array<std::string_view, 6> kModules{"os", "sys", "re", "json", "time", "math"};
constexpr std::array<std::string_view, 5> kAggs{"sum", "average", "maximum", "minimum", "median"};
constexpr std::array<std::string_view, 5> kDefaults{"None", "10", "False", "True", "0"};
constexpr std::array<std::string_view, 6> kScopes{"billing", "reporting", "ingestion",
                                                  "analytics", "scheduling", "notification"};

std::string identifier(Rng& rng, std::string_view noun) {
    return std::string(pick(rng, kVerbs)) + "_" + std::string(noun);
}

std::string plural(std::string_view noun) {
    return noun.ends_with('s') ? std::string(noun) : std::string(noun) + "s";
}

std::string make_instruction(Rng& rng, const std::vector<std::string>& hint_words) {
    std::string noun(hint_words.empty() || rng.below(2) == 0
                         ? pick(rng, kNouns)
                         : std::string_view(hint_words[rng.below(hint_words.size())]));
    std::string noun2(pick(rng, kNouns));
    Slots slots{
        {"fn", identifier(rng, noun)},
        {"fn2", identifier(rng, noun2)},
        {"noun", noun},
        {"var", plural(noun)},
        {"var2", noun + "_" + std::string(pick(rng, kAttrs)) + "s"},
        {"attr", std::string(pick(rng, kAttrs))},
        {"param", "max_" + plural(noun2)},
        {"default", std::string(pick(rng, kDefaults))},
        {"module", std::string(pick(rng, kModules))},
        {"resource", std::string(pick(rng, kResources))},
        {"agg", std::string(pick(rng, kAggs))},
        {"verb2", std::string(pick(rng, kVerbs))},
        {"scope", std::string(pick(rng, kScopes))},
        {"exc", std::string(1, static_cast<char>(std::toupper(noun[0]))) + noun.substr(1) +
                    "Error"},
    };
    std::string out = fill(pick(rng, kOpeners), slots);
    std::string core = fill(pick(rng, kCoreActions), slots);
    if (out.empty() || out == "Please ") {
        if (!core.empty()) core[0] = static_cast<char>(std::toupper(core[0]));
        if (out == "Please ") core[0] = static_cast<char>(std::tolower(core[0]));
    }
    out += core;
    out += fill(pick(rng, kSuffixes), slots);
    out += ".";
    return out;
}

std::string respond_instructions(std::string_view prompt, Rng& rng) {
    std::vector<std::string> exemplars;
    auto pos = prompt.find("Existing instructions:");
    if (pos != std::string_view::npos) {
        for (auto line : text::split_lines(prompt.substr(pos))) {
            auto t = text::trim(line);
            if (!t.empty() && std::isdigit(static_cast<unsigned char>(t[0])))
                exemplars.emplace_back(t.substr(t.find(' ') + 1));
        }
    }
    // Prose with no list now and then, as real models occasionally do.
    if (rng.below(50) == 0) return "Here are some more ideas for code editing tasks you could try.";

    std::vector<std::string> hint_words = identifier_words(line_after(prompt, "kind of edit:"));
    std::string out;
    const std::size_t n = 6 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
        std::string item = (!exemplars.empty() && rng.below(12) == 0)
                               ? exemplars[rng.below(exemplars.size())]
                               : make_instruction(rng, hint_words);
        out += std::to_string(i + 1) + ". " + item + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

constexpr std::array<std::string_view, 12> kApps{
    "web dashboard", "command-line tool", "REST API", "data pipeline", "mobile backend",
    "desktop app",   "chat bot",          "ETL job",  "IoT gateway",   "trading engine",
    "research notebook", "game server",
};

constexpr std::array<std::string_view, 12> kDomains{
    "hospital",   "e-commerce", "logistics", "music streaming", "banking",  "school",
    "restaurant", "weather",    "fitness",   "real estate",     "airline",  "library",
};

constexpr std::array<std::string_view, 10> kActivities{
    "tracks {noun}s for",  "reports daily {noun} statistics to", "imports {noun} data for",
    "schedules {noun}s for", "audits {noun} changes for", "recommends {noun}s to",
    "archives old {noun}s for", "sends {noun} alerts to", "bills {noun}s for",
    "visualises {noun} trends for",
};

constexpr std::array<std::string_view, 8> kAudiences{
    "small business owners", "nurses", "warehouse staff", "students",
    "analysts",              "drivers", "support agents", "researchers",
};

std::string respond_scenarios(std::string_view prompt, Rng& rng) {
    std::size_t n = 10;
    std::size_t roll = rng.below(100);
    if (roll == 0) return "";
    if (roll < 4) n = 4;
    auto words = identifier_words(line_after(prompt, "Task:"));
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string noun(words.empty() || rng.below(3) == 0
                             ? pick(rng, kNouns)
                             : std::string_view(words[rng.below(words.size())]));
        Slots slots{{"noun", noun}};
        out += std::to_string(i + 1) + ". A " + std::string(pick(rng, kDomains)) + " " +
               std::string(pick(rng, kApps)) + " that " + fill(pick(rng, kActivities), slots) +
               " " + std::string(pick(rng, kAudiences)) + ".\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

struct Program {
    std::vector<std::string> lines;
    std::string fn;
    std::vector<std::string> params;
    std::string acc;     // accumulator variable
    std::size_t def = 0; // index of the main def line
};

constexpr std::array<std::string_view, 6> kAccumulators{"result",   "totals",  "output",
                                                      "selected", "buckets", "acc"};

std::string snake(std::string a, std::string_view b) { return a + "_" + std::string(b); }

Program build_program(Rng& rng, const std::vector<std::string>& words) {
    auto word = [&]() -> std::string {
        if (!words.empty() && rng.below(3) != 0) return words[rng.below(words.size())];
        return std::string(pick(rng, kNouns));
    };
    Program p;
    const std::string noun = word();
    const std::string attr(pick(rng, kAttrs));
    const std::string key2(pick(rng, kAttrs));
    p.fn = snake(std::string(pick(rng, kVerbs)), noun + (rng.below(2) ? "s" : ""));
    p.params.push_back(plural(noun));
    if (rng.below(2)) p.params.push_back("min_" + attr);
    if (rng.below(3) == 0) p.params.push_back(word() + "_" + std::string(pick(rng, kAttrs)));
    p.acc = std::string(pick(rng, kAccumulators));
    if (rng.below(4) == 0) p.acc = word() + "_" + p.acc;

    std::set<std::string_view> imports;
    const std::size_t n_imports = rng.below(3);
    for (std::size_t i = 0; i < n_imports; ++i) imports.insert(pick(rng, kModules));
    for (auto m : imports) p.lines.push_back("import " + std::string(m));
    if (!imports.empty()) p.lines.push_back("");
    const std::string limit_name = text::to_lower(noun) + "_limit";
    const int limit = 5 + static_cast<int>(rng.below(500));
    if (rng.below(2)) {
        std::string upper = limit_name;
        for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        p.lines.push_back(upper + " = " + std::to_string(limit));
        p.lines.push_back("");
    }

    std::string sig = "def " + p.fn + "(";
    for (std::size_t i = 0; i < p.params.size(); ++i) sig += (i ? ", " : "") + p.params[i];
    sig += "):";
    p.def = p.lines.size();
    p.lines.push_back(sig);

    const std::string item = noun.substr(0, std::min<std::size_t>(noun.size(), 4 + rng.below(3)));
    const std::string& src = p.params[0];
    const bool dict_acc = rng.below(2) == 0;
    p.lines.push_back("    " + p.acc + (dict_acc ? " = {}" : " = []"));
    std::vector<std::string> loop_body;
    const std::string threshold = p.params.size() > 1 ? p.params[1] : std::to_string(limit % 97);
    switch (rng.below(5)) {
        case 0:
            loop_body.push_back("if " + item + "['" + attr + "'] < " + threshold + ":");
            loop_body.push_back("    continue");
            break;
        case 1:
            loop_body.push_back("if not " + item + ".get('" + attr + "'):");
            loop_body.push_back("    continue");
            break;
        case 2:
            loop_body.push_back(key2 + " = " + item + ".get('" + key2 + "', " +
                                std::to_string(rng.below(10)) + ")");
            break;
        case 3:
            loop_body.push_back(attr + "_value = float(" + item + "['" + attr + "']) * " +
                                std::to_string(1 + rng.below(9)) + "." +
                                std::to_string(rng.below(10)));
            break;
        default:
            break;
    }
    if (dict_acc) {
        loop_body.push_back("key = " + item + "['" + key2 + "']");
        loop_body.push_back(p.acc + ".setdefault(key, []).append(" + item + ")");
    } else if (rng.below(2)) {
        loop_body.push_back(p.acc + ".append(" + item + "['" + attr + "'])");
    } else {
        loop_body.push_back(p.acc + ".append((" + item + "['" + key2 + "'], " + item + "))");
    }
    p.lines.push_back("    for " + item + " in " + src + ":");
    for (auto& l : loop_body) p.lines.push_back("        " + l);

    switch (rng.below(4)) {
        case 0:
            p.lines.push_back("    count = len(" + p.acc + ")");
            p.lines.push_back("    print('" + p.fn + ":', count)");
            break;
        case 1:
            if (!dict_acc) {
                p.lines.push_back("    " + p.acc + " = " + p.acc + "[:" + std::to_string(limit) +
                                  "]");
            } else {
                p.lines.push_back("    " + p.acc + " = {k: v for k, v in " + p.acc +
                                  ".items() if v}");
            }
            break;
        case 2:
            p.lines.push_back("    if not " + p.acc + ":");
            p.lines.push_back("        return " + std::string(dict_acc ? "{}" : "[]"));
            break;
        default:
            break;
    }
    p.lines.push_back("    return " + p.acc);

    if (rng.below(3) == 0) {
        const std::string helper = snake(std::string(pick(rng, kVerbs)), word());
        p.lines.push_back("");
        p.lines.push_back("");
        p.lines.push_back("def " + helper + "(path):");
        p.lines.push_back("    with open(path) as handle:");
        p.lines.push_back("        rows = [line.strip().split('" +
                          std::string(rng.below(2) ? "," : "\\t") + "') for line in handle]");
        p.lines.push_back("    return " + p.fn + "(rows)");
    }
    return p;
}

std::size_t return_index(const Program& p) {
    for (std::size_t i = p.def + 1; i < p.lines.size(); ++i) {
        if (p.lines[i].rfind("    return ", 0) == 0) return i;
        if (p.lines[i].rfind("def ", 0) == 0) break;
    }
    return p.lines.size() - 1;
}

std::size_t body_end(const Program& p) {
    std::size_t i = p.def + 1;
    while (i < p.lines.size() && (p.lines[i].empty() || p.lines[i][0] == ' ')) ++i;
    while (i > p.def + 1 && p.lines[i - 1].empty()) --i;
    return i;
}

void insert_import(Program& p, const std::string& stmt) {
    p.lines.insert(p.lines.begin(), stmt);
    ++p.def;
    if (p.lines.size() > 1 && p.lines[1].rfind("import ", 0) != 0 &&
        p.lines[1].rfind("from ", 0) != 0 && !p.lines[1].empty()) {
        p.lines.insert(p.lines.begin() + 1, "");
        ++p.def;
    }
}

// Applies an edit matching the instruction's wording. Every branch changes at
// least one line.
void apply_edit(Program& p, std::string_view instruction, Rng& rng) {
    const std::string lower = text::to_lower(instruction);
    auto has = [&](std::string_view w) { return contains(lower, w); };
    const std::string& first = p.params[0];

    if (has("docstring")) {
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(p.def) + 1,
                       "    \"\"\"Return the " + p.acc + " built from " + first + ".\"\"\"");
    } else if (has("logging") || has("logger") || has("print")) {
        std::size_t r = return_index(p);
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(r),
                       "    logger.info('" + p.fn + " processed %d items', len(" + first + "))");
        for (auto& l : p.lines)
            if (l.rfind("    print(", 0) == 0) l = "    logger.debug(" + l.substr(10);
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(p.def), "");
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(p.def),
                       "logger = logging.getLogger(__name__)");
        p.def += 2;
        insert_import(p, "import logging");
    } else if (has("try") || has("except") || has("error") || has("raise")) {
        std::size_t end = body_end(p);
        for (std::size_t i = p.def + 1; i < end; ++i)
            if (!p.lines[i].empty()) p.lines[i] = "    " + p.lines[i];
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(end),
                       {"    except (KeyError, TypeError) as exc:",
                        "        raise ValueError(f'bad " + first + " entry: {exc}') from exc"});
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(p.def) + 1, "    try:");
    } else if (has("type hint") || has("annotate")) {
        std::string sig = "def " + p.fn + "(";
        for (std::size_t i = 0; i < p.params.size(); ++i)
            sig += (i ? ", " : "") + p.params[i] + (i == 0 ? ": list" : ": float");
        sig += ") -> object:";
        p.lines[p.def] = sig;
    } else if (has("validate") || has("empty") || has("check")) {
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(p.def) + 1,
                       {"    if not " + first + ":",
                        "        raise ValueError('" + first + " must not be empty')"});
    } else if (has("cache")) {
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(p.def),
                       "@lru_cache(maxsize=" + std::to_string(32 << rng.below(4)) + ")");
        ++p.def;
        insert_import(p, "from functools import lru_cache");
    } else if (has("rename")) {
        const std::string renamed = p.acc + "_" + std::string(pick(rng, kAttrs));
        for (auto& l : p.lines) {
            std::size_t pos = 0;
            while ((pos = l.find(p.acc, pos)) != std::string::npos) {
                bool left = pos == 0 || !(std::isalnum(static_cast<unsigned char>(l[pos - 1])) ||
                                          l[pos - 1] == '_');
                std::size_t e = pos + p.acc.size();
                bool right = e >= l.size() ||
                             !(std::isalnum(static_cast<unsigned char>(l[e])) || l[e] == '_');
                if (left && right) {
                    l.replace(pos, p.acc.size(), renamed);
                    pos += renamed.size();
                } else {
                    pos = e;
                }
            }
        }
    } else if (has("comment")) {
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(p.def) + 2,
                       "    # Walk every entry and keep the ones we need.");
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(p.def) + 1,
                       "    # Collect the " + p.acc + " for the caller.");
    } else if (has("sort")) {
        std::size_t r = return_index(p);
        p.lines[r] = "    return sorted(" + p.acc + ", reverse=True)";
    } else if (has("generator") || has("yield")) {
        std::size_t r = return_index(p);
        p.lines[r] = "    yield from " + p.acc;
    } else if (has("set ") || has("a set")) {
        for (auto& l : p.lines)
            if (l == "    " + p.acc + " = []") l = "    " + p.acc + " = set()";
        for (auto& l : p.lines) {
            auto pos = l.find(p.acc + ".append(");
            if (pos != std::string::npos) l.replace(pos, p.acc.size() + 8, p.acc + ".add(");
        }
        std::size_t r = return_index(p);
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(r),
                       "    # membership checks are O(1) now");
    } else {
        // Generic edit: bound the input and add a guard near the top.
        p.lines.insert(p.lines.begin() + static_cast<std::ptrdiff_t>(p.def) + 1,
                       {"    if " + first + " is None:",
                        "        " + first + " = []",
                        "    " + first + " = list(" + first + ")[:" +
                            std::to_string(10 + rng.below(990)) + "]"});
    }
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

std::string respond_instance(std::string_view prompt, Rng& rng) {
    const std::string task = line_after(prompt, "Task:");
    const std::string scenario = line_after(prompt, "Scenario:");
    auto words = identifier_words(scenario);
    for (auto& w : identifier_words(task))
        if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);

    Program p = build_program(rng, words);
    const std::string input = join_lines(p.lines);
    apply_edit(p, task, rng);
    const std::string output = join_lines(p.lines);

    std::size_t roll = rng.below(100);
    if (roll < 2) return "```python\n" + input + "```\n";
    if (roll < 4) return "Input:\n```python\n" + input + "```\nOutput:\n```python\n" + input + "```\n";
    return "Input code:\n```python\n" + input + "```\n\nOutput code:\n```python\n" + output +
           "```\n";
}

// ---------------------------------------------------------------------------
// Judge, rewrite, classify
// ---------------------------------------------------------------------------

std::string between(std::string_view s, std::string_view open, std::string_view close) {
    auto a = s.find(open);
    if (a == std::string_view::npos) return {};
    a += open.size();
    auto b = s.find(close, a);
    if (b == std::string_view::npos) return std::string(s.substr(a));
    return std::string(s.substr(a, b - a));
}

std::string respond_judge(std::string_view prompt, Rng& rng) {
    const std::string input = between(prompt, "Input:\n```python\n", "\n```");
    const std::string output = between(prompt, "Output:\n```python\n", "\n```");
    if (text::trim(output).empty() || input == output) return "No";
    return rng.below(100) < 85 ? "Yes" : "No";
}

std::string respond_rewrite(std::string_view prompt, Rng& rng) {
    const std::string message = line_after(prompt, "Commit message:");
    const auto words = text::split_whitespace(message);
    if (words.size() >= 3) return message;
    const std::string file = between(prompt, "the python file ", ". Rewrite");
    if (words.empty()) return "";
    // Terse message: describe the change from the first line the commit added.
    const std::string before = between(prompt, "Code before:\n```python\n", "\n```");
    const std::string after = between(prompt, "Code after:\n```python\n", "\n```");
    std::set<std::string_view> old_lines;
    for (auto l : text::split_lines(before)) old_lines.insert(text::trim(l));
    for (auto l : text::split_lines(after)) {
        auto t = text::trim(l);
        if (!t.empty() && !old_lines.count(t))
            return "Update " + file + " to add `" + std::string(t) + "`";
    }
    return rng.below(2) ? "Remove the obsolete lines from " + file
                        : "Simplify the code in " + file;
}

struct KeywordLabel {
    std::string_view keyword;
    std::string_view label;
};

constexpr KeywordLabel kKeywordLabels[] = {
    {"docstring", "Add Documentation"},  {"document", "Add Documentation"},
    {"logging", "Add Logging"},          {"logger", "Add Logging"},
    {"cache", "Add Caching"},            {"type hint", "Add Type Hints"},
    {"annotate", "Add Type Hints"},      {"rename", "Rename Identifiers"},
    {"unit test", "Add Tests"},          {"try/except", "Error Handling"},
    {"exception", "Error Handling"},     {"raise", "Error Handling"},
    {"error", "Error Handling"},         {"validate", "Input Validation"},
    {"thread", "Concurrency/Parallelism"}, {"concurrent", "Concurrency/Parallelism"},
    {"password", "Improve Security"},    {"hash", "Improve Security"},
    {"environment variable", "Configuration Management"},
    {"gettext", "Internationalization"}, {"translate", "Internationalization"},
    {"generator", "Memory Optimization"}, {"comment", "Add Comments"},
    {"f-string", "Improve Readability"}, {"readab", "Improve Readability"},
    {"pep 8", "Code Style/Formatting"},  {"duplicat", "Remove Redundancy"},
    {"unused", "Remove Redundancy"},     {"helper", "Refactor Code"},
    {"split", "Refactor Code"},          {"nested loops", "Optimize Performance"},
    {"a set", "Data Structure Change"},  {"counter", "Data Structure Change"},
    {"off-by-one", "Bug Fix"},           {"fix", "Bug Fix"},
    {"keyword argument", "API Modification"}, {"argument", "API Modification"},
    {"python 2", "Improve Compatibility"}, {"timezone", "Improve Compatibility"},
    {"with statement", "Improve Maintainability"},
};

std::string respond_classify(std::string_view prompt, Rng& rng) {
    std::vector<std::string> labels;
    const std::string block = between(prompt, "Categories:\n", "\n\n");
    for (auto l : text::split_lines(block)) {
        auto t = text::trim(l);
        if (t.size() > 2 && t[0] == '-') labels.emplace_back(text::trim(t.substr(1)));
    }
    const std::string instruction = text::to_lower(line_after(prompt, "Instruction:"));
    auto listed = [&](std::string_view label) {
        return std::find(labels.begin(), labels.end(), label) != labels.end();
    };
    for (const auto& kl : kKeywordLabels)
        if (contains(instruction, kl.keyword) && listed(kl.label)) return std::string(kl.label);
    if (labels.empty()) return "Add Functionality";
    if (listed("Add Functionality") && rng.below(2)) return "Add Functionality";
    return labels[rng.below(labels.size())];
}

}  // namespace

std::string synthetic_response(std::string_view prompt) {
    Rng rng(mix64(fnv1a64(prompt)));
    if (contains(prompt, "generate a list of diverse python code editing instructions"))
        return respond_instructions(prompt, rng);
    if (contains(prompt, "come up with 10 diverse scenarios")) return respond_scenarios(prompt, rng);
    if (contains(prompt, "come up with examples for the following code editing tasks"))
        return respond_instance(prompt, rng);
    if (contains(prompt, "acceptable edited code response")) return respond_judge(prompt, rng);
    if (contains(prompt, "Rewrite the commit message")) return respond_rewrite(prompt, rng);
    if (contains(prompt, "Classify the intent")) return respond_classify(prompt, rng);
    return "";
}

MockChatClient::Responder synthetic_responder() {
    return [](std::string_view prompt) { return synthetic_response(prompt); };
}

}  // namespace editforge::llm
