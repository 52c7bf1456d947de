#include "support.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "editforge/util/process.hpp"

namespace editforge::testing {
namespace fs = std::filesystem;

TempDir::TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "editforge-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

// ---------------------------------------------------------------------------

GitRepo::GitRepo(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    git({"init", "-q", "-b", "main"});
}

std::string GitRepo::git(const std::vector<std::string>& args) const {
    std::vector<std::string> argv{"git",
                                  "-C",
                                  dir_.string(),
                                  "-c",
                                  "user.name=Fixture",
                                  "-c",
                                  "user.email=fixture@example.invalid",
                                  "-c",
                                  "commit.gpgsign=false"};
    argv.insert(argv.end(), args.begin(), args.end());
    auto r = run_process(argv);
    if (r.exit_code != 0) throw std::runtime_error("git failed: " + r.err);
    return r.out;
}

void GitRepo::write(const std::string& file, const std::string& content) {
    write_text(dir_ / file, content);
}

void GitRepo::remove(const std::string& file) { fs::remove(dir_ / file); }

std::string GitRepo::commit(const std::string& message) {
    git({"add", "-A"});
    git({"commit", "-q", "--allow-empty", "-m", message});
    auto sha = git({"rev-parse", "HEAD"});
    while (!sha.empty() && std::isspace(static_cast<unsigned char>(sha.back()))) sha.pop_back();
    return sha;
}

void GitRepo::checkout(const std::string& branch, bool create) {
    if (create)
        git({"checkout", "-q", "-b", branch});
    else
        git({"checkout", "-q", branch});
}

std::string GitRepo::merge(const std::string& branch, const std::string& message) {
    git({"merge", "-q", "--no-ff", "-m", message, branch});
    auto sha = git({"rev-parse", "HEAD"});
    while (!sha.empty() && std::isspace(static_cast<unsigned char>(sha.back()))) sha.pop_back();
    return sha;
}

void GitRepo::merge_without_commit(const std::string& branch) {
    git({"merge", "-q", "--no-ff", "--no-commit", branch});
}

void GitRepo::write_metadata(std::uint64_t stars, const std::string& license) const {
    write_text(dir_.parent_path() / (dir_.filename().string() + ".meta"),
               "# fixture metadata\nstars = " + std::to_string(stars) + "\nlicense: " + license + "\n");
}

// ---------------------------------------------------------------------------

namespace {

std::set<std::string> line_set(const std::string& s) {
    std::set<std::string> out;
    std::size_t start = 0;
    while (start < s.size()) {
        std::size_t nl = s.find('\n', start);
        if (nl == std::string::npos) {
            out.insert(s.substr(start));
            break;
        }
        out.insert(s.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

std::string strip_trailing_ws_per_line(const std::string& s) {
    std::string out, line;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
                line.pop_back();
            out += line;
            if (i < s.size()) out += '\n';
            line.clear();
        } else {
            line += s[i];
        }
    }
    return out;
}

}  // namespace

OracleDiff oracle_line_diff(const std::string& input, const std::string& output) {
    const auto a = line_set(input);
    const auto b = line_set(output);
    std::set<std::string> uni = a, inter;
    uni.insert(b.begin(), b.end());
    for (const auto& l : a)
        if (b.count(l)) inter.insert(l);
    OracleDiff d;
    d.union_size = uni.size();
    d.n_diff = uni.size() - inter.size();
    d.r_diff = d.union_size == 0 ? 0.0 : static_cast<double>(d.n_diff) / static_cast<double>(d.union_size);
    // Integer arithmetic: bin k covers [(k-1)/5, k/5), the last bin is closed.
    if (d.union_size == 0) {
        d.bin = 1;
    } else {
        std::size_t k = (5 * d.n_diff) / d.union_size + 1;
        d.bin = static_cast<int>(k > 5 ? 5 : k);
    }
    return d;
}

std::vector<std::string> oracle_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::size_t oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    return t[a.size()][b.size()];
}

double oracle_rouge_l(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0.0;
    const double l = static_cast<double>(oracle_lcs(a, b));
    if (l == 0) return 0.0;
    const double p = l / static_cast<double>(a.size());
    const double r = l / static_cast<double>(b.size());
    return 2 * p * r / (p + r);
}

double oracle_jaccard(const std::string& a, const std::string& b) {
    auto shingles = [](const std::string& raw) {
        const std::string s = strip_trailing_ws_per_line(raw);
        std::set<std::string> out;
        if (s.size() < 5) {
            out.insert(s);
            return out;
        }
        for (std::size_t i = 0; i + 5 <= s.size(); ++i) out.insert(s.substr(i, 5));
        return out;
    };
    const auto x = shingles(a);
    const auto y = shingles(b);
    std::size_t inter = 0;
    for (const auto& s : x) inter += y.count(s);
    const std::size_t uni = x.size() + y.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string>& words() {
    static const std::vector<std::string> w{
        "alpha",  "bravo",   "charlie", "delta",  "echo",    "foxtrot", "golf",    "hotel",
        "india",  "juliet",  "kilo",    "lima",   "mike",    "november", "oscar",  "papa",
        "quebec", "romeo",   "sierra",  "tango",  "uniform", "victor",  "whiskey", "xray",
        "yankee", "zulu",    "amber",   "basalt", "cobalt",  "dune",    "ember",   "fjord",
        "garnet", "harbor",  "iris",    "jade",   "kelp",    "lagoon",  "marble",  "nectar",
        "onyx",   "pebble",  "quartz",  "ridge",  "slate",   "tundra",  "umber",   "vale",
        "willow", "yarrow",  "zephyr",  "anvil",  "beacon",  "canyon",  "dynamo",  "falcon",
        "glacier", "helix",  "ingot",   "jasper", "kernel",  "lantern", "meteor",  "nimbus",
    };
    return w;
}

const std::vector<std::string>& verbs() {
    static const std::vector<std::string> v{
        "Add",     "Remove",   "Rename",  "Validate", "Cache",   "Document", "Sort",
        "Refactor", "Inline",  "Extract", "Guard",    "Log",     "Memoize",  "Parallelize",
        "Split",   "Merge",    "Encode",  "Decode",   "Compress", "Escape",  "Normalize",
        "Retry",   "Throttle", "Batch",   "Stream",   "Format",  "Parse",    "Serialize",
    };
    return v;
}

}  // namespace

std::string random_code(std::mt19937_64& rng, std::size_t lines) {
    const auto& w = words();
    std::string out;
    for (std::size_t i = 0; i < lines; ++i) {
        const auto& a = w[rng() % w.size()];
        const auto& b = w[rng() % w.size()];
        const auto& c = w[rng() % w.size()];
        out += "    " + a + "_" + std::to_string(rng() % 1000) + " = " + b + "(" + c + ", " +
               std::to_string(rng() % 97) + ")\n";
    }
    return out;
}

TaskInstance make_instance(std::size_t index, Source source) {
    TaskInstance inst;
    inst.instruction = "Apply change number " + std::to_string(index);
    inst.input_code = "value_" + std::to_string(index) + " = " + std::to_string(index) + "\nprint(value_" +
                      std::to_string(index) + ")";
    inst.output_code = inst.input_code + "\nassert value_" + std::to_string(index) + " >= 0";
    inst.source = source;
    inst.id = instance_id(inst.instruction, inst.input_code, inst.output_code);
    inst.diff = line_diff(inst.input_code, inst.output_code);
    return inst;
}

void write_seed_pool(const fs::path& path, std::size_t github, std::size_t curated) {
    const auto& w = words();
    const auto& v = verbs();
    const std::size_t total = github + curated;
    if (total > v.size() || total * 2 > w.size()) throw std::invalid_argument("seed pool too large");
    std::string body;
    for (std::size_t i = 0; i < total; ++i) {
        // Every seed uses its own verb and nouns, so no two instructions share
        // content words and no two code bodies share identifiers.
        const std::string noun = w[2 * i], other = w[2 * i + 1];
        std::mt19937_64 rng(1000 + i);
        const std::string head = "def " + noun + "_" + other + "(items):\n";
        const std::string body_lines = random_code(rng, 4) + "    return items\n";
        std::string input = head + body_lines;
        std::string output = head + "    # " + v[i] + " step for " + noun + "\n" + body_lines;
        nlohmann::json j = {{"instruction", v[i] + " the " + noun + " " + other + " handler"},
                            {"input", input},
                            {"output", output},
                            {"source", i < github ? "github_seed" : "curated_seed"}};
        body += j.dump() + "\n";
    }
    write_text(path, body);
}

fs::path cli_binary() {
#ifdef EDITFORGE_CLI_PATH
    return EDITFORGE_CLI_PATH;
#else
    if (const char* p = std::getenv("EDITFORGE_CLI")) return p;
    return "editforge";
#endif
}

}  // namespace editforge::testing
