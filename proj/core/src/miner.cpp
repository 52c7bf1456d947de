#include "editforge/miner.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "editforge/diff_metrics.hpp"
#include "editforge/error.hpp"
#include "editforge/util/process.hpp"
#include "editforge/util/text.hpp"

namespace editforge {
namespace {

constexpr std::array kDropReasonNames{
    std::pair{DropReason::none, std::string_view{"none"}},
    std::pair{DropReason::merge_commit, std::string_view{"merge_commit"}},
    std::pair{DropReason::low_stars, std::string_view{"low_stars"}},
    std::pair{DropReason::bad_license, std::string_view{"bad_license"}},
    std::pair{DropReason::multi_file, std::string_view{"multi_file"}},
    std::pair{DropReason::multi_hunk, std::string_view{"multi_hunk"}},
    std::pair{DropReason::bad_message, std::string_view{"bad_message"}},
    std::pair{DropReason::too_many_rows, std::string_view{"too_many_rows"}},
};

constexpr std::string_view kNullBlob = "0000000000000000000000000000000000000000";

bool license_permitted(std::string_view license, const std::vector<std::string>& permitted) {
    const std::string needle = text::to_lower(text::trim(license));
    if (needle.empty()) return false;
    return std::any_of(permitted.begin(), permitted.end(),
                       [&](const std::string& p) { return text::to_lower(p) == needle; });
}

class Git {
public:
    explicit Git(std::filesystem::path repo) : repo_(std::move(repo)) {}

    std::string run(std::vector<std::string> args) const {
        args.insert(args.begin(), {"git", "-C", repo_.string()});
        ProcessResult r = run_process(args);
        if (r.exit_code != 0) {
            throw Error(ErrorCategory::io, "git " + args[3] + " failed in " + repo_.string() +
                                               ": " + std::string(text::trim(r.err)));
        }
        return std::move(r.out);
    }

private:
    std::filesystem::path repo_;
};

struct CommitHeader {
    std::string sha;
    std::vector<std::string> parents;
    std::string message;
};

std::vector<CommitHeader> list_commits(const Git& git) {
    // NUL separates fields and 0x1e terminates each commit; neither appears in
    // commit messages.
    const std::string out =
        git.run({"log", "--reverse", "--topo-order", "--format=%H%x00%P%x00%B%x1e", "HEAD"});
    std::vector<CommitHeader> commits;
    std::size_t pos = 0;
    while (pos < out.size()) {
        std::size_t end = out.find('\x1e', pos);
        if (end == std::string::npos) break;
        std::string_view rec(out.data() + pos, end - pos);
        pos = end + 1;
        while (!rec.empty() && (rec.front() == '\n')) rec.remove_prefix(1);
        std::size_t a = rec.find('\0');
        std::size_t b = rec.find('\0', a + 1);
        if (a == std::string_view::npos || b == std::string_view::npos) continue;
        CommitHeader h;
        h.sha = std::string(rec.substr(0, a));
        for (std::string_view p : text::split_whitespace(rec.substr(a + 1, b - a - 1)))
            h.parents.emplace_back(p);
        h.message = std::string(text::trim(rec.substr(b + 1)));
        commits.push_back(std::move(h));
    }
    return commits;
}

struct FileChange {
    std::string path;
    std::string old_mode;
    std::string new_mode;
    std::string old_blob;
    std::string new_blob;
};

std::vector<FileChange> changed_files(const Git& git, const CommitHeader& c) {
    std::vector<std::string> args{"diff-tree", "-r", "--no-commit-id", "--no-renames", "--raw",
                                  "-z"};
    if (c.parents.empty()) {
        args.push_back("--root");
    } else {
        args.push_back(c.parents.front());
    }
    args.push_back(c.sha);
    const std::string out = git.run(args);

    // -z raw format: ":<old mode> <new mode> <old sha> <new sha> <status>\0<path>\0"
    std::vector<FileChange> changes;
    std::size_t pos = 0;
    while (pos < out.size()) {
        std::size_t meta_end = out.find('\0', pos);
        if (meta_end == std::string::npos) break;
        std::string_view meta(out.data() + pos, meta_end - pos);
        std::size_t path_end = out.find('\0', meta_end + 1);
        if (path_end == std::string::npos) break;
        std::string path = out.substr(meta_end + 1, path_end - meta_end - 1);
        pos = path_end + 1;
        if (meta.empty() || meta.front() != ':') continue;
        meta.remove_prefix(1);
        auto fields = text::split_whitespace(meta);
        if (fields.size() < 5) continue;
        changes.push_back({std::move(path), std::string(fields[0]), std::string(fields[1]),
                           std::string(fields[2]), std::string(fields[3])});
    }
    return changes;
}

bool regular_or_absent(std::string_view mode) {
    return mode == "000000" || mode == "100644" || mode == "100755";
}

std::string read_blob(const Git& git, const std::string& blob) {
    if (blob == kNullBlob) return {};
    return git.run({"cat-file", "blob", blob});
}

bool has_extension(std::string_view path, std::string_view ext) {
    return path.size() >= ext.size() && path.substr(path.size() - ext.size()) == ext;
}

}  // namespace

std::string_view to_string(DropReason reason) noexcept {
    for (const auto& [r, name] : kDropReasonNames)
        if (r == reason) return name;
    return "none";
}

std::optional<DropReason> parse_drop_reason(std::string_view name) noexcept {
    for (const auto& [r, n] : kDropReasonNames)
        if (n == name) return r;
    return std::nullopt;
}

std::vector<std::string> default_permitted_licenses() {
    return {"MIT",      "Apache-2.0", "GPL-3.0",      "GPL-2.0",      "BSD-2.0", "BSD-3.0",
            "LGPL-2.1", "LGPL-3.0",   "AGPL-3.0",     "BSD-2-Clause", "BSD-3-Clause"};
}

bool is_trivial_message(std::string_view message) {
    return text::split_whitespace(message).size() < 2;
}

int count_hunks_saturated(std::string_view before, std::string_view after) {
    const auto a = text::split_lines(before);
    const auto b = text::split_lines(after);
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
           a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
        ++suffix;
    const std::size_t a_mid = a.size() - prefix - suffix;
    const std::size_t b_mid = b.size() - prefix - suffix;
    if (a_mid == 0 && b_mid == 0) return 0;
    if (a_mid == 0 || b_mid == 0) return 1;
    std::unordered_set<std::string_view> a_lines(a.begin() + static_cast<std::ptrdiff_t>(prefix),
                                                 a.end() - static_cast<std::ptrdiff_t>(suffix));
    for (std::size_t i = prefix; i < b.size() - suffix; ++i)
        if (a_lines.count(b[i])) return 2;
    return 1;
}

FilterVerdict apply_auto_filters(const CommitRecord& record, std::size_t files_changed_in_commit,
                                 const FilterConfig& cfg) {
    auto drop = [](DropReason r) { return FilterVerdict{false, r}; };
    if (record.parent_count > 1) return drop(DropReason::merge_commit);
    if (record.stars < cfg.min_stars) return drop(DropReason::low_stars);
    if (!license_permitted(record.license, cfg.permitted_licenses))
        return drop(DropReason::bad_license);
    if (files_changed_in_commit != 1) return drop(DropReason::multi_file);
    if (count_hunks_saturated(record.content_before, record.content_after) != 1)
        return drop(DropReason::multi_hunk);
    if (is_trivial_message(record.message)) return drop(DropReason::bad_message);
    if (line_diff(record.content_before, record.content_after).n_diff > cfg.max_edited_rows)
        return drop(DropReason::too_many_rows);
    return {};
}

RepoMetadata read_repo_metadata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCategory::io, "cannot read repository metadata " + path.string());
    RepoMetadata meta;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view l = text::trim(line);
        if (l.empty() || l.front() == '#') continue;
        std::size_t sep = l.find_first_of("=:");
        if (sep == std::string_view::npos) continue;
        const std::string key = text::to_lower(text::trim(l.substr(0, sep)));
        const std::string_view value = text::trim(l.substr(sep + 1));
        if (key == "stars") {
            try {
                meta.stars = std::stoull(std::string(value));
            } catch (const std::exception&) {
                throw Error(ErrorCategory::data,
                            path.string() + ": stars is not a non-negative integer");
            }
        } else if (key == "license") {
            meta.license = std::string(value);
        }
    }
    return meta;
}

std::size_t ingest_repo(const std::filesystem::path& repo, const IngestOptions& options,
                        const std::function<void(MinedCommit&&)>& sink) {
    const Git git(repo);
    try {
        git.run({"rev-parse", "--verify", "HEAD^{commit}"});
    } catch (const Error& e) {
        throw Error(ErrorCategory::io, "unreadable repository " + repo.string() + ": " + e.what());
    }

    std::filesystem::path repo_dir = std::filesystem::absolute(repo).lexically_normal();
    if (repo_dir.filename().empty()) repo_dir = repo_dir.parent_path();
    const std::string repo_id = repo_dir.filename().string();

    RepoMetadata meta;
    const auto meta_path = options.metadata_path.value_or(
        repo_dir.parent_path() / (repo_id + ".meta"));
    if (options.metadata_path || std::filesystem::exists(meta_path)) {
        meta = read_repo_metadata(meta_path);
    } else {
        spdlog::warn("{}: no metadata sidecar at {}; assuming 0 stars, no license", repo_id,
                     meta_path.string());
    }

    std::size_t emitted = 0;
    for (const CommitHeader& commit : list_commits(git)) {
        const auto changes = changed_files(git, commit);
        for (const FileChange& ch : changes) {
            if (!has_extension(ch.path, options.extension)) continue;
            if (!regular_or_absent(ch.old_mode) || !regular_or_absent(ch.new_mode)) continue;

            MinedCommit mined;
            CommitRecord& r = mined.record;
            r.content_before = read_blob(git, ch.old_blob);
            r.content_after = read_blob(git, ch.new_blob);
            if (!text::is_valid_utf8(r.content_before) || !text::is_valid_utf8(r.content_after)) {
                spdlog::warn("{}@{}: skipping {} (binary or undecodable content)", repo_id,
                             commit.sha.substr(0, 12), ch.path);
                continue;
            }
            if (r.content_before == r.content_after) continue;
            r.repo_id = repo_id;
            r.commit_sha = commit.sha;
            r.message = commit.message;
            r.file_path = ch.path;
            r.stars = meta.stars;
            r.license = meta.license;
            r.parent_count = static_cast<std::uint32_t>(commit.parents.size());
            mined.files_changed = changes.size();
            sink(std::move(mined));
            ++emitted;
        }
    }
    return emitted;
}

std::vector<MinedCommit> ingest_repo(const std::filesystem::path& repo,
                                     const IngestOptions& options) {
    std::vector<MinedCommit> out;
    ingest_repo(repo, options, [&](MinedCommit&& m) { out.push_back(std::move(m)); });
    return out;
}

void to_json(nlohmann::json& j, const CommitRecord& r) {
    j = nlohmann::json{{"repo_id", r.repo_id},
                       {"commit_sha", r.commit_sha},
                       {"message", r.message},
                       {"file_path", r.file_path},
                       {"content_before", r.content_before},
                       {"content_after", r.content_after},
                       {"stars", r.stars},
                       {"license", r.license},
                       {"parent_count", r.parent_count}};
}

void from_json(const nlohmann::json& j, CommitRecord& r) {
    j.at("repo_id").get_to(r.repo_id);
    j.at("commit_sha").get_to(r.commit_sha);
    j.at("message").get_to(r.message);
    j.at("file_path").get_to(r.file_path);
    j.at("content_before").get_to(r.content_before);
    j.at("content_after").get_to(r.content_after);
    j.at("stars").get_to(r.stars);
    j.at("license").get_to(r.license);
    j.at("parent_count").get_to(r.parent_count);
}

}  // namespace editforge
