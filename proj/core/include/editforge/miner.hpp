#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace editforge {

/// One (commit, changed file) pair mined from a repository.
struct CommitRecord {
    std::string repo_id;
    std::string commit_sha;
    std::string message;
    std::string file_path;
    std::string content_before;
    std::string content_after;
    std::uint64_t stars = 0;
    std::string license;
    std::uint32_t parent_count = 0;
};

void to_json(nlohmann::json& j, const CommitRecord& r);
void from_json(const nlohmann::json& j, CommitRecord& r);

/// Drop reasons in the order the filter checks them.
enum class DropReason {
    none,
    merge_commit,
    low_stars,
    bad_license,
    multi_file,
    multi_hunk,
    bad_message,
    too_many_rows,
};

std::string_view to_string(DropReason reason) noexcept;
std::optional<DropReason> parse_drop_reason(std::string_view name) noexcept;

struct FilterVerdict {
    bool kept = true;
    DropReason reason = DropReason::none;

    friend bool operator==(const FilterVerdict&, const FilterVerdict&) = default;
};

/// Permissive licenses accepted by default, plus the SPDX spellings of the
/// two BSD variants.
std::vector<std::string> default_permitted_licenses();

struct FilterConfig {
    std::uint64_t min_stars = 100;
    std::size_t max_edited_rows = 100;
    std::vector<std::string> permitted_licenses = default_permitted_licenses();
};

/// Checks, in order: merge_commit, low_stars, bad_license, multi_file,
/// multi_hunk, bad_message, too_many_rows. Returns the first failure.
FilterVerdict apply_auto_filters(const CommitRecord& record, std::size_t files_changed_in_commit,
                                 const FilterConfig& cfg);

/// Number of contiguous change hunks in a minimal line diff (zero context),
/// saturated at 2.
///
/// After trimming the common prefix and suffix, the remaining middle regions
/// start and end with differing lines; any minimal diff keeps every line of
/// their LCS, so the change is one hunk iff the middles share no line.
int count_hunks_saturated(std::string_view before, std::string_view after);

/// Fewer than two whitespace-separated words.
bool is_trivial_message(std::string_view message);

struct RepoMetadata {
    std::uint64_t stars = 0;
    std::string license;
};

/// Reads a `key = value` (or `key: value`) sidecar with keys `stars` and
/// `license`. Unknown keys and `#` comments are ignored.
RepoMetadata read_repo_metadata(const std::filesystem::path& path);

struct MinedCommit {
    CommitRecord record;
    std::size_t files_changed = 0;
};

struct IngestOptions {
    std::string extension = ".py";
    /// Defaults to `<repo>.meta` next to the repository directory; without a
    /// sidecar the repository gets 0 stars and no license.
    std::optional<std::filesystem::path> metadata_path;
};

/// Streams one MinedCommit per (commit, changed source file) in commit order
/// (oldest first). Merge commits are diffed against their first parent and
/// emitted with parent_count > 1. Binary or non-UTF-8 content is skipped with
/// a warning; so are pairs whose content did not change.
///
/// Throws Error{io} when `repo` is not a readable git repository with at
/// least one commit. Returns the number of records emitted.
std::size_t ingest_repo(const std::filesystem::path& repo, const IngestOptions& options,
                        const std::function<void(MinedCommit&&)>& sink);

std::vector<MinedCommit> ingest_repo(const std::filesystem::path& repo,
                                     const IngestOptions& options = {});

}  // namespace editforge
