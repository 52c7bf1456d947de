#pragma once

// Fixtures and independent reference implementations shared by the unit and
// acceptance tests. The oracles deliberately avoid the library's own helpers
// (tokenizers, line splitters, LCS) so that agreement means something.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "editforge/dataset.hpp"

namespace editforge::testing {

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

/// Scripted git repository for miner tests.
class GitRepo {
public:
    /// Creates and initialises `dir` with default branch "main".
    explicit GitRepo(std::filesystem::path dir);

    void write(const std::string& file, const std::string& content);
    void remove(const std::string& file);
    /// Stages everything and commits; returns the new commit sha.
    std::string commit(const std::string& message);
    void checkout(const std::string& branch, bool create = false);
    /// --no-ff merge of `branch` into the current branch.
    std::string merge(const std::string& branch, const std::string& message);
    /// Starts a --no-ff merge and leaves it staged for the next commit().
    void merge_without_commit(const std::string& branch);
    /// Writes the `<repo>.meta` sidecar next to the repository.
    void write_metadata(std::uint64_t stars, const std::string& license) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::string git(const std::vector<std::string>& args) const;
    std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

struct OracleDiff {
    std::size_t n_diff = 0;
    std::size_t union_size = 0;
    double r_diff = 0.0;
    int bin = 1;
};

/// Set-difference line diff computed with std::set and integer binning.
OracleDiff oracle_line_diff(const std::string& input, const std::string& output);

/// Full-table LCS length over token vectors.
std::size_t oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// The textbook F1 = 2PR/(P+R) over oracle_lcs.
double oracle_rouge_l(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Lowercased tokens split on ASCII whitespace by hand.
std::vector<std::string> oracle_tokens(const std::string& text);

/// Exact Jaccard over std::set of 5-character substrings of the code after
/// trailing-whitespace stripping per line.
double oracle_jaccard(const std::string& a, const std::string& b);

// ---------------------------------------------------------------------------
// Data builders
// ---------------------------------------------------------------------------

/// A small Python-like function body with `lines` distinct lines, drawn from
/// a vocabulary keyed by `rng`.
std::string random_code(std::mt19937_64& rng, std::size_t lines);

/// Distinct, valid seed instances (github_seed unless stated), ready for
/// TaskPool::restore.
TaskInstance make_instance(std::size_t index, Source source = Source::github_seed);

/// Writes a seed pool file of `count` hand-shaped seeds that pass admission.
void write_seed_pool(const std::filesystem::path& path, std::size_t github, std::size_t curated);

/// Path of the editforge binary, set by the build.
std::filesystem::path cli_binary();

}  // namespace editforge::testing
