#include <gtest/gtest.h>

#include "editforge/error.hpp"
#include "editforge/miner.hpp"
#include "support.hpp"

using namespace editforge;
namespace fx = editforge::testing;
using editforge::testing::GitRepo;
using editforge::testing::TempDir;

namespace {

CommitRecord passing_record() {
    CommitRecord r;
    r.message = "Handle missing config file";
    r.file_path = "app.py";
    r.content_before = "a = 1\nb = 2\nc = 3\nd = 4\n";
    r.content_after = "a = 1\nb = 20\nc = 30\nd = 4\n";
    r.stars = 150;
    r.license = "MIT";
    r.parent_count = 1;
    return r;
}

}  // namespace

TEST(Filters, PassingRecordKept) {
    auto v = apply_auto_filters(passing_record(), 1, FilterConfig{});
    EXPECT_EQ(v, (FilterVerdict{true, DropReason::none}));
}

TEST(Filters, EachRule) {
    FilterConfig cfg;
    auto r = passing_record();
    EXPECT_EQ(apply_auto_filters(r, 2, cfg).reason, DropReason::multi_file);

    r = passing_record();
    r.message = "fix";
    EXPECT_EQ(apply_auto_filters(r, 1, cfg).reason, DropReason::bad_message);
    r.message = "   ";
    EXPECT_EQ(apply_auto_filters(r, 1, cfg).reason, DropReason::bad_message);

    r = passing_record();
    r.content_before.clear();
    r.content_after.clear();
    for (int i = 0; i < 150; ++i) r.content_after += "line_" + std::to_string(i) + " = 0\n";
    EXPECT_EQ(apply_auto_filters(r, 1, cfg).reason, DropReason::too_many_rows);

    r = passing_record();
    r.stars = 99;
    EXPECT_EQ(apply_auto_filters(r, 1, cfg).reason, DropReason::low_stars);
    r.stars = 100;
    EXPECT_TRUE(apply_auto_filters(r, 1, cfg).kept);

    r = passing_record();
    r.license = "Proprietary";
    EXPECT_EQ(apply_auto_filters(r, 1, cfg).reason, DropReason::bad_license);
    r.license = "apache-2.0";
    EXPECT_TRUE(apply_auto_filters(r, 1, cfg).kept);

    r = passing_record();
    r.parent_count = 2;
    EXPECT_EQ(apply_auto_filters(r, 1, cfg).reason, DropReason::merge_commit);

    r = passing_record();
    r.content_after = "a = 10\nb = 2\nc = 3\nd = 40\n";
    EXPECT_EQ(apply_auto_filters(r, 1, cfg).reason, DropReason::multi_hunk);
}

TEST(Filters, OrderIsFixed) {
    auto r = passing_record();
    r.parent_count = 2;
    r.stars = 0;
    r.message = "x";
    EXPECT_EQ(apply_auto_filters(r, 3, FilterConfig{}).reason, DropReason::merge_commit);
}

TEST(Filters, ExactlyOneHundredRowsKept) {
    auto r = passing_record();
    r.content_before.clear();
    r.content_after.clear();
    for (int i = 0; i < 100; ++i) r.content_after += "v" + std::to_string(i) + "\n";
    EXPECT_TRUE(apply_auto_filters(r, 1, FilterConfig{}).kept);
    r.content_after += "v100\n";
    EXPECT_EQ(apply_auto_filters(r, 1, FilterConfig{}).reason, DropReason::too_many_rows);
}

TEST(Hunks, Counting) {
    EXPECT_EQ(count_hunks_saturated("a\nb\nc", "a\nb\nc"), 0);
    EXPECT_EQ(count_hunks_saturated("a\nb\nc", "a\nX\nc"), 1);
    EXPECT_EQ(count_hunks_saturated("a\nb\nc\nd\ne", "X\nb\nc\nd\nY"), 2);
    EXPECT_EQ(count_hunks_saturated("", "a\nb"), 1);
    EXPECT_EQ(count_hunks_saturated("a\nb\nc", "a\nb\nc\nd\ne"), 1);
    // A line moved from top to bottom is two hunks.
    EXPECT_EQ(count_hunks_saturated("m\na\nb", "a\nb\nm"), 2);
}

TEST(Messages, Trivial) {
    EXPECT_TRUE(is_trivial_message(""));
    EXPECT_TRUE(is_trivial_message("  fix \n"));
    EXPECT_FALSE(is_trivial_message("fix typo"));
}

TEST(Metadata, Sidecar) {
    TempDir dir;
    fx::write_text(dir / "r.meta", "# x\nstars = 250\nlicense: MIT\nowner = me\n");
    auto m = read_repo_metadata(dir / "r.meta");
    EXPECT_EQ(m.stars, 250u);
    EXPECT_EQ(m.license, "MIT");
}

TEST(Ingest, ThreeLinearCommits) {
    TempDir dir;
    GitRepo repo(dir / "linear");
    repo.write("a.py", "x = 1\n");
    repo.commit("Add module a");
    repo.write("a.py", "x = 2\n");
    repo.commit("Change x to two");
    repo.write("a.py", "x = 3\n");
    repo.commit("Change x to three");
    auto recs = ingest_repo(repo.dir());
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].record.message, "Add module a");
    EXPECT_EQ(recs[0].record.content_before, "");
    EXPECT_EQ(recs[2].record.content_before, "x = 2\n");
    EXPECT_EQ(recs[2].record.content_after, "x = 3\n");
    EXPECT_EQ(recs[1].files_changed, 1u);
    EXPECT_EQ(recs[1].record.parent_count, 1u);
    EXPECT_EQ(recs[1].record.repo_id, "linear");
}

TEST(Ingest, MarkdownOnlyYieldsNothing) {
    TempDir dir;
    GitRepo repo(dir / "docs");
    repo.write("README.md", "# hi\n");
    repo.commit("Add readme file");
    EXPECT_TRUE(ingest_repo(repo.dir()).empty());
}

TEST(Ingest, MergeCommitHasTwoParents) {
    TempDir dir;
    GitRepo repo(dir / "merge");
    repo.write("base.txt", "base\n");
    repo.commit("Initial text file");
    repo.checkout("feature", true);
    repo.write("other.txt", "feature\n");
    repo.commit("Feature text change");
    repo.checkout("main");
    repo.write("notes.txt", "main\n");
    repo.commit("Main text change");
    // The merge itself adds the .py file, so only the merge touches Python.
    repo.merge_without_commit("feature");
    repo.write("app.py", "print('merged')\n");
    repo.commit("Merge feature branch");
    auto recs = ingest_repo(repo.dir());
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].record.parent_count, 2u);
    EXPECT_EQ(recs[0].record.file_path, "app.py");
}

TEST(Ingest, NotARepository) {
    TempDir dir;
    std::filesystem::create_directories(dir / "plain");
    try {
        ingest_repo(dir / "plain");
        FAIL() << "expected io error";
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::io);
    }
}

TEST(Ingest, BinaryContentSkipped) {
    TempDir dir;
    GitRepo repo(dir / "bin");
    repo.write("blob.py", std::string("\x00\x01\x02binary", 9));
    repo.write("ok.py", "x = 1\n");
    repo.commit("Add two modules");
    auto recs = ingest_repo(repo.dir());
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].record.file_path, "ok.py");
    EXPECT_EQ(recs[0].files_changed, 2u);
}

TEST(Ingest, MetadataFromSidecar) {
    TempDir dir;
    GitRepo repo(dir / "meta");
    repo.write_metadata(321, "BSD-3-Clause");
    repo.write("a.py", "x = 1\n");
    repo.commit("Add module a");
    auto recs = ingest_repo(repo.dir());
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].record.stars, 321u);
    EXPECT_EQ(recs[0].record.license, "BSD-3-Clause");
}
