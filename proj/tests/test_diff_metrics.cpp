#include <gtest/gtest.h>

#include <random>

#include "editforge/diff_metrics.hpp"
#include "editforge/error.hpp"
#include "support.hpp"

using namespace editforge;
namespace fx = editforge::testing;

TEST(LineDiff, HandExample) {
    auto d = line_diff("a=1\nb=2\nc=3", "a=1\nb=20\nc=3");
    EXPECT_EQ(d.n_diff, 2u);
    EXPECT_EQ(d.union_size, 4u);
    EXPECT_DOUBLE_EQ(d.r_diff, 0.5);
    EXPECT_EQ(d.bin, 3);
}

TEST(LineDiff, IdenticalIsZero) {
    auto d = line_diff("x = 1\ny = 2\n", "x = 1\ny = 2\n");
    EXPECT_EQ(d.n_diff, 0u);
    EXPECT_EQ(d.r_diff, 0.0);
    EXPECT_EQ(d.bin, 1);
}

TEST(LineDiff, EmptyInput) {
    auto d = line_diff("", "one\ntwo\nthree\nfour");
    EXPECT_EQ(d.n_diff, 4u);
    EXPECT_DOUBLE_EQ(d.r_diff, 1.0);
    EXPECT_EQ(d.bin, 5);
}

TEST(LineDiff, BothEmpty) {
    auto d = line_diff("", "");
    EXPECT_EQ(d.n_diff, 0u);
    EXPECT_EQ(d.union_size, 0u);
    EXPECT_EQ(d.r_diff, 0.0);
}

TEST(LineDiff, RepeatedLinesCountOnce) {
    auto d = line_diff("x\nx\nx", "x\ny");
    EXPECT_EQ(d.n_diff, 1u);
    EXPECT_EQ(d.union_size, 2u);
}

TEST(LineDiff, SymmetricAndMatchesOracle) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        auto a = fx::random_code(rng, 1 + rng() % 12);
        auto b = fx::random_code(rng, 1 + rng() % 12);
        auto d1 = line_diff(a, b);
        auto d2 = line_diff(b, a);
        EXPECT_EQ(d1, d2);
        auto o = fx::oracle_line_diff(a, b);
        EXPECT_EQ(d1.n_diff, o.n_diff);
        EXPECT_EQ(d1.r_diff, o.r_diff);
        EXPECT_EQ(d1.bin, o.bin);
    }
}

TEST(EditRatioBin, Boundaries) {
    EXPECT_EQ(edit_ratio_bin(0.0), 1);
    EXPECT_EQ(edit_ratio_bin(0.52), 3);
    EXPECT_EQ(edit_ratio_bin(1.0), 5);
    EXPECT_EQ(edit_ratio_bin(0.2), 2);
    EXPECT_EQ(edit_ratio_bin(0.1999), 1);
    EXPECT_EQ(edit_ratio_bin(0.8), 5);
}

TEST(EditRatioBin, OutOfRangeIsContractViolation) {
    EXPECT_THROW(edit_ratio_bin(-0.01), ContractViolation);
    EXPECT_THROW(edit_ratio_bin(1.01), ContractViolation);
    EXPECT_THROW(edit_ratio_bin(std::nan("")), ContractViolation);
}
