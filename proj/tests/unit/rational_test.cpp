#include <gtest/gtest.h>

#include <vector>

#include "pmab/rational.hpp"

using pmab::Rational;

TEST(Rational, ReducesAndNormalisesSign) {
    const Rational r{6, -8};
    EXPECT_EQ(r.num(), -3);
    EXPECT_EQ(r.den(), 4);
    EXPECT_EQ(Rational(2, 4), Rational(1, 2));
    EXPECT_EQ(Rational(0, 5), Rational(0, 1));
    EXPECT_EQ(Rational(3, 9).str(), "1/3");
}

TEST(Rational, ZeroDenominatorThrows) { EXPECT_THROW(Rational(1, 0), std::invalid_argument); }

TEST(Rational, OrderingIsExact) {
    EXPECT_LT(Rational(1, 3), Rational(1, 2));
    EXPECT_GT(Rational(2, 3), Rational(3, 5));
    // values that collide as doubles near 2^62 still order correctly
    const std::int64_t big = std::int64_t{1} << 61;
    EXPECT_LT(Rational(big - 1, big), Rational(big, big + 1));
}

TEST(Rational, DistanceComparison) {
    // |1/4 - 1/3| = 1/12 < |1/2 - 1/3| = 1/6
    EXPECT_LT(pmab::compare_distance({1, 4}, {1, 3}, {1, 2}, {1, 3}), 0);
    EXPECT_EQ(pmab::compare_distance({1, 4}, {1, 2}, {3, 4}, {1, 2}), 0);
    EXPECT_GT(pmab::compare_distance({0, 1}, {1, 2}, {1, 3}, {1, 2}), 0);
}

TEST(Rational, OpenIntervalExcludesEndpoints) {
    const Rational width{8, 50};
    EXPECT_TRUE(pmab::within_open({1, 2}, {1, 2}, width));
    // exactly on the boundary: |34/100 - 1/2| = 16/100 = 8/50 -> excluded from the open interval
    EXPECT_FALSE(pmab::within_open({34, 100}, {1, 2}, width));
    EXPECT_TRUE(pmab::within_open({35, 100}, {1, 2}, width));
}

TEST(Rational, LcmOfDenominators) {
    const std::vector<Rational> v{{1, 2}, {1, 4}};
    EXPECT_EQ(pmab::lcm_of_denominators(v), 4);
    const std::vector<Rational> w{{1, 3}, {2, 5}, {1, 2}};
    EXPECT_EQ(pmab::lcm_of_denominators(w), 30);
    EXPECT_EQ(pmab::lcm_of_denominators(std::vector<Rational>{}), 1);
}

TEST(Rational, LcmRejectsValuesOutsideUnitInterval) {
    EXPECT_THROW(pmab::lcm_of_denominators(std::vector<Rational>{{0, 1}}), std::invalid_argument);
    EXPECT_THROW(pmab::lcm_of_denominators(std::vector<Rational>{{3, 2}}), std::invalid_argument);
}

TEST(Rational, LcmOverflowIsReported) {
    EXPECT_THROW(pmab::lcm_checked(std::int64_t{1} << 40, (std::int64_t{1} << 40) - 1), std::overflow_error);
    EXPECT_EQ(pmab::lcm_checked(4, 6), 12);
}
