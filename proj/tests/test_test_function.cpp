#include <doctest.h>

#include <stdexcept>

#include "llnlab/test_function.hpp"

using namespace llnlab;

TEST_SUITE("test_function") {

TEST_CASE("knots need at least two entries with strictly increasing x") {
    CHECK_THROWS_AS(TestFunction({}), std::invalid_argument);
    CHECK_THROWS_AS(TestFunction({{0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(TestFunction({{0.0, 1.0}, {0.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(TestFunction({{1.0, 0.0}, {0.0, 0.0}}), std::invalid_argument);
    CHECK_NOTHROW(TestFunction({{0.0, 1.0}, {1.0, 1.0}}));
}

TEST_CASE("interpolation is linear between knots and constant outside") {
    TestFunction f({{0.0, 0.0}, {1.0, 2.0}, {3.0, 0.0}});
    CHECK(f(0.0) == 0.0);
    CHECK(f(0.5) == doctest::Approx(1.0));
    CHECK(f(1.0) == 2.0);
    CHECK(f(2.0) == doctest::Approx(1.0));
    CHECK(f(-5.0) == 0.0); // clamps to the boundary value
    CHECK(f(9.0) == 0.0);
}

TEST_CASE("lipschitz constant is the steepest segment") {
    TestFunction f({{0.0, 0.0}, {1.0, 2.0}, {3.0, 0.0}});
    CHECK(f.lip() == doctest::Approx(2.0));
    TestFunction flat({{0.0, 1.0}, {5.0, 1.0}});
    CHECK(flat.lip() == 0.0);
}

TEST_CASE("negation flips values on the same grid") {
    TestFunction f({{0.0, 1.0}, {2.0, -3.0}});
    TestFunction g = f.negated();
    CHECK(g(0.0) == -1.0);
    CHECK(g(2.0) == 3.0);
    CHECK(g.lip() == f.lip());
}

TEST_CASE("identity builtin") {
    TestFunction f = TestFunction::identity(-1.0, 2.0);
    CHECK(f(-1.0) == -1.0);
    CHECK(f(0.5) == doctest::Approx(0.5));
    CHECK(f(2.0) == 2.0);
    CHECK(f.lip() == doctest::Approx(1.0));
}

TEST_CASE("abs_dev builtin measures distance from the center") {
    TestFunction f = TestFunction::abs_dev(0.5, 0.0, 1.0);
    CHECK(f(0.5) == 0.0);
    CHECK(f(0.0) == doctest::Approx(0.5));
    CHECK(f(1.0) == doctest::Approx(0.5));
    CHECK(f(0.75) == doctest::Approx(0.25));
}

TEST_CASE("tent peaks with height limited by the shorter side") {
    TestFunction f = TestFunction::tent(0.0, 0.5, 1.0);
    CHECK(f(0.5) == doctest::Approx(0.5));
    CHECK(f(0.0) == 0.0);
    CHECK(f(1.0) == 0.0);
    CHECK(f(0.25) == doctest::Approx(0.25));
    CHECK(f.lip() == doctest::Approx(1.0));

    TestFunction skew = TestFunction::tent(0.0, 0.2, 1.0);
    CHECK(skew(0.2) == doctest::Approx(0.2)); // height min(0.2, 0.8)
    CHECK(skew.lip() <= 1.0 + 1e-12);
    CHECK_THROWS_AS(TestFunction::tent(0.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("smoothed indicator is a trapezoid") {
    TestFunction f = TestFunction::indicator_smoothed(0.2, 0.8, 0.1);
    CHECK(f(0.5) == 1.0);
    CHECK(f(0.2) == 1.0);
    CHECK(f(0.8) == 1.0);
    CHECK(f(0.1) == doctest::Approx(0.0));
    CHECK(f(0.15) == doctest::Approx(0.5));
    CHECK(f(0.9) == doctest::Approx(0.0));
    CHECK(f(0.0) == 0.0);
    CHECK_THROWS_AS(TestFunction::indicator_smoothed(0.2, 0.8, 0.0), std::invalid_argument);
}

TEST_CASE("positive and negative part hinges") {
    TestFunction pos = TestFunction::pos_part_above(0.5, 0.0, 1.0);
    CHECK(pos(0.4) == 0.0);
    CHECK(pos(0.75) == doctest::Approx(0.25));
    TestFunction neg = TestFunction::neg_part_below(0.5, 0.0, 1.0);
    CHECK(neg(0.6) == 0.0);
    CHECK(neg(0.25) == doctest::Approx(0.25));
}

} // TEST_SUITE
