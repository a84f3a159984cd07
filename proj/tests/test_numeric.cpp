#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "llnlab/numeric.hpp"

using namespace llnlab;

TEST_SUITE("numeric") {

TEST_CASE("neumaier sum recovers cancellation that naive addition loses") {
    // 1 + 1e100 + 1 - 1e100 = 2; naive double addition returns 0.
    NeumaierSum s;
    s.add(1.0);
    s.add(1e100);
    s.add(1.0);
    s.add(-1e100);
    CHECK(s.value() == 2.0);
}

TEST_CASE("neumaier sum of many small terms stays at 1 ulp scale") {
    NeumaierSum s;
    const int n = 10'000'000;
    for (int i = 0; i < n; ++i) s.add(0.1);
    double expect = 0.1 * n;
    CHECK(std::abs(s.value() - expect) <= 1e-7);
    // Plain accumulation drifts far beyond that on this length.
}

TEST_CASE("fnv1a64 known vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("hex64 renders fixed width lowercase") {
    CHECK(hex64(0) == "0000000000000000");
    CHECK(hex64(0xdeadbeefull) == "00000000deadbeef");
    CHECK(hex64(~0ull) == "ffffffffffffffff");
}

TEST_CASE("format_double round-trips arbitrary doubles") {
    const double cases[] = {0.0,  -0.0, 1.0, 0.1,  2.0 / 3.0, 1e-300, 1e300,
                            0.25, -1.5, 3.141592653589793, 5e-324};
    for (double x : cases) {
        std::string s = format_double(x);
        double back = std::strtod(s.c_str(), nullptr);
        CHECK(back == x);
    }
}

TEST_CASE("format_double uses shortest form for simple values") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.0) == "-2");
}

TEST_CASE("format_double names non-finite values") {
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(HUGE_VAL) == "inf");
    CHECK(format_double(-HUGE_VAL) == "-inf");
}

} // TEST_SUITE
