#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "llnlab/csv.hpp"
#include "llnlab/errors.hpp"
#include "llnlab/svg.hpp"

using namespace llnlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("csv_svg") {

TEST_CASE("csv escaping quotes only when needed") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("") == "");
    CHECK(csv_escape("1.5") == "1.5");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
    CHECK(csv_escape("line\rbreak") == "\"line\rbreak\"");
    CHECK(csv_escape("spaces stay bare") == "spaces stay bare");
}

TEST_CASE("curves render with CRLF rows") {
    Curve c;
    c.name = "demo";
    c.columns = {"n", "value"};
    c.rows = {{"1", "0.5"}, {"2", "0.25"}};
    std::string text = curve_to_csv(c);
    CHECK(text == "n,value\r\n1,0.5\r\n2,0.25\r\n");

    Curve header_only;
    header_only.name = "empty";
    header_only.columns = {"a", "b,c"};
    CHECK(curve_to_csv(header_only) == "a,\"b,c\"\r\n");
}

TEST_CASE("atomic writes land complete and replace prior content") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "llnlab_csv_test";
    fs::create_directories(dir);
    fs::path target = dir / "out.txt";

    write_text_atomic(target, "first");
    CHECK(slurp(target) == "first");
    write_text_atomic(target, "second version");
    CHECK(slurp(target) == "second version");

    // No temp files left behind.
    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(dir)) { (void)e; ++entries; }
    CHECK(entries == 1);

    CHECK_THROWS_AS(write_text_atomic(dir / "missing" / "out.txt", "x"), IoError);
    fs::remove_all(dir);
}

TEST_CASE("svg output is a pure function of the data") {
    SvgSeries s;
    s.label = "err";
    s.xs = {1.0, 10.0, 100.0};
    s.ys = {0.5, 0.1, 0.02};
    std::string a = render_line_plot("decay", "n", "err", {s}, true, true);
    std::string b = render_line_plot("decay", "n", "err", {s}, true, true);
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("</svg>") != std::string::npos);
    CHECK(a.find("decay") != std::string::npos);

    std::string other = render_line_plot("decay", "n", "err", {s}, false, false);
    CHECK(a != other);
}

TEST_CASE("log axes drop nonpositive points instead of failing") {
    SvgSeries s;
    s.label = "vals";
    s.xs = {0.0, 1.0, 10.0};
    s.ys = {-1.0, 0.5, 0.05};
    // (0, -1) cannot appear on a log-log plot; the rest must survive.
    std::string svg = render_line_plot("t", "x", "y", {s}, true, true);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);

    SvgSeries all_dead;
    all_dead.label = "none";
    all_dead.xs = {-1.0, 0.0};
    all_dead.ys = {1.0, 2.0};
    std::string empty_plot = render_line_plot("t", "x", "y", {all_dead}, true, false);
    CHECK(empty_plot.find("<svg") != std::string::npos);
}

TEST_CASE("svg escapes markup in labels") {
    SvgSeries s;
    s.label = "a<b>&amp";
    s.xs = {1.0, 2.0};
    s.ys = {1.0, 2.0};
    std::string svg = render_line_plot("x<y & \"z\"", "t<u", "v&w", {s}, false, false);
    CHECK(svg.find("x<y") == std::string::npos);
    CHECK(svg.find("&lt;") != std::string::npos);
    CHECK(svg.find("&amp;") != std::string::npos);
}

} // TEST_SUITE
