#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "musica/report.hpp"

using musica::ReportRow;

namespace {

ReportRow row(const std::string& image, const std::string& method, double base) {
    ReportRow r;
    r.image = image;
    r.method = method;
    r.mean = base;
    r.stddev = 0.1 * base;
    r.median = base * 0.95;
    r.q1 = base * 0.8;
    r.q3 = base * 1.2;
    r.min = base * 0.5;
    r.max = base * 2.0;
    r.noise_level = 0.003;
    r.improvement_pct = 12.5;
    r.elapsed_ms = 0.0;
    return r;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

} // namespace

TEST_CASE("csv header names the twelve report columns", "[report]") {
    REQUIRE(musica::csv_header()
            == "image,method,mean,std,median,q1,q3,min,max,noise_level,improvement_pct,elapsed_ms");
}

TEST_CASE("csv rows are formatted to six significant digits", "[report]") {
    ReportRow r;
    r.image = "chest_01.png";
    r.method = "multistage";
    r.mean = 0.123456789;
    r.stddev = 1234567.0;
    r.median = 1.5;
    r.q1 = 0.0;
    r.q3 = 2.0 / 3.0;
    r.min = 1e-12;
    r.max = 100.0;
    r.noise_level = 0.0031459;
    r.improvement_pct = -7.85;
    r.elapsed_ms = 0.0;
    REQUIRE(musica::format_csv_row(r)
            == "chest_01.png,multistage,0.123457,1.23457e+06,1.5,0,0.666667,1e-12,100,"
               "0.0031459,-7.85,0");
}

TEST_CASE("csv fields with separators are quoted", "[report]") {
    ReportRow r = row("odd,name \"x\"", "original", 1.0);
    const std::string line = musica::format_csv_row(r);
    REQUIRE(line.substr(0, 22) == "\"odd,name \"\"x\"\"\",origi");
}

TEST_CASE("csv documents come out sorted and newline-terminated", "[report]") {
    const std::vector<ReportRow> rows{
        row("b.png", "original", 1.0),
        row("a.png", "multistage", 3.0),
        row("b.png", "conventional", 2.0),
        row("a.png", "conventional", 2.5),
    };
    const std::string csv = musica::render_csv(rows);

    REQUIRE(csv.back() == '\n');
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t nl = csv.find('\n'); nl != std::string::npos; nl = csv.find('\n', start)) {
        lines.push_back(csv.substr(start, nl - start));
        start = nl + 1;
    }
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == musica::csv_header());
    CHECK(lines[1].substr(0, 19) == "a.png,conventional,");
    CHECK(lines[2].substr(0, 17) == "a.png,multistage,");
    CHECK(lines[3].substr(0, 19) == "b.png,conventional,");
    CHECK(lines[4].substr(0, 15) == "b.png,original,");
}

TEST_CASE("box plot draws one box per image and method", "[report]") {
    const std::vector<ReportRow> rows{
        row("a.png", "original", 1.0),
        row("a.png", "conventional", 2.0),
        row("a.png", "multistage", 3.0),
        row("b.png", "original", 1.1),
        row("b.png", "conventional", 1.9),
        row("b.png", "multistage", 3.2),
    };
    const std::string svg = musica::render_boxplot_svg(rows);

    CHECK(svg.substr(0, 4) == "<svg");
    CHECK(svg.find("</svg>") != std::string::npos);
    // One filled quartile box per row, plus three legend swatches and the
    // background rectangle.
    CHECK(count_of(svg, "<rect") == rows.size() + 3 + 1);
    CHECK(count_of(svg, "a.png") == 1);
    CHECK(count_of(svg, "b.png") == 1);
    CHECK(svg.find("original") != std::string::npos);
    CHECK(svg.find("conventional") != std::string::npos);
    CHECK(svg.find("multistage") != std::string::npos);
}

TEST_CASE("box plot output is deterministic and order-insensitive", "[report]") {
    const std::vector<ReportRow> in_order{
        row("a.png", "conventional", 2.0),
        row("a.png", "multistage", 3.0),
        row("b.png", "conventional", 1.9),
    };
    std::vector<ReportRow> shuffled{in_order[2], in_order[0], in_order[1]};
    REQUIRE(musica::render_boxplot_svg(in_order) == musica::render_boxplot_svg(shuffled));
    REQUIRE(musica::render_boxplot_svg(in_order) == musica::render_boxplot_svg(in_order));
}

TEST_CASE("box plot copes with edge-case inputs", "[report]") {
    SECTION("rows with unknown methods are left out of the chart") {
        const std::vector<ReportRow> rows{
            row("a.png", "conventional", 2.0),
            row("a.png", "degenerate", 0.0),
        };
        const std::string svg = musica::render_boxplot_svg(rows);
        CHECK(count_of(svg, "<rect") == 1 + 3 + 1);
    }
    SECTION("no rows still renders a valid document") {
        const std::string svg = musica::render_boxplot_svg({});
        CHECK(svg.substr(0, 4) == "<svg");
        CHECK(svg.find("</svg>") != std::string::npos);
    }
    SECTION("identical min and max do not divide by zero") {
        ReportRow r = row("a.png", "original", 1.0);
        r.min = r.max = r.q1 = r.q3 = r.median = 1.0;
        const std::string svg = musica::render_boxplot_svg({r});
        CHECK(svg.find("nan") == std::string::npos);
        CHECK(svg.find("inf") == std::string::npos);
    }
    SECTION("names with markup characters are escaped") {
        const std::vector<ReportRow> rows{row("a<b>&c.png", "original", 1.0)};
        const std::string svg = musica::render_boxplot_svg(rows);
        CHECK(svg.find("a&lt;b&gt;&amp;c.png") != std::string::npos);
        CHECK(svg.find("a<b>") == std::string::npos);
    }
}
