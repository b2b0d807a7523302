#include <doctest.h>

#include <algorithm>

#include "../support/generators.hpp"
#include "../support/paths.hpp"
#include "cogtrace/code_model/corpus.hpp"
#include "cogtrace/code_model/geometry.hpp"
#include "cogtrace/code_model/symbols.hpp"
#include "cogtrace/common/error.hpp"

using namespace cogtrace;
using namespace cogtrace::code;

namespace {

std::vector<SymbolSpan> of_kind(const std::vector<SymbolSpan>& spans, SymbolKind k) {
    std::vector<SymbolSpan> out;
    for (const auto& s : spans)
        if (s.kind == k) out.push_back(s);
    return out;
}

}  // namespace

TEST_CASE("empty source has no spans") { CHECK(parse_source("a.java", "").empty()); }

TEST_CASE("one-line class with a method") {
    const std::string src = "class A { void f() { int x; } }";
    const auto spans = parse_source("A.java", src);
    const auto classes = of_kind(spans, SymbolKind::Class);
    const auto methods = of_kind(spans, SymbolKind::Method);
    const auto lines = of_kind(spans, SymbolKind::Line);
    REQUIRE(classes.size() == 1);
    REQUIRE(methods.size() == 1);
    REQUIRE(lines.size() == 1);
    CHECK(classes[0].name == "A");
    CHECK(methods[0].name == "f");
    // Hand-derived positions: "class" starts at 0, the class closes at 31,
    // "void" starts at 10 and the method body closes at 29.
    CHECK(classes[0].start == Position{0, 0});
    CHECK(classes[0].end == Position{0, 31});
    CHECK(methods[0].start == Position{0, 10});
    CHECK(methods[0].end == Position{0, 29});
    CHECK(lines[0].end == Position{0, 31});
    const auto ids = of_kind(spans, SymbolKind::Identifier);
    const auto x = std::find_if(ids.begin(), ids.end(), [](const SymbolSpan& s) { return s.name == "x"; });
    REQUIRE(x != ids.end());
    CHECK(x->start == Position{0, 25});
    CHECK(x->end == Position{0, 26});
    CHECK(x->symbol_id == "A.java:identifier:0:25");
}

TEST_CASE("fields, nested classes and a multi-line method") {
    const std::string src =
        "public class Outer {\n"
        "    private int count = 0;\n"
        "    static class Inner {\n"
        "        String name;\n"
        "    }\n"
        "    int next(int step) {\n"
        "        count += step;\n"
        "        return count;\n"
        "    }\n"
        "}\n";
    const auto spans = parse_source("Outer.java", src);
    const auto classes = of_kind(spans, SymbolKind::Class);
    const auto methods = of_kind(spans, SymbolKind::Method);
    const auto fields = of_kind(spans, SymbolKind::Field);
    REQUIRE(classes.size() == 2);
    CHECK(classes[1].name == "Inner");
    CHECK(classes[1].start.line == 2);
    CHECK(classes[1].end.line == 4);
    REQUIRE(methods.size() == 1);
    CHECK(methods[0].name == "next");
    CHECK(methods[0].start == Position{5, 4});
    CHECK(methods[0].end.line == 8);
    REQUIRE(fields.size() == 2);
    CHECK(fields[0].name == "count");
    CHECK(fields[1].name == "name");
    CHECK(of_kind(spans, SymbolKind::Line).size() == 10);
}

TEST_CASE("unbalanced braces never throw and keep line spans") {
    const std::string src = "class A {\n  void f() {\n    int y;\n";
    std::vector<SymbolSpan> spans;
    CHECK_NOTHROW(spans = parse_source("A.java", src));
    CHECK(of_kind(spans, SymbolKind::Line).size() == 3);
    CHECK_NOTHROW(parse_source("B.java", "}}} class { ( ] \"unterminated"));
}

TEST_CASE("comments and strings do not produce identifiers") {
    const auto spans = parse_source("C.java", "// hidden\nclass C { String s = \"also hidden\"; /* gone */ }\n");
    for (const auto& s : of_kind(spans, SymbolKind::Identifier)) {
        CHECK(s.name != "hidden");
        CHECK(s.name != "gone");
    }
}

TEST_CASE("tabs expand to the tab width") {
    CHECK(line_widths("\tx\n", 4) == std::vector<int>{5});
    CHECK(line_widths("ab\tc", 4) == std::vector<int>{5});
    CHECK(line_widths("a\n\nb", 4) == std::vector<int>{1, 0, 1});
    CHECK(line_widths("caf\xC3\xA9\n", 4) == std::vector<int>{4});
}

TEST_CASE("fixture corpus: 19 files, 1402 lines") {
    const auto corpus = SourceCorpus::load_directory(testpaths::kFixtures / "corpus");
    CHECK(corpus.files().size() == 19);
    CHECK(corpus.total_lines() == 1402);
    std::size_t line_spans = 0, classes = 0;
    for (const auto& f : corpus.files()) {
        line_spans += of_kind(f.spans, SymbolKind::Line).size();
        classes += of_kind(f.spans, SymbolKind::Class).size();
    }
    CHECK(line_spans == 1402);
    CHECK(classes >= 12);
}

TEST_CASE("corpus rejects duplicates and invalid UTF-8") {
    SourceCorpus c;
    c.add_file("a.java", "class A {}\n");
    CHECK_THROWS_AS(c.add_file("a.java", "class B {}\n"), ConfigError);
    CHECK_THROWS_AS(c.add_file("b.java", "class \xff {}\n"), ConfigError);
    CHECK(is_valid_utf8("caf\xC3\xA9"));
    CHECK_FALSE(is_valid_utf8("\xC3"));
}

TEST_CASE("cell_from_point examples") {
    EditorGeometry g;
    g.first_visible_line = 7;
    g.horizontal_scroll = 3;
    CHECK(cell_from_point(g, 0.0, 0.0) == Cell{7, 3});
    EditorGeometry h;
    h.origin_x = 100;
    h.origin_y = 50;
    h.first_visible_line = 10;
    CHECK(cell_from_point(h, 116, 82) == Cell{12, 2});
    CHECK_FALSE(cell_from_point(h, 99, 82));
    CHECK_FALSE(cell_from_point(h, 116, 49));
    CHECK_FALSE(cell_from_point(h, 100 + h.viewport_width + 1, 60));
}

TEST_CASE("geometry validation") {
    EditorGeometry g;
    CHECK_NOTHROW(g.validate());
    g.cell_width = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = {};
    g.first_visible_line = -1;
    CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("property: cell_rect centers map back to their cell") {
    for (int seed = 0; seed < 200; ++seed) {
        testgen::Rng rng(seed);
        EditorGeometry g;
        g.origin_x = rng.uniform(0, 300);
        g.origin_y = rng.uniform(0, 300);
        g.cell_width = rng.uniform(4, 14);
        g.cell_height = rng.uniform(10, 24);
        g.first_visible_line = rng.integer(0, 500);
        g.horizontal_scroll = rng.integer(0, 40);
        const int rows = static_cast<int>(g.viewport_height / g.cell_height);
        const int cols = static_cast<int>(g.viewport_width / g.cell_width);
        const Cell c{g.first_visible_line + rng.integer(0, rows - 1), g.horizontal_scroll + rng.integer(0, cols - 1)};
        const auto r = cell_rect(g, c);
        INFO("seed " << seed);
        CHECK(cell_from_point(g, r.x + r.width / 2, r.y + r.height / 2) == c);
    }
}

TEST_CASE("locate picks the smallest span of the requested kind") {
    SourceCorpus c;
    c.add_file("A.java", "class A { void f() { int x; } }");
    const auto x = c.locate("A.java", 0, 25, SymbolKind::Identifier);
    REQUIRE(x);
    CHECK(x->name == "x");
    const auto line = c.locate("A.java", 0, 25, SymbolKind::Line);
    REQUIRE(line);
    CHECK(line->kind == SymbolKind::Line);
    CHECK(c.locate("A.java", 0, 12, SymbolKind::Method)->name == "f");
    CHECK_FALSE(c.locate("A.java", 0, 40, SymbolKind::Identifier));
    CHECK(c.locate("A.java", 0, 40, SymbolKind::Line));  // rows extend past the text
    CHECK_FALSE(c.locate("A.java", 3, 0, SymbolKind::Line));
    CHECK_THROWS_AS(c.locate("B.java", 0, 0, SymbolKind::Line), Error);
    CHECK(c.find_symbol(x->symbol_id)->name == "x");
    CHECK(c.find_symbol("A.java:line:9:0") == nullptr);
}

TEST_CASE("symbol kinds and ids") {
    CHECK(to_string(SymbolKind::Method) == "method");
    CHECK(parse_symbol_kind("line") == SymbolKind::Line);
    CHECK_FALSE(parse_symbol_kind("package"));
    CHECK(make_symbol_id("a/B.java", SymbolKind::Class, {3, 4}) == "a/B.java:class:3:4");
}
