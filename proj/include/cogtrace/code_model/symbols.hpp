#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cogtrace::code {

enum class SymbolKind : std::uint8_t { Class, Method, Field, Identifier, Line };

std::string_view to_string(SymbolKind k);  // lower case
std::optional<SymbolKind> parse_symbol_kind(std::string_view s);

// Zero-based line and display column (tabs expanded).
struct Position {
    int line = 0;
    int column = 0;

    auto operator<=>(const Position&) const = default;
};

// [start, end) in (line, column) order.
struct SymbolSpan {
    std::string symbol_id;
    std::string file;
    SymbolKind kind = SymbolKind::Line;
    Position start;
    Position end;
    std::string name;

    bool contains(Position p) const noexcept { return start <= p && p < end; }
    bool operator==(const SymbolSpan&) const = default;
};

std::string make_symbol_id(std::string_view file, SymbolKind kind, Position start);

struct ParseOptions {
    int tab_width = 4;
};

// Tokenizes Java-like source and recovers Class/Method/Field scopes from
// braces. Never throws; unbalanced input yields whatever structure is
// recoverable plus Line and Identifier spans. Spans are ordered by
// (start, kind).
std::vector<SymbolSpan> parse_source(std::string_view path, std::string_view text,
                                     const ParseOptions& options = {});

// Display width of every line of `text` (tab expanded, UTF-8 aware).
std::vector<int> line_widths(std::string_view text, int tab_width = 4);

}  // namespace cogtrace::code
