#include "cogtrace/code_model/symbols.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <unordered_set>

namespace cogtrace::code {

std::string_view to_string(SymbolKind k) {
    switch (k) {
        case SymbolKind::Class: return "class";
        case SymbolKind::Method: return "method";
        case SymbolKind::Field: return "field";
        case SymbolKind::Identifier: return "identifier";
        case SymbolKind::Line: return "line";
    }
    return "line";
}

std::optional<SymbolKind> parse_symbol_kind(std::string_view s) {
    std::string lower(s);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto k : {SymbolKind::Class, SymbolKind::Method, SymbolKind::Field, SymbolKind::Identifier,
                   SymbolKind::Line})
        if (to_string(k) == lower) return k;
    return std::nullopt;
}

std::string make_symbol_id(std::string_view file, SymbolKind kind, Position start) {
    return std::string(file) + ":" + std::string(to_string(kind)) + ":" + std::to_string(start.line) +
           ":" + std::to_string(start.column);
}

namespace {

enum class Tok { Ident, Keyword, Number, String, Char, Punct };

struct Token {
    Tok type;
    std::string_view text;
    Position start;
    Position end;
};

const std::unordered_set<std::string_view>& keywords() {
    static const std::unordered_set<std::string_view> k{
        "abstract", "assert",     "boolean",   "break",     "byte",      "case",     "catch",
        "char",     "class",      "const",     "continue",  "default",   "do",       "double",
        "else",     "enum",       "extends",   "final",     "finally",   "float",    "for",
        "goto",     "if",         "implements", "import",   "instanceof", "int",     "interface",
        "long",     "native",     "new",       "package",   "private",   "protected", "public",
        "return",   "short",      "static",    "strictfp",  "super",     "switch",   "synchronized",
        "this",     "throw",      "throws",    "transient", "try",       "void",     "volatile",
        "while",    "true",       "false",     "null"};
    return k;
}

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_part(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

class Lexer {
public:
    Lexer(std::string_view src, int tab) : src_(src), tab_(tab > 0 ? tab : 4) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (i_ < src_.size()) {
            const unsigned char c = src_[i_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f') {
                step();
            } else if (c == '/' && peek(1) == '/') {
                while (i_ < src_.size() && src_[i_] != '\n') step();
            } else if (c == '/' && peek(1) == '*') {
                step();
                step();
                while (i_ < src_.size() && !(src_[i_] == '*' && peek(1) == '/')) step();
                if (i_ < src_.size()) {
                    step();
                    step();
                }
            } else if (c == '"' && peek(1) == '"' && peek(2) == '"') {
                out.push_back(lex_text_block());
            } else if (c == '"' || c == '\'') {
                out.push_back(lex_quoted(static_cast<char>(c)));
            } else if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
                out.push_back(lex_number());
            } else if (ident_start(c)) {
                const auto b = i_;
                const auto start = pos();
                while (i_ < src_.size() && ident_part(static_cast<unsigned char>(src_[i_]))) step();
                auto text = src_.substr(b, i_ - b);
                out.push_back({keywords().count(text) ? Tok::Keyword : Tok::Ident, text, start, pos()});
            } else {
                const auto b = i_;
                const auto start = pos();
                step();
                out.push_back({Tok::Punct, src_.substr(b, i_ - b), start, pos()});
            }
        }
        return out;
    }

private:
    char peek(std::size_t k) const { return i_ + k < src_.size() ? src_[i_ + k] : '\0'; }
    Position pos() const { return {line_, col_}; }

    void step() {
        const unsigned char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 0;
        } else if (c == '\t') {
            col_ = (col_ / tab_ + 1) * tab_;
        } else if ((c & 0xC0) != 0x80) {
            ++col_;
        }
    }

    Token lex_text_block() {
        const auto b = i_;
        const auto start = pos();
        step();
        step();
        step();
        while (i_ < src_.size()) {
            if (src_[i_] == '\\') {
                step();
                if (i_ < src_.size()) step();
                continue;
            }
            if (src_[i_] == '"' && peek(1) == '"' && peek(2) == '"') {
                step();
                step();
                step();
                break;
            }
            step();
        }
        return {Tok::String, src_.substr(b, i_ - b), start, pos()};
    }

    Token lex_quoted(char q) {
        const auto b = i_;
        const auto start = pos();
        step();
        while (i_ < src_.size() && src_[i_] != '\n') {
            if (src_[i_] == '\\') {
                step();
                if (i_ < src_.size() && src_[i_] != '\n') step();
                continue;
            }
            if (src_[i_] == q) {
                step();
                break;
            }
            step();
        }
        return {q == '"' ? Tok::String : Tok::Char, src_.substr(b, i_ - b), start, pos()};
    }

    Token lex_number() {
        const auto b = i_;
        const auto start = pos();
        while (i_ < src_.size()) {
            const unsigned char c = src_[i_];
            if (std::isalnum(c) || c == '_' || c == '.') {
                step();
            } else if ((c == '+' || c == '-') && i_ > b &&
                       (src_[i_ - 1] == 'e' || src_[i_ - 1] == 'E' || src_[i_ - 1] == 'p' ||
                        src_[i_ - 1] == 'P') &&
                       !(src_[b] == '0' && i_ > b + 1 && (src_[b + 1] == 'x' || src_[b + 1] == 'X') &&
                         (src_[i_ - 1] == 'e' || src_[i_ - 1] == 'E'))) {
                step();
            } else {
                break;
            }
        }
        return {Tok::Number, src_.substr(b, i_ - b), start, pos()};
    }

    std::string_view src_;
    int tab_;
    std::size_t i_ = 0;
    int line_ = 0;
    int col_ = 0;
};

bool is_punct(const Token& t, char c) { return t.type == Tok::Punct && t.text.size() == 1 && t.text[0] == c; }
bool is_kw(const Token& t, std::string_view k) { return t.type == Tok::Keyword && t.text == k; }

// Recovers Class/Method/Field spans from a token stream by tracking braces.
class ScopeTracker {
public:
    ScopeTracker(const std::vector<Token>& toks, std::string_view path) : toks_(toks), path_(path) {
        scopes_.push_back({ScopeKind::File, {}, {}, {}, false, false, {}});
    }

    std::vector<SymbolSpan> run() {
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            const auto& t = toks_[i];
            if (is_punct(t, '@') && i + 1 < toks_.size() && toks_[i + 1].type == Tok::Ident) {
                note_start(i);
                i = skip_annotation(i) - 1;
                continue;
            }
            if (is_punct(t, '{')) {
                open_brace(i);
            } else if (is_punct(t, '}')) {
                close_brace(i);
            } else if (is_punct(t, ';')) {
                end_statement(i);
            } else {
                note_start(i);
                stmt_.push_back(i);
                track_class_keyword(i);
            }
        }
        // Unclosed scopes run to the end of the text.
        while (scopes_.size() > 1) {
            auto s = scopes_.back();
            scopes_.pop_back();
            if (!toks_.empty()) emit_scope(s, toks_.back().end);
        }
        return std::move(spans_);
    }

private:
    enum class ScopeKind { File, Class, AnonClass, Method, Block };
    struct Scope {
        ScopeKind kind;
        std::string name;
        Position start;
        std::vector<std::size_t> saved_stmt;
        bool restore;
        bool enum_constants;  // still inside an enum's constant list
        std::optional<std::size_t> saved_start;
    };

    bool class_body() const {
        const auto k = scopes_.back().kind;
        return k == ScopeKind::Class || k == ScopeKind::AnonClass;
    }

    void note_start(std::size_t i) {
        if (!stmt_start_) stmt_start_ = i;
    }

    void reset_statement() {
        stmt_.clear();
        stmt_start_.reset();
        pending_class_.clear();
        expect_class_name_ = false;
        pending_enum_ = false;
    }

    std::size_t skip_annotation(std::size_t i) {
        ++i;  // '@'
        while (i < toks_.size() && toks_[i].type == Tok::Ident) {
            ++i;
            if (i + 1 < toks_.size() && is_punct(toks_[i], '.') && toks_[i + 1].type == Tok::Ident)
                ++i;
            else
                break;
        }
        if (i < toks_.size() && is_punct(toks_[i], '(')) {
            int depth = 0;
            for (; i < toks_.size(); ++i) {
                if (is_punct(toks_[i], '(')) ++depth;
                if (is_punct(toks_[i], ')') && --depth == 0) return i + 1;
            }
        }
        return i;
    }

    void track_class_keyword(std::size_t i) {
        const auto& t = toks_[i];
        const bool after_dot = i > 0 && is_punct(toks_[i - 1], '.');
        if (!after_dot && (is_kw(t, "class") || is_kw(t, "interface") || is_kw(t, "enum"))) {
            expect_class_name_ = true;
            pending_enum_ = is_kw(t, "enum");
            return;
        }
        if (t.type == Tok::Ident && t.text == "record" && !after_dot && i + 2 < toks_.size() &&
            toks_[i + 1].type == Tok::Ident &&
            (is_punct(toks_[i + 2], '(') || is_punct(toks_[i + 2], '<'))) {
            expect_class_name_ = true;
            return;
        }
        if (expect_class_name_ && t.type == Tok::Ident && pending_class_.empty()) {
            pending_class_ = std::string(t.text);
            expect_class_name_ = false;
        }
    }

    // Name of the method this statement declares, if it looks like a header.
    std::optional<std::string> method_name() const {
        int depth = 0;
        for (std::size_t k = 0; k < stmt_.size(); ++k) {
            const auto& t = toks_[stmt_[k]];
            if (is_kw(t, "new")) return std::nullopt;
            if (depth == 0 && is_punct(t, '=')) return std::nullopt;
            if (is_punct(t, '(')) {
                if (depth == 0) {
                    if (k == 0) return std::nullopt;
                    const auto& prev = toks_[stmt_[k - 1]];
                    if (prev.type != Tok::Ident) return std::nullopt;
                    return std::string(prev.text);
                }
                ++depth;
            } else if (is_punct(t, ')')) {
                --depth;
            }
        }
        return std::nullopt;
    }

    std::optional<std::string> field_name() const {
        int paren = 0, angle = 0;
        const Token* last_ident = nullptr;
        for (auto k : stmt_) {
            const auto& t = toks_[k];
            if (is_punct(t, '(')) ++paren;
            else if (is_punct(t, ')')) --paren;
            else if (is_punct(t, '<')) ++angle;
            else if (is_punct(t, '>')) angle = std::max(0, angle - 1);
            else if (paren == 0 && angle == 0 && (is_punct(t, '=') || is_punct(t, ','))) break;
            else if (t.type == Tok::Ident) last_ident = &t;
        }
        if (!last_ident) return std::nullopt;
        return std::string(last_ident->text);
    }

    bool has_top_level_assign() const {
        int depth = 0;
        for (auto k : stmt_) {
            const auto& t = toks_[k];
            if (is_punct(t, '(')) ++depth;
            else if (is_punct(t, ')')) --depth;
            else if (depth == 0 && is_punct(t, '=')) return true;
        }
        return false;
    }

    bool has_new() const {
        return std::any_of(stmt_.begin(), stmt_.end(), [&](auto k) { return is_kw(toks_[k], "new"); });
    }

    Position statement_start(std::size_t fallback) const {
        return toks_[stmt_start_ ? *stmt_start_ : fallback].start;
    }

    void open_brace(std::size_t i) {
        Scope s{ScopeKind::Block, {}, statement_start(i), {}, false, false, {}};
        const bool in_class = class_body();
        const bool enum_list = scopes_.back().enum_constants;
        if (!pending_class_.empty()) {
            s.kind = ScopeKind::Class;
            s.name = pending_class_;
            s.enum_constants = pending_enum_;
        } else if (in_class && !enum_list && method_name()) {
            s.kind = ScopeKind::Method;
            s.name = *method_name();
        } else if (has_new() && !stmt_.empty() && is_punct(toks_[stmt_.back()], ')')) {
            s.kind = ScopeKind::AnonClass;
        }
        if ((s.kind == ScopeKind::Block || s.kind == ScopeKind::AnonClass) &&
            ((in_class && has_top_level_assign()) || enum_list || !class_body_or_file())) {
            // Initializer, enum constant body or nested block: the enclosing
            // statement continues after the closing brace.
            s.restore = true;
            s.saved_stmt = stmt_;
            s.saved_start = stmt_start_;
        }
        scopes_.push_back(std::move(s));
        reset_statement();
    }

    bool class_body_or_file() const {
        const auto k = scopes_.back().kind;
        return k == ScopeKind::Class || k == ScopeKind::AnonClass || k == ScopeKind::File;
    }

    void close_brace(std::size_t i) {
        if (scopes_.size() <= 1) {
            reset_statement();
            return;
        }
        auto s = std::move(scopes_.back());
        scopes_.pop_back();
        emit_scope(s, toks_[i].end);
        reset_statement();
        if (s.restore) {
            stmt_ = std::move(s.saved_stmt);
            stmt_start_ = s.saved_start;
        }
    }

    void end_statement(std::size_t i) {
        auto& scope = scopes_.back();
        if (scope.enum_constants) {
            scope.enum_constants = false;
        } else if (class_body() && !stmt_.empty()) {
            const Position start = statement_start(i);
            if (auto m = method_name()) {
                add(SymbolKind::Method, start, toks_[i].end, *m);
            } else if (auto f = field_name()) {
                add(SymbolKind::Field, start, toks_[i].end, *f);
            }
        }
        reset_statement();
    }

    void emit_scope(const Scope& s, Position end) {
        if (s.kind == ScopeKind::Class) add(SymbolKind::Class, s.start, end, s.name);
        if (s.kind == ScopeKind::Method) add(SymbolKind::Method, s.start, end, s.name);
    }

    void add(SymbolKind kind, Position start, Position end, std::string name) {
        spans_.push_back({make_symbol_id(path_, kind, start), std::string(path_), kind, start, end,
                          std::move(name)});
    }

    const std::vector<Token>& toks_;
    std::string_view path_;
    std::vector<Scope> scopes_;
    std::vector<std::size_t> stmt_;
    std::optional<std::size_t> stmt_start_;
    std::string pending_class_;
    bool expect_class_name_ = false;
    bool pending_enum_ = false;
    std::vector<SymbolSpan> spans_;
};

}  // namespace

std::vector<int> line_widths(std::string_view text, int tab_width) {
    std::vector<int> widths;
    if (text.empty()) return widths;
    const int tab = tab_width > 0 ? tab_width : 4;
    int col = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = text[i];
        if (c == '\n') {
            widths.push_back(col);
            col = 0;
        } else if (c == '\t') {
            col = (col / tab + 1) * tab;
        } else if (c == '\r' && (i + 1 == text.size() || text[i + 1] == '\n')) {
            // CRLF line ending
        } else if ((c & 0xC0) != 0x80) {
            ++col;
        }
    }
    if (text.back() != '\n') widths.push_back(col);
    return widths;
}

std::vector<SymbolSpan> parse_source(std::string_view path, std::string_view text,
                                     const ParseOptions& options) {
    const auto tokens = Lexer(text, options.tab_width).run();
    auto spans = ScopeTracker(tokens, path).run();
    for (const auto& t : tokens)
        if (t.type == Tok::Ident)
            spans.push_back({make_symbol_id(path, SymbolKind::Identifier, t.start), std::string(path),
                             SymbolKind::Identifier, t.start, t.end, std::string(t.text)});
    const auto widths = line_widths(text, options.tab_width);
    for (int l = 0; l < static_cast<int>(widths.size()); ++l) {
        const Position start{l, 0};
        spans.push_back({make_symbol_id(path, SymbolKind::Line, start), std::string(path),
                         SymbolKind::Line, start, {l, widths[l]}, std::to_string(l)});
    }
    std::sort(spans.begin(), spans.end(), [](const SymbolSpan& a, const SymbolSpan& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.kind < b.kind;
    });
    return spans;
}

}  // namespace cogtrace::code
