#include "cogtrace/highlight/script.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "cogtrace/common/text.hpp"
#include "cogtrace/physio/metrics.hpp"

namespace cogtrace::highlight {

ScriptError::ScriptError(const std::string& message, int line, int column)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message), line_(line), column_(column) {}

EvaluationError::EvaluationError(const std::string& message, std::string symbol_id)
    : Error(symbol_id + ": " + message), symbol_id_(std::move(symbol_id)) {}

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, LParen, RParen, Comma, End };

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
    int line, column;
};

bool is_variable(std::string_view name) {
    for (const char* c : physio::kMetricColumns)
        if (name == c) return true;
    return false;
}

bool is_function(std::string_view name) {
    return name == "min" || name == "max" || name == "abs" || name == "log" || name == "norm";
}

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < s.size()) {
        const char c = s[i];
        if (c == '#') {
            while (i < s.size() && s[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        const int tl = line, tc = col;
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && s[j] == '.') {
                ++j;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            }
            if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
                if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
                    while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
                    j = k;
                }
            }
            Token t{Tok::Number, std::string(s.substr(i, j - i)), 0.0, tl, tc};
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
            if (ec != std::errc() || p != t.text.data() + t.text.size())
                throw ScriptError("malformed number '" + t.text + "'", tl, tc);
            out.push_back(std::move(t));
            advance(j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), 0.0, tl, tc});
            advance(j - i);
            continue;
        }
        Tok k;
        switch (c) {
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            case '*': k = Tok::Star; break;
            case '/': k = Tok::Slash; break;
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            case ',': k = Tok::Comma; break;
            default: throw ScriptError(std::string("unexpected character '") + c + "'", tl, tc);
        }
        out.push_back({k, std::string(1, c), 0.0, tl, tc});
        advance(1);
    }
    out.push_back({Tok::End, "", 0.0, line, col});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Node parse() {
        Node n = expr();
        if (peek().kind != Tok::End) fail("expected end of script");
        return n;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_++]; }

    [[noreturn]] void fail(const std::string& what) const {
        const auto& t = peek();
        const std::string found = t.kind == Tok::End ? "end of script" : "'" + t.text + "'";
        throw ScriptError(what + ", found " + found, t.line, t.column);
    }

    static Node binary(Node::Kind k, Node lhs, Node rhs, const Token& op) {
        Node n;
        n.kind = k;
        n.line = op.line;
        n.column = op.column;
        n.args.push_back(std::move(lhs));
        n.args.push_back(std::move(rhs));
        return n;
    }

    Node expr() {
        Node lhs = term();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const Token& op = take();
            lhs = binary(op.kind == Tok::Plus ? Node::Kind::Add : Node::Kind::Subtract, std::move(lhs), term(), op);
        }
        return lhs;
    }

    Node term() {
        Node lhs = unary();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const Token& op = take();
            lhs = binary(op.kind == Tok::Star ? Node::Kind::Multiply : Node::Kind::Divide, std::move(lhs), unary(), op);
        }
        return lhs;
    }

    Node unary() {
        if (peek().kind == Tok::Minus) {
            const Token& op = take();
            Node n;
            n.kind = Node::Kind::Negate;
            n.line = op.line;
            n.column = op.column;
            n.args.push_back(unary());
            return n;
        }
        return primary();
    }

    Node primary() {
        const Token& t = peek();
        Node n;
        n.line = t.line;
        n.column = t.column;
        switch (t.kind) {
            case Tok::Number:
                take();
                n.kind = Node::Kind::Number;
                n.number = t.number;
                return n;
            case Tok::LParen: {
                take();
                n = expr();
                if (peek().kind != Tok::RParen) fail("expected ')'");
                take();
                return n;
            }
            case Tok::Ident: {
                take();
                n.name = t.text;
                if (peek().kind == Tok::LParen) {
                    if (!is_function(t.text)) throw ScriptError("unknown function '" + t.text + "'", t.line, t.column);
                    take();
                    n.kind = Node::Kind::Call;
                    n.args.push_back(expr());
                    while (peek().kind == Tok::Comma) {
                        take();
                        n.args.push_back(expr());
                    }
                    if (peek().kind != Tok::RParen) fail("expected ',' or ')'");
                    take();
                    const bool unary_fn = n.name == "abs" || n.name == "log" || n.name == "norm";
                    if (unary_fn && n.args.size() != 1)
                        throw ScriptError(n.name + " takes exactly one argument", t.line, t.column);
                    return n;
                }
                if (!is_variable(t.text)) {
                    if (is_function(t.text)) throw ScriptError("function '" + t.text + "' needs arguments", t.line, t.column);
                    throw ScriptError("unknown identifier '" + t.text + "'", t.line, t.column);
                }
                n.kind = Node::Kind::Variable;
                return n;
            }
            default:
                fail("expected a number, variable, function call or '('");
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

void collect(const Node& n, std::set<std::string>& out) {
    if (n.kind == Node::Kind::Variable) out.insert(n.name);
    for (const auto& a : n.args) collect(a, out);
}

}  // namespace

std::vector<std::string> ScoreScript::variables() const {
    std::set<std::string> names;
    collect(root, names);
    return {names.begin(), names.end()};
}

ScoreScript parse_script(std::string_view text) {
    Parser p(tokenize(text));
    return {std::string(text), p.parse()};
}

std::string to_string(const Node& n) {
    auto bin = [&](const char* op) { return "(" + to_string(n.args[0]) + " " + op + " " + to_string(n.args[1]) + ")"; };
    switch (n.kind) {
        case Node::Kind::Number: return text::format_double(n.number);
        case Node::Kind::Variable: return n.name;
        case Node::Kind::Negate: return "(-" + to_string(n.args[0]) + ")";
        case Node::Kind::Add: return bin("+");
        case Node::Kind::Subtract: return bin("-");
        case Node::Kind::Multiply: return bin("*");
        case Node::Kind::Divide: return bin("/");
        case Node::Kind::Call: {
            std::string s = n.name + "(";
            for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? ", " : "") + to_string(n.args[i]);
            return s + ")";
        }
    }
    return {};
}

}  // namespace cogtrace::highlight
