#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cogtrace/common/error.hpp"

namespace cogtrace::highlight {

// Syntax and name errors; line and column are 1-based.
class ScriptError : public Error {
public:
    ScriptError(const std::string& message, int line, int column);
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

// Evaluation failures (division by zero, log of a non-positive value, ...)
// for a specific symbol.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& message, std::string symbol_id);
    const std::string& symbol_id() const noexcept { return symbol_id_; }

private:
    std::string symbol_id_;
};

struct Node {
    enum class Kind { Number, Variable, Negate, Add, Subtract, Multiply, Divide, Call };

    Kind kind = Kind::Number;
    double number = 0.0;
    std::string name;  // variable or function
    std::vector<Node> args;
    int line = 1;
    int column = 1;
};

// expr   := term (('+' | '-') term)*
// term   := unary (('*' | '/') unary)*
// unary  := '-' unary | primary
// primary:= number | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
// func   := min | max | abs | log | norm
// '#' starts a comment that runs to the end of the line.
struct ScoreScript {
    std::string source;
    Node root;

    // Referenced variables, sorted, unique.
    std::vector<std::string> variables() const;
};

inline constexpr std::string_view kDefaultScript = "norm(gaze_duration_ms)";

ScoreScript parse_script(std::string_view text);

// Canonical rendering, fully parenthesized.
std::string to_string(const Node& node);

}  // namespace cogtrace::highlight
