#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace homog::expr {

// =====================================================================
// Small arithmetic DSL for right-hand sides and transport initial data.
// Supported: + - * / ^ (with ^ binding tighter than unary minus and
// associating to the right), the functions sin cos tan abs exp log sqrt
// floor (one argument) and min max (two arguments), and the constants
// pi and e. Variables must be declared at parse time.
// =====================================================================

enum class Kind { number, variable, constant, negate, binary, call };

struct Node;
using Ast = std::shared_ptr<const Node>;

struct Node {
  Kind kind{};
  double value = 0.0;      // number and constant nodes
  std::string name;        // variable, constant and call nodes
  char op = 0;             // binary nodes: one of + - * / ^
  std::vector<Ast> args;   // negate: 1, binary: 2, call: declared arity
  std::size_t offset = 0;  // byte offset of the token that started the node
};

struct ParseError : std::runtime_error {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t off);
};

struct EvalError : std::runtime_error {
  std::size_t offset;
  EvalError(const std::string& msg, std::size_t off);
};

/// Parses text over the declared variables. Unknown identifiers, arity
/// mistakes and malformed syntax raise ParseError with the byte offset.
Ast parse(std::string_view text, const std::vector<std::string>& variables);

/// Evaluates in IEEE double arithmetic. Division by zero, log of a
/// non-positive value, sqrt of a negative value and non-finite results
/// raise EvalError carrying the offset of the offending node.
double eval(const Ast& node, const std::map<std::string, double>& bindings);

/// Fully parenthesized form; parse(print(a)) is structurally equal to a
/// (number literals are emitted in shortest round-trip form).
std::string print(const Ast& node);

bool equal(const Ast& a, const Ast& b);

bool uses_variable(const Ast& node, std::string_view name);

}  // namespace homog::expr
