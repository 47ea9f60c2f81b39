#include "homog/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "homog/util.hpp"

namespace homog::expr {

ParseError::ParseError(const std::string& msg, std::size_t off)
    : std::runtime_error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}

EvalError::EvalError(const std::string& msg, std::size_t off)
    : std::runtime_error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}

namespace {

struct Function {
  const char* name;
  int arity;
};

constexpr Function kFunctions[] = {
    {"sin", 1}, {"cos", 1}, {"tan", 1},   {"abs", 1}, {"exp", 1},
    {"log", 1}, {"sqrt", 1}, {"floor", 1}, {"min", 2}, {"max", 2},
};

const Function* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return &f;
  return nullptr;
}

// ------------------------------------------------------------------ lexer

enum class Tok { number, ident, op, lparen, rparen, comma, end };

struct Token {
  Tok kind;
  std::string_view text;
  double number = 0.0;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return token_; }

  Token take() {
    Token t = token_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    token_.offset = pos_;
    if (pos_ >= text_.size()) {
      token_ = {Tok::end, {}, 0.0, pos_};
      return;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      token_ = {Tok::ident, text_.substr(start, pos_ - start), 0.0, start};
      return;
    }
    switch (c) {
      case '+': case '-': case '*': case '/': case '^':
        token_ = {Tok::op, text_.substr(pos_, 1), 0.0, pos_};
        ++pos_;
        return;
      case '(': token_ = {Tok::lparen, text_.substr(pos_, 1), 0.0, pos_}; ++pos_; return;
      case ')': token_ = {Tok::rparen, text_.substr(pos_, 1), 0.0, pos_}; ++pos_; return;
      case ',': token_ = {Tok::comma, text_.substr(pos_, 1), 0.0, pos_}; ++pos_; return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }
  }

  void lex_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_ + 1;
      if (mark < text_.size() && (text_[mark] == '+' || text_[mark] == '-')) ++mark;
      if (mark < text_.size() && std::isdigit(static_cast<unsigned char>(text_[mark]))) {
        pos_ = mark;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc{})
      throw ParseError("malformed number literal", start);
    token_ = {Tok::number, text_.substr(start, pos_ - start), value, start};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token token_{};
};

// ----------------------------------------------------------------- parser
//
//   expr    := term  (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := primary ['^' unary]          right associative
//   primary := number | ident ['(' expr (',' expr)* ')'] | '(' expr ')'

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& variables)
      : lexer_(text), variables_(variables) {}

  Ast run() {
    Ast root = parse_expr();
    const Token& t = lexer_.peek();
    if (t.kind != Tok::end)
      throw ParseError("trailing input after expression", t.offset);
    return root;
  }

 private:
  static Ast make(Node node) { return std::make_shared<const Node>(std::move(node)); }

  bool at_op(char c) const {
    const Token& t = lexer_.peek();
    return t.kind == Tok::op && t.text[0] == c;
  }

  Ast parse_expr() {
    Ast left = parse_term();
    while (at_op('+') || at_op('-')) {
      Token t = lexer_.take();
      Ast right = parse_term();
      left = make({Kind::binary, 0.0, {}, t.text[0], {left, right}, t.offset});
    }
    return left;
  }

  Ast parse_term() {
    Ast left = parse_unary();
    while (at_op('*') || at_op('/')) {
      Token t = lexer_.take();
      Ast right = parse_unary();
      left = make({Kind::binary, 0.0, {}, t.text[0], {left, right}, t.offset});
    }
    return left;
  }

  Ast parse_unary() {
    if (at_op('-')) {
      Token t = lexer_.take();
      Ast inner = parse_unary();
      return make({Kind::negate, 0.0, {}, 0, {inner}, t.offset});
    }
    return parse_power();
  }

  Ast parse_power() {
    Ast base = parse_primary();
    if (at_op('^')) {
      Token t = lexer_.take();
      Ast exponent = parse_unary();  // right associativity, and 2^-3 parses
      return make({Kind::binary, 0.0, {}, '^', {base, exponent}, t.offset});
    }
    return base;
  }

  Ast parse_primary() {
    Token t = lexer_.take();
    switch (t.kind) {
      case Tok::number:
        return make({Kind::number, t.number, {}, 0, {}, t.offset});
      case Tok::lparen: {
        Ast inner = parse_expr();
        expect_rparen();
        return inner;
      }
      case Tok::ident:
        return parse_ident(t);
      case Tok::end:
        throw ParseError("unexpected end of input", t.offset);
      default:
        throw ParseError("unexpected token '" + std::string(t.text) + "'", t.offset);
    }
  }

  Ast parse_ident(const Token& t) {
    if (lexer_.peek().kind == Tok::lparen) {
      const Function* fn = find_function(t.text);
      if (!fn)
        throw ParseError("unknown function '" + std::string(t.text) + "'", t.offset);
      lexer_.take();  // '('
      std::vector<Ast> args;
      args.push_back(parse_expr());
      while (lexer_.peek().kind == Tok::comma) {
        lexer_.take();
        args.push_back(parse_expr());
      }
      expect_rparen();
      if (static_cast<int>(args.size()) != fn->arity)
        throw ParseError("function '" + std::string(t.text) + "' expects " +
                             std::to_string(fn->arity) + " argument(s), got " +
                             std::to_string(args.size()),
                         t.offset);
      return make({Kind::call, 0.0, std::string(t.text), 0, std::move(args), t.offset});
    }
    if (t.text == "pi")
      return make({Kind::constant, std::numbers::pi, "pi", 0, {}, t.offset});
    if (t.text == "e")
      return make({Kind::constant, std::numbers::e, "e", 0, {}, t.offset});
    if (std::find(variables_.begin(), variables_.end(), t.text) == variables_.end())
      throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset);
    return make({Kind::variable, 0.0, std::string(t.text), 0, {}, t.offset});
  }

  void expect_rparen() {
    Token t = lexer_.take();
    if (t.kind != Tok::rparen)
      throw ParseError("expected ')'", t.offset);
  }

  Lexer lexer_;
  const std::vector<std::string>& variables_;
};

double checked(double value, const Node& node) {
  if (!std::isfinite(value))
    throw EvalError("non-finite result", node.offset);
  return value;
}

}  // namespace

Ast parse(std::string_view text, const std::vector<std::string>& variables) {
  return Parser(text, variables).run();
}

double eval(const Ast& node, const std::map<std::string, double>& bindings) {
  const Node& n = *node;
  switch (n.kind) {
    case Kind::number:
    case Kind::constant:
      return n.value;
    case Kind::variable: {
      auto it = bindings.find(n.name);
      if (it == bindings.end())
        throw EvalError("unbound variable '" + n.name + "'", n.offset);
      return it->second;
    }
    case Kind::negate:
      return -eval(n.args[0], bindings);
    case Kind::binary: {
      const double a = eval(n.args[0], bindings);
      const double b = eval(n.args[1], bindings);
      switch (n.op) {
        case '+': return checked(a + b, n);
        case '-': return checked(a - b, n);
        case '*': return checked(a * b, n);
        case '/':
          if (b == 0.0) throw EvalError("division by zero", n.offset);
          return checked(a / b, n);
        case '^': return checked(std::pow(a, b), n);
        default: throw EvalError("corrupt operator node", n.offset);
      }
    }
    case Kind::call: {
      const double a = eval(n.args[0], bindings);
      if (n.name == "sin") return checked(std::sin(a), n);
      if (n.name == "cos") return checked(std::cos(a), n);
      if (n.name == "tan") return checked(std::tan(a), n);
      if (n.name == "abs") return std::fabs(a);
      if (n.name == "exp") return checked(std::exp(a), n);
      if (n.name == "log") {
        if (a <= 0.0) throw EvalError("log of a non-positive value", n.offset);
        return checked(std::log(a), n);
      }
      if (n.name == "sqrt") {
        if (a < 0.0) throw EvalError("sqrt of a negative value", n.offset);
        return std::sqrt(a);
      }
      if (n.name == "floor") return std::floor(a);
      const double b = eval(n.args[1], bindings);
      if (n.name == "min") return std::fmin(a, b);
      if (n.name == "max") return std::fmax(a, b);
      throw EvalError("corrupt call node '" + n.name + "'", n.offset);
    }
  }
  throw EvalError("corrupt node", n.offset);
}

std::string print(const Ast& node) {
  const Node& n = *node;
  switch (n.kind) {
    case Kind::number:
      return format_double(n.value);
    case Kind::constant:
    case Kind::variable:
      return n.name;
    case Kind::negate:
      return "(-" + print(n.args[0]) + ")";
    case Kind::binary:
      return "(" + print(n.args[0]) + " " + n.op + " " + print(n.args[1]) + ")";
    case Kind::call: {
      std::string out = n.name + "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        out += print(n.args[i]);
      }
      return out + ")";
    }
  }
  return {};
}

bool equal(const Ast& a, const Ast& b) {
  if (a->kind != b->kind || a->op != b->op || a->name != b->name ||
      a->args.size() != b->args.size())
    return false;
  if ((a->kind == Kind::number || a->kind == Kind::constant) && a->value != b->value)
    return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!equal(a->args[i], b->args[i])) return false;
  return true;
}

bool uses_variable(const Ast& node, std::string_view name) {
  if (node->kind == Kind::variable && node->name == name) return true;
  for (const auto& arg : node->args)
    if (uses_variable(arg, name)) return true;
  return false;
}

}  // namespace homog::expr
