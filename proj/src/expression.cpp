#include "expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "degenwave/error.hpp"

namespace degenwave::detail {

struct Expression::Node {
  enum class Kind { kNumber, kX, kAdd, kSub, kMul, kDiv, kNeg, kSin, kCos } kind;
  double number = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(double x) const {
    switch (kind) {
      case Kind::kNumber: return number;
      case Kind::kX: return x;
      case Kind::kAdd: return lhs->eval(x) + rhs->eval(x);
      case Kind::kSub: return lhs->eval(x) - rhs->eval(x);
      case Kind::kMul: return lhs->eval(x) * rhs->eval(x);
      case Kind::kDiv: return lhs->eval(x) / rhs->eval(x);
      case Kind::kNeg: return -lhs->eval(x);
      case Kind::kSin: return std::sin(lhs->eval(x));
      case Kind::kCos: return std::cos(lhs->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double number = 0.0) {
  auto node = std::make_shared<Expression::Node>();
  node->kind = kind;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  node->number = number;
  return node;
}

// expr   := term (('+' | '-') term)*
// term   := unary (('*' | '/') unary)*
// unary  := '-' unary | '+' unary | atom
// atom   := number | 'x' | 'pi' | ('sin' | 'cos') '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr root = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("expression: " + what + " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Kind::kAdd, lhs, term());
      } else if (accept('-')) {
        lhs = make(Kind::kSub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Kind::kMul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Kind::kDiv, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::kNeg, unary());
    if (accept('+')) return unary();
    return atom();
  }

  NodePtr atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (accept('(')) {
      NodePtr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < text_.size() && std::isalpha(static_cast<unsigned char>(text_[end]))) ++end;
      const std::string word(text_.substr(pos_, end - pos_));
      pos_ = end;
      if (word == "x") return make(Kind::kX);
      if (word == "pi") return make(Kind::kNumber, nullptr, nullptr, std::numbers::pi);
      if (word == "sin" || word == "cos") {
        expect('(');
        NodePtr arg = expr();
        expect(')');
        return make(word == "sin" ? Kind::kSin : Kind::kCos, arg);
      }
      fail("unknown identifier '" + word + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::string rest(text_.substr(pos_));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("bad number");
    }
    pos_ += used;
    return make(Kind::kNumber, nullptr, nullptr, value);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.root_ = Parser(text).parse();
  return e;
}

double Expression::eval(double x) const { return root_->eval(x); }

}  // namespace degenwave::detail
