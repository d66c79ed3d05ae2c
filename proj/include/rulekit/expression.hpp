#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rulekit {

/// Division rule shared by all measure arithmetic: x/0 with x>0 saturates to
/// the largest finite value, x<0 to the lowest, and 0/0 is 0, so greedy
/// search never aborts mid-growth.
inline double safe_div(double num, double den) {
  if (den != 0.0) return num / den;
  if (num > 0.0) return std::numeric_limits<double>::max();
  if (num < 0.0) return std::numeric_limits<double>::lowest();
  return 0.0;
}

class ExprParseError : public std::runtime_error {
public:
  ExprParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

/// Arithmetic expression over the contingency variables p, n, P, N
/// (case-sensitive), numeric literals, + - * /, unary minus and parentheses.
class MeasureExpr {
public:
  enum class Var { p, n, P, N };

  struct Node {
    enum class Kind { literal, variable, add, sub, mul, div, neg };
    Kind kind;
    double literal = 0;
    Var var = Var::p;
    std::shared_ptr<const Node> left, right;
  };

  MeasureExpr() = default;
  explicit MeasureExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  bool valid() const { return root_ != nullptr; }
  const std::shared_ptr<const Node>& root() const { return root_; }

  double evaluate(double p, double n, double P, double N) const {
    if (!root_) throw std::logic_error("evaluating an empty expression");
    return eval(*root_, p, n, P, N);
  }

  /// Canonical rendering; parsing the result reproduces the same tree.
  std::string unparse() const {
    if (!root_) return {};
    return render(*root_, 0);
  }

  bool operator==(const MeasureExpr& o) const { return equal(root_.get(), o.root_.get()); }

private:
  static double eval(const Node& nd, double p, double n, double P, double N) {
    switch (nd.kind) {
      case Node::Kind::literal: return nd.literal;
      case Node::Kind::variable:
        switch (nd.var) {
          case Var::p: return p;
          case Var::n: return n;
          case Var::P: return P;
          case Var::N: return N;
        }
        return 0;
      case Node::Kind::add: return eval(*nd.left, p, n, P, N) + eval(*nd.right, p, n, P, N);
      case Node::Kind::sub: return eval(*nd.left, p, n, P, N) - eval(*nd.right, p, n, P, N);
      case Node::Kind::mul: return eval(*nd.left, p, n, P, N) * eval(*nd.right, p, n, P, N);
      case Node::Kind::div:
        return safe_div(eval(*nd.left, p, n, P, N), eval(*nd.right, p, n, P, N));
      case Node::Kind::neg: return -eval(*nd.left, p, n, P, N);
    }
    return 0;
  }

  // Precedence: 1 for +/-, 2 for * and /, 3 for unary minus and leaves.
  static int precedence(Node::Kind k) {
    switch (k) {
      case Node::Kind::add:
      case Node::Kind::sub: return 1;
      case Node::Kind::mul:
      case Node::Kind::div: return 2;
      default: return 3;
    }
  }

  static std::string render(const Node& nd, int parent_prec) {
    std::string out;
    int prec = precedence(nd.kind);
    switch (nd.kind) {
      case Node::Kind::literal: {
        char buf[64];
        auto r = std::to_chars(buf, buf + sizeof buf, nd.literal);
        out.assign(buf, r.ptr);
        break;
      }
      case Node::Kind::variable:
        out = nd.var == Var::p ? "p" : nd.var == Var::n ? "n" : nd.var == Var::P ? "P" : "N";
        break;
      case Node::Kind::neg:
        out = "-" + render(*nd.left, prec);
        break;
      case Node::Kind::add:
      case Node::Kind::sub:
      case Node::Kind::mul:
      case Node::Kind::div: {
        char op = nd.kind == Node::Kind::add   ? '+'
                  : nd.kind == Node::Kind::sub ? '-'
                  : nd.kind == Node::Kind::mul ? '*'
                                               : '/';
        // Left-associative operators: the right child needs parens at equal
        // precedence, the left does not.
        out = render(*nd.left, prec - 1) + ' ' + op + ' ' + render(*nd.right, prec);
        break;
      }
    }
    if (prec < 3 && prec <= parent_prec) out = "(" + out + ")";
    return out;
  }

  static bool equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case Node::Kind::literal: return a->literal == b->literal;
      case Node::Kind::variable: return a->var == b->var;
      case Node::Kind::neg: return equal(a->left.get(), b->left.get());
      default: return equal(a->left.get(), b->left.get()) && equal(a->right.get(), b->right.get());
    }
  }

  std::shared_ptr<const Node> root_;
};

namespace detail {

class ExprParser {
public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  std::shared_ptr<const MeasureExpr::Node> parse() {
    auto node = parse_sum();
    skip_space();
    if (pos_ != src_.size()) throw ExprParseError("unexpected trailing input", pos_);
    return node;
  }

private:
  using Node = MeasureExpr::Node;
  using NodePtr = std::shared_ptr<const Node>;

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    auto left = parse_product();
    while (true) {
      if (accept('+'))
        left = make_binary(Node::Kind::add, left, parse_product());
      else if (accept('-'))
        left = make_binary(Node::Kind::sub, left, parse_product());
      else
        return left;
    }
  }

  NodePtr parse_product() {
    auto left = parse_factor();
    while (true) {
      if (accept('*'))
        left = make_binary(Node::Kind::mul, left, parse_factor());
      else if (accept('/'))
        left = make_binary(Node::Kind::div, left, parse_factor());
      else
        return left;
    }
  }

  NodePtr parse_factor() {
    skip_space();
    if (pos_ >= src_.size()) throw ExprParseError("expected an operand", pos_);
    char c = src_[pos_];
    if (c == '-') {
      ++pos_;
      auto node = std::make_shared<Node>();
      node->kind = Node::Kind::neg;
      node->left = parse_factor();
      return node;
    }
    if (c == '(') {
      std::size_t open = pos_++;
      auto inner = parse_sum();
      skip_space();
      if (!accept(')')) throw ExprParseError("unbalanced parenthesis opened", open);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double value;
      auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), value);
      if (ec != std::errc{}) throw ExprParseError("malformed number", pos_);
      pos_ = static_cast<std::size_t>(ptr - src_.data());
      auto node = std::make_shared<Node>();
      node->kind = Node::Kind::literal;
      node->literal = value;
      return node;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t begin = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_'))
        ++pos_;
      std::string_view ident = src_.substr(begin, pos_ - begin);
      auto node = std::make_shared<Node>();
      node->kind = Node::Kind::variable;
      if (ident == "p")
        node->var = MeasureExpr::Var::p;
      else if (ident == "n")
        node->var = MeasureExpr::Var::n;
      else if (ident == "P")
        node->var = MeasureExpr::Var::P;
      else if (ident == "N")
        node->var = MeasureExpr::Var::N;
      else
        throw ExprParseError("unknown identifier '" + std::string(ident) + "'", begin);
      return node;
    }
    throw ExprParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  static NodePtr make_binary(Node::Kind kind, NodePtr left, NodePtr right) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->left = std::move(left);
    node->right = std::move(right);
    return node;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses an arithmetic formula over {p, n, P, N} with conventional
/// precedence and left associativity. Errors carry the character offset.
inline MeasureExpr parse_measure_expression(std::string_view source) {
  return MeasureExpr(detail::ExprParser(source).parse());
}

}  // namespace rulekit
