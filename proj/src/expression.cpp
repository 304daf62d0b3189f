#include "treetn/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace treetn {

struct Expression::Node {
  enum class Kind { Number, Variable, Unary, Binary, Call } kind;
  double value = 0.0;
  int variable = 0;
  char op = 0;
  std::string function;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  n->value = v;
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

  int arity() const { return arity_; }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary('+', lhs, term());
      else if (accept('-')) lhs = binary('-', lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = binary('*', lhs, unary());
      else if (accept('/')) lhs = binary('/', lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Unary;
      n->op = '-';
      n->args = {unary()};
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return binary('^', base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      return make_number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "pi") return make_number(std::numbers::pi);
      if (name == "e") return make_number(std::numbers::e);
      if (name.size() > 1 && name[0] == 'x' &&
          name.find_first_not_of("0123456789", 1) == std::string::npos) {
        const int index = std::stoi(name.substr(1));
        if (index < 1) fail("variables are numbered from x1");
        arity_ = std::max(arity_, index);
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Variable;
        n->variable = index - 1;
        return n;
      }
      return call(name);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr call(const std::string& name) {
    static const std::vector<std::string> unary_fns = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "atan"};
    static const std::vector<std::string> binary_fns = {"min", "max", "pow"};
    std::size_t want = 0;
    for (const auto& f : unary_fns)
      if (f == name) want = 1;
    for (const auto& f : binary_fns)
      if (f == name) want = 2;
    if (want == 0) fail("unknown identifier '" + name + "'");
    if (!accept('(')) fail("expected '(' after " + name);
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Call;
    n->function = name;
    n->args.push_back(expr());
    while (accept(',')) n->args.push_back(expr());
    if (!accept(')')) fail("expected ')'");
    if (n->args.size() != want) fail(name + " takes " + std::to_string(want) + " argument(s)");
    return n;
  }

  std::string s_;
  std::size_t pos_ = 0;
  int arity_ = 0;
};

double eval(const Node& n, std::span<const double> x) {
  switch (n.kind) {
    case Node::Kind::Number:
      return n.value;
    case Node::Kind::Variable:
      if (static_cast<std::size_t>(n.variable) >= x.size()) throw std::out_of_range("expression variable out of range");
      return x[static_cast<std::size_t>(n.variable)];
    case Node::Kind::Unary:
      return -eval(*n.args[0], x);
    case Node::Kind::Binary: {
      const double a = eval(*n.args[0], x);
      const double b = eval(*n.args[1], x);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: return std::pow(a, b);
      }
    }
    case Node::Kind::Call: {
      const double a = eval(*n.args[0], x);
      const auto& f = n.function;
      if (f == "sin") return std::sin(a);
      if (f == "cos") return std::cos(a);
      if (f == "tan") return std::tan(a);
      if (f == "exp") return std::exp(a);
      if (f == "log") return std::log(a);
      if (f == "sqrt") return std::sqrt(a);
      if (f == "abs") return std::abs(a);
      if (f == "tanh") return std::tanh(a);
      if (f == "atan") return std::atan(a);
      const double b = eval(*n.args[1], x);
      if (f == "min") return std::min(a, b);
      if (f == "max") return std::max(a, b);
      return std::pow(a, b);
    }
  }
  return 0.0;
}

}  // namespace

Expression::Expression(const std::string& text) : text_(text) {
  Parser p(text);
  root_ = p.parse();
  arity_ = p.arity();
}

double Expression::operator()(std::span<const double> x) const { return eval(*root_, x); }

}  // namespace treetn
