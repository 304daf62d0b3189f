#pragma once

#include <memory>
#include <span>
#include <string>

namespace treetn {

/// Arithmetic expression over variables x1, x2, ... (one-based).
///
/// Grammar: + - * / ^ (right-associative), unary minus, parentheses, the
/// constants pi and e, and the functions sin cos tan exp log sqrt abs tanh
/// atan (one argument), min max pow (two arguments). Parsed once; evaluation
/// is reentrant.
class Expression {
 public:
  explicit Expression(const std::string& text);

  double operator()(std::span<const double> x) const;

  /// Largest variable index referenced (0 when constant).
  int arity() const { return arity_; }
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  int arity_ = 0;
};

}  // namespace treetn
