#pragma once

#include <memory>
#include <string_view>

namespace degenwave::detail {

/// Parsed initial-data expression f(x). Throws InvalidArgument on syntax
/// errors.
class Expression {
 public:
  static Expression parse(std::string_view text);
  double eval(double x) const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
};

}  // namespace degenwave::detail
