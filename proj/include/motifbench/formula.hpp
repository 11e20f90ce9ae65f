#pragma once

// Arithmetic expressions over named quantities: numbers, names
// ([A-Za-z_][A-Za-z0-9_.]*), unary minus, + - * / and parentheses.

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace motifbench {

class Formula {
 public:
  Formula() = default;

  // Throws ParseError with the column in the message.
  static Formula parse(std::string_view text);

  // 0/0 evaluates to 0; any other division by zero throws InvalidArgument.
  double evaluate(const std::function<double(const std::string&)>& lookup) const;

  // Distinct names in order of first appearance.
  const std::vector<std::string>& names() const { return names_; }
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::vector<std::string> names_;
  std::string text_;
};

}  // namespace motifbench
