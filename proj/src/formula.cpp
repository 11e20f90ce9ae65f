#include "motifbench/formula.hpp"

#include <algorithm>
#include <cctype>

#include "motifbench/error.hpp"
#include "motifbench/strings.hpp"

namespace motifbench {

struct Formula::Node {
  enum class Op { Number, Name, Neg, Add, Sub, Mul, Div } op = Op::Number;
  double number = 0;
  std::string name;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Formula::Node>;

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse_all() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }
  std::vector<std::string> names;

 private:
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
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("formula '" + std::string(s_) + "' at column " + std::to_string(pos_ + 1) +
                     ": " + msg);
  }
  static NodePtr binary(Formula::Node::Op op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Formula::Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) n = binary(Formula::Node::Op::Add, n, term());
      else if (accept('-')) n = binary(Formula::Node::Op::Sub, n, term());
      else return n;
    }
  }
  NodePtr term() {
    auto n = unary();
    for (;;) {
      if (accept('*')) n = binary(Formula::Node::Op::Mul, n, unary());
      else if (accept('/')) n = binary(Formula::Node::Op::Div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (accept('-')) return binary(Formula::Node::Op::Neg, unary(), nullptr);
    if (accept('+')) return unary();
    return primary();
  }
  NodePtr primary() {
    if (accept('(')) {
      auto n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    auto n = std::make_shared<Formula::Node>();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const auto start = pos_;
      while (pos_ < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
              s_[pos_] == 'e' || s_[pos_] == 'E' ||
              ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
               (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')))) {
        ++pos_;
      }
      auto v = parse_double(s_.substr(start, pos_ - start));
      if (!v) fail("bad number");
      n->op = Formula::Node::Op::Number;
      n->number = *v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const auto start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                  s_[pos_] == '_' || s_[pos_] == '.')) {
        ++pos_;
      }
      n->op = Formula::Node::Op::Name;
      n->name = std::string(s_.substr(start, pos_ - start));
      if (std::find(names.begin(), names.end(), n->name) == names.end()) names.push_back(n->name);
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

double eval(const Formula::Node& n, const std::function<double(const std::string&)>& lookup,
            const std::string& text) {
  using Op = Formula::Node::Op;
  switch (n.op) {
    case Op::Number: return n.number;
    case Op::Name: return lookup(n.name);
    case Op::Neg: return -eval(*n.lhs, lookup, text);
    case Op::Add: return eval(*n.lhs, lookup, text) + eval(*n.rhs, lookup, text);
    case Op::Sub: return eval(*n.lhs, lookup, text) - eval(*n.rhs, lookup, text);
    case Op::Mul: return eval(*n.lhs, lookup, text) * eval(*n.rhs, lookup, text);
    case Op::Div: {
      const double a = eval(*n.lhs, lookup, text);
      const double b = eval(*n.rhs, lookup, text);
      if (b == 0) {
        if (a == 0) return 0.0;
        throw InvalidArgument("division by zero in '" + text + "'");
      }
      return a / b;
    }
  }
  return 0.0;
}

}  // namespace

Formula Formula::parse(std::string_view text) {
  Parser p(text);
  Formula f;
  f.root_ = p.parse_all();
  f.names_ = std::move(p.names);
  f.text_ = std::string(trim(text));
  return f;
}

double Formula::evaluate(const std::function<double(const std::string&)>& lookup) const {
  if (!root_) throw InvalidArgument("empty formula");
  return eval(*root_, lookup, text_);
}

}  // namespace motifbench
