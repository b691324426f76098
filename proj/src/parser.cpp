#include "routhft/parser.hpp"

#include <cctype>

namespace routhft {

namespace {

class Parser {
public:
  Parser(const Chart& ch, const std::string& text, const UnknownHandler& on_unknown)
      : ch_(ch), text_(text), unknown_(on_unknown) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (at_ < text_.size())
      throw ParseError("unexpected trailing input", at_);
    return e;
  }

private:
  void skip_ws() {
    while (at_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[at_])))
      ++at_;
  }

  char peek() {
    skip_ws();
    return at_ < text_.size() ? text_[at_] : '\0';
  }

  bool eat(char c) {
    if (peek() == c) {
      ++at_;
      return true;
    }
    return false;
  }

  Expr expr() {
    bool neg = false;
    if (eat('-'))
      neg = true;
    else
      eat('+');
    Expr e = term();
    if (neg)
      e = ex_neg(ch_, e);
    for (;;) {
      if (eat('+'))
        e = ex_add(ch_, e, term());
      else if (eat('-'))
        e = ex_sub(ch_, e, term());
      else
        return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (eat('*'))
        e = ex_mul(ch_, e, factor());
      else if (eat('/'))
        e = ex_div(ch_, e, factor());
      else
        return e;
    }
  }

  Expr factor() {
    Expr b = base();
    if (eat('^')) {
      bool neg = eat('-');
      size_t p = at_;
      skip_ws();
      if (at_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[at_])))
        throw ParseError("expected integer exponent", p);
      long long v = 0;
      while (at_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[at_])))
        v = v * 10 + (text_[at_++] - '0');
      return ex_pow(ch_, b, static_cast<int>(neg ? -v : v));
    }
    return b;
  }

  Expr base() {
    char c = peek();
    if (c == '(') {
      ++at_;
      Expr e = expr();
      if (!eat(')'))
        throw ParseError("expected ')'", at_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)))
      return number();
    if (std::isalpha(static_cast<unsigned char>(c)))
      return identifier();
    throw ParseError("unexpected character", at_);
  }

  Expr number() {
    Rat v = 0;
    while (at_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[at_])))
      v = v * 10 + (text_[at_++] - '0');
    if (at_ < text_.size() && text_[at_] == '.') {
      ++at_;
      Rat den = 1;
      while (at_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[at_]))) {
        v = v * 10 + (text_[at_++] - '0');
        den *= 10;
      }
      v /= den;
    }
    return ex_num(v);
  }

  Expr identifier() {
    size_t start = at_;
    while (at_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[at_])) || text_[at_] == '_'))
      ++at_;
    std::string name = text_.substr(start, at_ - start);
    if (name == "sin" || name == "cos" || name == "exp" || name == "tanh" ||
        name == "sech") {
      if (!eat('('))
        throw ParseError("expected '(' after function " + name, at_);
      Expr arg = expr();
      if (!eat(')'))
        throw ParseError("expected ')'", at_);
      Fn f = name == "sin"    ? Fn::Sin
             : name == "cos"  ? Fn::Cos
             : name == "exp"  ? Fn::Exp
             : name == "tanh" ? Fn::Tanh
                              : Fn::Sech;
      return ex_fun(ch_, f, arg);
    }
    if (auto id = ch_.resolve(name))
      return ex_sym(*id);
    if (unknown_) {
      int id = unknown_(name);
      if (id >= 0)
        return ex_sym(id);
    }
    // diagnose the common jet-suffix mistake separately
    auto pos = name.rfind('_');
    if (pos != std::string::npos && pos > 0 && ch_.has(name.substr(0, pos)) &&
        ch_.symbol(ch_.id(name.substr(0, pos))).kind == SymbolKind::Field)
      throw ParseError("jet suffix '" + name.substr(pos + 1) +
                           "' does not name base coordinates",
                       start);
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  const Chart& ch_;
  const std::string& text_;
  UnknownHandler unknown_;
  size_t at_ = 0;
};

} // namespace

Expr parse_expr(const Chart& ch, const std::string& text, const UnknownHandler& on_unknown) {
  return Parser(ch, text, on_unknown).parse();
}

} // namespace routhft
