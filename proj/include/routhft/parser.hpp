#pragma once

#include "routhft/expr.hpp"

#include <functional>
#include <string>

namespace routhft {

struct ParseError : Error {
  ParseError(const std::string& msg, size_t pos)
      : Error(msg + " at position " + std::to_string(pos)), position(pos) {}
  size_t position;
};

// Called for identifiers the chart cannot resolve; may declare a new symbol
// and return its id, or -1 to signal an unknown-identifier error.
using UnknownHandler = std::function<int(const std::string&)>;

// Grammar:
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' ['-'] digits)?
//   base   := number | ident | func '(' expr ')' | '(' expr ')'
// Numbers are integer or decimal literals, read as exact rationals.
Expr parse_expr(const Chart& ch, const std::string& text,
                const UnknownHandler& on_unknown = {});

} // namespace routhft
