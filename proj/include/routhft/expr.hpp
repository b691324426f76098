#pragma once

#include "routhft/chart.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace routhft {

using Rat = boost::multiprecision::cpp_rational;

enum class Fn { Sin, Cos, Exp, Tanh, Sech };

enum class Nk { Num, Sym, Add, Mul, Pow, Fun };

struct ExprNode;
// Immutable, canonical expression tree. Canonical invariants:
// sums/products flattened and sorted, like terms collected, rational
// constants folded, integer powers of sums expanded, tanh^2 rewritten
// to 1 - sech^2 so soliton identities close symbolically.
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  Nk k;
  Rat num;                // Num
  double numd = 0;        // Num: cached double value for evaluation
  int sym = -1;           // Sym
  std::vector<Expr> kids; // Add, Mul
  Expr base;              // Pow
  int expo = 0;           // Pow
  Fn fn{};                // Fun
  Expr arg;               // Fun
};

Expr ex_num(const Rat& r);
Expr ex_int(long long n);
Expr ex_rat(long long num, long long den);
Expr ex_sym(int id);
Expr ex_add(const Chart& ch, std::vector<Expr> terms);
Expr ex_add(const Chart& ch, const Expr& a, const Expr& b);
Expr ex_mul(const Chart& ch, std::vector<Expr> factors);
Expr ex_mul(const Chart& ch, const Expr& a, const Expr& b);
Expr ex_pow(const Chart& ch, const Expr& base, int expo);
Expr ex_fun(const Chart& ch, Fn fn, const Expr& arg);
Expr ex_neg(const Chart& ch, const Expr& a);
Expr ex_sub(const Chart& ch, const Expr& a, const Expr& b);
Expr ex_div(const Chart& ch, const Expr& a, const Expr& b);

bool ex_is_zero(const Expr& e);
bool ex_is_one(const Expr& e);
bool ex_equal(const Expr& a, const Expr& b);
int ex_cmp(const Chart& ch, const Expr& a, const Expr& b);

// partial derivative treating chart symbols as independent, except that a
// ufunc symbol differentiates to its derivative symbol along a dependency
Expr diff_partial(const Chart& ch, const Expr& e, int sym);

// total derivative along base coordinate i, chaining through fields, jets
// and ufuncs; throws on jet/derivative order overflow
Expr total_derivative(const Chart& ch, const Expr& e, int i);

struct Assignment {
  std::vector<double> value;
  std::vector<bool> set;
  explicit Assignment(const Chart& ch)
      : value(ch.n_symbols(), 0.0), set(ch.n_symbols(), false) {}
  void assign(int id, double v) {
    value[id] = v;
    set[id] = true;
  }
};

double evaluate(const Chart& ch, const Expr& e, const Assignment& a);

std::set<int> symbols_of(const Expr& e);
bool contains_symbol(const Expr& e, int id);
int max_jet_order(const Chart& ch, const Expr& e); // 0 if no jets

// rebuild through a symbol map (identity for unmapped ids); also used to
// transfer an expression into another chart
Expr substitute(const Chart& target, const Expr& e, const std::map<int, Expr>& m);
Expr rebuild(const Chart& target, const Expr& e, const std::function<Expr(int)>& symmap);

// substitute a field (or a base-coordinate ufunc) by an expression,
// prolonging through its jet / derivative symbols with total derivatives
Expr substitute_prolonged(const Chart& ch, const Expr& e, const std::map<int, Expr>& m);

std::string to_string(const Chart& ch, const Expr& e);

} // namespace routhft
