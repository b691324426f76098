// Shared random generators for the property suites and the acceptance gate.
#pragma once

#include "routhft/forms.hpp"

#include <algorithm>
#include <memory>
#include <random>

namespace routhft::testgen {

struct Rng {
  std::mt19937 gen;
  explicit Rng(unsigned seed) : gen(seed) {}
  int pick(int lo, int hi) { // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(gen);
  }
  double real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
};

// random canonical expression over the given symbol pool
inline Expr random_expr(Rng& rng, const Chart& ch, const std::vector<int>& pool,
                        int depth, bool polynomial = false) {
  if (depth == 0 || rng.pick(0, 5) == 0) {
    if (rng.pick(0, 2) == 0)
      return ex_rat(rng.pick(-4, 4), rng.pick(1, 4));
    return ex_sym(pool[rng.pick(0, (int)pool.size() - 1)]);
  }
  switch (rng.pick(0, polynomial ? 2 : 3)) {
    case 0: {
      std::vector<Expr> kids;
      for (int i = rng.pick(2, 3); i-- > 0;)
        kids.push_back(random_expr(rng, ch, pool, depth - 1, polynomial));
      return ex_add(ch, std::move(kids));
    }
    case 1: {
      std::vector<Expr> kids;
      for (int i = rng.pick(2, 3); i-- > 0;)
        kids.push_back(random_expr(rng, ch, pool, depth - 1, polynomial));
      return ex_mul(ch, std::move(kids));
    }
    case 2:
      return ex_pow(ch, random_expr(rng, ch, pool, depth - 1, polynomial),
                    rng.pick(2, 3));
    default: {
      Fn fns[] = {Fn::Sin, Fn::Cos, Fn::Exp, Fn::Tanh, Fn::Sech};
      return ex_fun(ch, fns[rng.pick(0, 4)],
                    random_expr(rng, ch, pool, depth - 1, polynomial));
    }
  }
}

struct RandomChart {
  std::shared_ptr<Chart> ch;
  std::vector<int> pool0; // jet order 0: coords and fields
  std::vector<int> pool1; // plus first jets
};

inline RandomChart random_chart(Rng& rng) {
  static const std::vector<std::string> coord_names = {"t", "x", "y"};
  static const std::vector<std::string> field_names = {"u", "v", "w"};
  int m = rng.pick(1, 3), n = rng.pick(1, 3);
  RandomChart rc;
  rc.ch = std::make_shared<Chart>(
      std::vector<std::string>(coord_names.begin(), coord_names.begin() + m),
      std::vector<std::string>(field_names.begin(), field_names.begin() + n));
  for (int i = 0; i < m; ++i) rc.pool0.push_back(rc.ch->base_id(i));
  for (int a = 0; a < n; ++a) rc.pool0.push_back(rc.ch->field_id(a));
  rc.pool1 = rc.pool0;
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < m; ++i) rc.pool1.push_back(rc.ch->jet_id(a, {i}));
  return rc;
}

inline DifferentialForm random_form(Rng& rng, const Chart& ch,
                                    const std::vector<int>& pool, int degree) {
  DifferentialForm f(degree);
  int terms = rng.pick(1, 3);
  for (int k = 0; k < terms; ++k) {
    std::vector<int> gens;
    while ((int)gens.size() < degree) {
      int g = rng.pick(0, ch.n_generators() - 1);
      if (std::find(gens.begin(), gens.end(), g) == gens.end())
        gens.push_back(g);
    }
    f.add_term(ch, gens, random_expr(rng, ch, pool, 2));
  }
  return f;
}

} // namespace routhft::testgen
