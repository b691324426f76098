// Randomized property suites for the symbolic kernel: canonical forms,
// derivations, the exterior algebra, and the variational/reduction
// invariants. Every suite runs >= 100 cases on a fixed seed.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "routhft/parser.hpp"
#include "routhft/routh.hpp"

#include "random_gen.hpp"

#include <cmath>
#include <random>

using namespace routhft;

namespace {

constexpr int kCases = 120;

using testgen::Rng;
using testgen::random_chart;
using testgen::random_expr;
using testgen::random_form;

// independent numeric interpreter over the expression grammar, sharing no
// code with the kernel parser or evaluator
struct TextEval {
  const std::string& s;
  const std::map<std::string, double>& env;
  size_t pos = 0;
  double parse() {
    double v = expr();
    if (pos != s.size()) throw std::runtime_error("trailing input");
    return v;
  }
  void ws() { while (pos < s.size() && s[pos] == ' ') ++pos; }
  double expr() {
    ws();
    double sign = 1;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-'))
      sign = s[pos++] == '-' ? -1 : 1;
    double v = sign * term();
    for (ws(); pos < s.size() && (s[pos] == '+' || s[pos] == '-'); ws()) {
      char op = s[pos++];
      double t = term();
      v = op == '+' ? v + t : v - t;
    }
    return v;
  }
  double term() {
    double v = factor();
    for (ws(); pos < s.size() && (s[pos] == '*' || s[pos] == '/'); ws()) {
      char op = s[pos++];
      double f = factor();
      v = op == '*' ? v * f : v / f;
    }
    return v;
  }
  double factor() {
    double v = base();
    ws();
    if (pos < s.size() && s[pos] == '^') {
      ++pos;
      ws();
      double sign = 1;
      if (pos < s.size() && s[pos] == '-') { sign = -1; ++pos; }
      std::string digits;
      while (pos < s.size() && isdigit((unsigned char)s[pos]))
        digits += s[pos++];
      v = std::pow(v, sign * std::stod(digits));
    }
    return v;
  }
  double base() {
    ws();
    if (s[pos] == '(') {
      ++pos;
      double v = expr();
      ws();
      if (s[pos] != ')') throw std::runtime_error("missing )");
      ++pos;
      return v;
    }
    if (isdigit((unsigned char)s[pos]) || s[pos] == '.') {
      size_t used = 0;
      double v = std::stod(s.substr(pos), &used);
      pos += used;
      return v;
    }
    std::string name;
    while (pos < s.size() && (isalnum((unsigned char)s[pos]) || s[pos] == '_'))
      name += s[pos++];
    ws();
    if (pos < s.size() && s[pos] == '(') {
      ++pos;
      double a = expr();
      ws();
      if (s[pos] != ')') throw std::runtime_error("missing )");
      ++pos;
      if (name == "sin") return std::sin(a);
      if (name == "cos") return std::cos(a);
      if (name == "exp") return std::exp(a);
      if (name == "tanh") return std::tanh(a);
      if (name == "sech") return 1.0 / std::cosh(a);
      throw std::runtime_error("unknown function " + name);
    }
    return env.at(name);
  }
};

} // namespace

TEST_CASE("canonicalization is idempotent and print/parse stable") {
  Rng rng(101);
  for (int k = 0; k < kCases; ++k) {
    auto rc = random_chart(rng);
    Expr e = random_expr(rng, *rc.ch, rc.pool1, 3);
    // re-canonicalizing through an identity rebuild changes nothing
    Expr again = rebuild(*rc.ch, e, [](int id) { return ex_sym(id); });
    CHECK(ex_equal(e, again));
    CHECK(ex_equal(e, parse_expr(*rc.ch, to_string(*rc.ch, e))));
  }
}

TEST_CASE("total derivatives commute (Clairaut)") {
  Rng rng(202);
  int checked = 0;
  while (checked < kCases) {
    auto rc = random_chart(rng);
    if (rc.ch->dim() < 2) continue;
    Expr e = random_expr(rng, *rc.ch, rc.pool0, 3);
    int i = rng.pick(0, rc.ch->dim() - 1), j = rng.pick(0, rc.ch->dim() - 1);
    Expr ij = total_derivative(*rc.ch, total_derivative(*rc.ch, e, i), j);
    Expr ji = total_derivative(*rc.ch, total_derivative(*rc.ch, e, j), i);
    CHECK(ex_equal(ij, ji));
    ++checked;
  }
}

TEST_CASE("derivations are linear and satisfy the Leibniz rule") {
  Rng rng(303);
  for (int k = 0; k < kCases; ++k) {
    auto rc = random_chart(rng);
    const Chart& ch = *rc.ch;
    Expr a = random_expr(rng, ch, rc.pool1, 2);
    Expr b = random_expr(rng, ch, rc.pool1, 2);
    int s = rc.pool1[rng.pick(0, (int)rc.pool1.size() - 1)];
    int i = rng.pick(0, ch.dim() - 1);
    Expr c = ex_rat(rng.pick(-3, 3), rng.pick(1, 3));

    // diff_partial
    CHECK(ex_equal(diff_partial(ch, ex_add(ch, ex_mul(ch, c, a), b), s),
                   ex_add(ch, ex_mul(ch, c, diff_partial(ch, a, s)),
                          diff_partial(ch, b, s))));
    CHECK(ex_equal(diff_partial(ch, ex_mul(ch, a, b), s),
                   ex_add(ch, ex_mul(ch, diff_partial(ch, a, s), b),
                          ex_mul(ch, a, diff_partial(ch, b, s)))));

    // total_derivative (jet-order-0 inputs keep the output within the cap)
    Expr a0 = random_expr(rng, ch, rc.pool0, 2);
    Expr b0 = random_expr(rng, ch, rc.pool0, 2);
    CHECK(ex_equal(total_derivative(ch, ex_add(ch, ex_mul(ch, c, a0), b0), i),
                   ex_add(ch, ex_mul(ch, c, total_derivative(ch, a0, i)),
                          total_derivative(ch, b0, i))));
    CHECK(ex_equal(total_derivative(ch, ex_mul(ch, a0, b0), i),
                   ex_add(ch, ex_mul(ch, total_derivative(ch, a0, i), b0),
                          ex_mul(ch, a0, total_derivative(ch, b0, i)))));
  }
}

TEST_CASE("evaluate agrees with an independent text interpreter") {
  Rng rng(404);
  int checked = 0;
  while (checked < kCases) {
    auto rc = random_chart(rng);
    const Chart& ch = *rc.ch;
    Expr e = random_expr(rng, ch, rc.pool1, 3);
    std::string text = to_string(ch, e);

    Assignment a(ch);
    std::map<std::string, double> env;
    for (int id = 0; id < ch.n_symbols(); ++id) {
      double v = rng.real(0.2, 1.7); // positive, away from poles
      a.assign(id, v);
      env[ch.symbol(id).name] = v;
    }
    double mine;
    try {
      mine = evaluate(ch, e, a);
    } catch (const Error&) {
      continue; // division by a canonical zero; regenerate
    }
    TextEval te{text, env};
    double theirs = te.parse();
    if (!std::isfinite(mine) || std::abs(mine) > 1e12) continue;
    CHECK(std::abs(mine - theirs) <= 1e-12 * std::max(1.0, std::abs(mine)));
    ++checked;
  }
}

TEST_CASE("d o d = 0 on random forms") {
  Rng rng(505);
  for (int k = 0; k < kCases; ++k) {
    auto rc = random_chart(rng);
    auto f = random_form(rng, *rc.ch, rc.pool1,
                         rng.pick(0, std::min(2, rc.ch->n_generators())));
    auto dd = exterior_derivative(*rc.ch,
                                  exterior_derivative(*rc.ch, f));
    CHECK(dd.is_zero());
  }
}

TEST_CASE("wedge is graded-commutative and associative") {
  Rng rng(606);
  for (int k = 0; k < kCases; ++k) {
    auto rc = random_chart(rng);
    const Chart& ch = *rc.ch;
    int top = ch.n_generators();
    int p = rng.pick(0, std::min(2, top));
    int q = rng.pick(0, std::min(2, top));
    int r = rng.pick(0, 1);
    auto A = random_form(rng, ch, rc.pool0, p);
    auto B = random_form(rng, ch, rc.pool0, q);
    auto C = random_form(rng, ch, rc.pool0, r);
    auto AB = wedge(ch, A, B);
    auto BA = wedge(ch, B, A);
    int sign = (p * q) % 2 == 0 ? 1 : -1;
    CHECK(form_equal(AB, form_scale(ch, ex_int(sign), BA)));
    CHECK(form_equal(wedge(ch, AB, C), wedge(ch, A, wedge(ch, B, C))));
  }
}

TEST_CASE("contraction is an antiderivation") {
  Rng rng(707);
  for (int k = 0; k < kCases; ++k) {
    auto rc = random_chart(rng);
    const Chart& ch = *rc.ch;
    int top = ch.n_generators();
    int p = rng.pick(0, std::min(2, top));
    int q = rng.pick(0, std::min(2, top));
    auto A = random_form(rng, ch, rc.pool0, p);
    auto B = random_form(rng, ch, rc.pool0, q);
    int v = rng.pick(0, top - 1);
    auto lhs = contract(ch, v, wedge(ch, A, B));
    int sign = p % 2 == 0 ? 1 : -1;
    auto rhs = form_add(
        ch, wedge(ch, contract(ch, v, A), B),
        form_scale(ch, ex_int(sign), wedge(ch, A, contract(ch, v, B))));
    CHECK(form_equal(lhs, rhs));
  }
}

TEST_CASE("adding a total divergence leaves the EL equations unchanged") {
  Rng rng(808);
  for (int k = 0; k < kCases; ++k) {
    auto rc = random_chart(rng);
    const Chart& ch = *rc.ch;
    // polynomial Lagrangian and jet-order-0 divergence potential
    Expr L = random_expr(rng, ch, rc.pool1, 2);
    Expr f = random_expr(rng, ch, rc.pool0, 2);
    if (max_jet_order(ch, L) > 1) continue;
    Expr Lplus = L;
    for (int i = 0; i < ch.dim(); ++i)
      Lplus = ex_add(ch, Lplus, total_derivative(ch, f, i));
    auto el = euler_lagrange(make_model(rc.ch, L));
    auto el2 = euler_lagrange(make_model(rc.ch, Lplus));
    for (int a = 0; a < ch.n_fields(); ++a)
      CHECK(ex_equal(el.residuals[a], el2.residuals[a]));
  }
}

TEST_CASE("the Routhian at zero momentum is the Lagrangian") {
  Rng rng(909);
  for (int k = 0; k < kCases; ++k) {
    auto rc = random_chart(rng);
    const Chart& ch = *rc.ch;
    CyclicAction action{{0}};
    // invariant Lagrangian: never uses the cyclic field symbol itself
    std::vector<int> pool;
    for (int id : rc.pool1)
      if (id != ch.field_id(0)) pool.push_back(id);
    Expr L = random_expr(rng, ch, pool, 2);
    if (max_jet_order(ch, L) > 1) continue;
    auto model = make_model(rc.ch, L);
    // random connection over base coords and non-cyclic fields
    std::vector<int> cpool;
    for (int i = 0; i < ch.dim(); ++i) cpool.push_back(ch.base_id(i));
    for (int a = 1; a < ch.n_fields(); ++a) cpool.push_back(ch.field_id(a));
    ConnectionData conn = flat_connection(ch, action);
    for (auto& e : conn.gamma_base[0]) e = random_expr(rng, ch, cpool, 2);
    for (auto& e : conn.gamma_field[0]) e = random_expr(rng, ch, cpool, 2);
    Expr R = routhian(model, action, conn, zero_momentum(ch, action));
    CHECK(ex_equal(R, L));
  }
}

TEST_CASE("a flat connection produces no gyroscopic force") {
  Rng rng(1010);
  auto ch = std::make_shared<Chart>(std::vector<std::string>{"t", "x"},
                                    std::vector<std::string>{"phi", "psi"});
  CyclicAction action{{0}};
  auto model = make_model(ch, parse_expr(*ch, "1/2*phi_t*phi_x + 1/2*psi^2"));
  auto conn = flat_connection(*ch, action);
  for (int k = 0; k < kCases; ++k) {
    // random closed momentum in the covector basis: a fresh opaque pair
    std::string a = "a" + std::to_string(k), b = "b" + std::to_string(k);
    ch->declare_ufunc(a, {"t", "x"});
    ch->declare_ufunc(b, {"t", "x"});
    Expr ca = ex_mul(*ch, ex_rat(rng.pick(-3, 3), rng.pick(1, 2)),
                     parse_expr(*ch, a));
    Expr cb = ex_mul(*ch, ex_rat(rng.pick(-3, 3), rng.pick(1, 2)),
                     parse_expr(*ch, b));
    auto mu = momentum_from_covector(*ch, action, {{ca, cb}});
    auto gyro = gyroscopic_force(model, action, conn, mu);
    CHECK(gyro.form.is_zero());
    for (const auto& e : gyro.f_b) CHECK(ex_is_zero(e));
    for (const auto& mat : gyro.f_j)
      for (const auto& row : mat)
        for (const auto& e : row) CHECK(ex_is_zero(e));
  }
}
