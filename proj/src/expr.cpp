#include "routhft/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace routhft {

namespace {

Expr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

const Expr& zero() {
  static Expr z = [] {
    ExprNode n;
    n.k = Nk::Num;
    n.num = 0;
    n.numd = 0.0;
    return make(std::move(n));
  }();
  return z;
}

const Expr& one() {
  static Expr o = [] {
    ExprNode n;
    n.k = Nk::Num;
    n.num = 1;
    n.numd = 1.0;
    return make(std::move(n));
  }();
  return o;
}

int fn_rank(Fn f) { return static_cast<int>(f); }

// raw constructors: assume the pieces already satisfy canonical invariants
Expr raw_pow(Expr base, int expo) {
  ExprNode n;
  n.k = Nk::Pow;
  n.base = std::move(base);
  n.expo = expo;
  return make(std::move(n));
}

Expr raw_mul(std::vector<Expr> kids) {
  if (kids.empty())
    return one();
  if (kids.size() == 1)
    return kids[0];
  ExprNode n;
  n.k = Nk::Mul;
  n.kids = std::move(kids);
  return make(std::move(n));
}

Expr raw_add(std::vector<Expr> kids) {
  if (kids.empty())
    return zero();
  if (kids.size() == 1)
    return kids[0];
  ExprNode n;
  n.k = Nk::Add;
  n.kids = std::move(kids);
  return make(std::move(n));
}

// term = coeff * rest, with rest free of numeric factor (rest may be one())
std::pair<Rat, Expr> split_term(const Expr& e) {
  if (e->k == Nk::Num)
    return {e->num, one()};
  if (e->k == Nk::Mul && e->kids[0]->k == Nk::Num) {
    std::vector<Expr> rest(e->kids.begin() + 1, e->kids.end());
    return {e->kids[0]->num, raw_mul(std::move(rest))};
  }
  return {Rat(1), e};
}

Expr join_term(const Rat& c, const Expr& rest) {
  if (c == 0)
    return zero();
  if (rest->k == Nk::Num) // rest is one()
    return ex_num(c);
  if (c == 1)
    return rest;
  std::vector<Expr> kids{ex_num(c)};
  if (rest->k == Nk::Mul)
    kids.insert(kids.end(), rest->kids.begin(), rest->kids.end());
  else
    kids.push_back(rest);
  return raw_mul(std::move(kids));
}

} // namespace

Expr ex_num(const Rat& r) {
  if (r == 0)
    return zero();
  if (r == 1)
    return one();
  ExprNode n;
  n.k = Nk::Num;
  n.num = r;
  n.numd = r.convert_to<double>();
  return make(std::move(n));
}

Expr ex_int(long long n) { return ex_num(Rat(n)); }
Expr ex_rat(long long num, long long den) { return ex_num(Rat(num) / den); }

Expr ex_sym(int id) {
  ExprNode n;
  n.k = Nk::Sym;
  n.sym = id;
  return make(std::move(n));
}

bool ex_is_zero(const Expr& e) { return e->k == Nk::Num && e->num == 0; }
bool ex_is_one(const Expr& e) { return e->k == Nk::Num && e->num == 1; }

int ex_cmp(const Chart& ch, const Expr& a, const Expr& b) {
  if (a.get() == b.get())
    return 0;
  int ka = static_cast<int>(a->k), kb = static_cast<int>(b->k);
  if (ka != kb)
    return ka < kb ? -1 : 1;
  switch (a->k) {
  case Nk::Num:
    return a->num < b->num ? -1 : (a->num > b->num ? 1 : 0);
  case Nk::Sym:
    return ch.sym_cmp(a->sym, b->sym);
  case Nk::Fun: {
    int ra = fn_rank(a->fn), rb = fn_rank(b->fn);
    if (ra != rb)
      return ra < rb ? -1 : 1;
    return ex_cmp(ch, a->arg, b->arg);
  }
  case Nk::Pow: {
    int c = ex_cmp(ch, a->base, b->base);
    if (c != 0)
      return c;
    return a->expo < b->expo ? -1 : (a->expo > b->expo ? 1 : 0);
  }
  case Nk::Mul:
  case Nk::Add: {
    size_t n = std::min(a->kids.size(), b->kids.size());
    for (size_t i = 0; i < n; ++i) {
      int c = ex_cmp(ch, a->kids[i], b->kids[i]);
      if (c != 0)
        return c;
    }
    if (a->kids.size() != b->kids.size())
      return a->kids.size() < b->kids.size() ? -1 : 1;
    return 0;
  }
  }
  return 0;
}

bool ex_equal(const Expr& a, const Expr& b) {
  if (a.get() == b.get())
    return true;
  if (a->k != b->k)
    return false;
  switch (a->k) {
  case Nk::Num:
    return a->num == b->num;
  case Nk::Sym:
    return a->sym == b->sym;
  case Nk::Fun:
    return a->fn == b->fn && ex_equal(a->arg, b->arg);
  case Nk::Pow:
    return a->expo == b->expo && ex_equal(a->base, b->base);
  case Nk::Mul:
  case Nk::Add: {
    if (a->kids.size() != b->kids.size())
      return false;
    for (size_t i = 0; i < a->kids.size(); ++i)
      if (!ex_equal(a->kids[i], b->kids[i]))
        return false;
    return true;
  }
  }
  return false;
}

Expr ex_add(const Chart& ch, std::vector<Expr> terms) {
  struct Cmp {
    const Chart* ch;
    bool operator()(const Expr& a, const Expr& b) const { return ex_cmp(*ch, a, b) < 0; }
  };
  std::map<Expr, Rat, Cmp> acc{Cmp{&ch}};
  std::function<void(const Expr&)> push = [&](const Expr& t) {
    if (t->k == Nk::Add) {
      for (const auto& k : t->kids)
        push(k);
      return;
    }
    auto [c, rest] = split_term(t);
    if (c == 0)
      return;
    acc[rest] += c;
  };
  for (const auto& t : terms)
    push(t);
  std::vector<Expr> out;
  for (const auto& [rest, c] : acc)
    if (c != 0)
      out.push_back(join_term(c, rest));
  return raw_add(std::move(out));
}

Expr ex_add(const Chart& ch, const Expr& a, const Expr& b) { return ex_add(ch, {a, b}); }

Expr ex_mul(const Chart& ch, std::vector<Expr> factors) {
  Rat coeff = 1;
  std::vector<Expr> adds;
  std::vector<std::pair<Expr, int>> pairs; // (base, exponent)
  std::function<void(const Expr&, int)> push = [&](const Expr& f, int rep) {
    switch (f->k) {
    case Nk::Num: {
      Rat v = f->num;
      for (int r = 1; r < rep; ++r)
        v *= f->num;
      if (rep < 0) {
        if (f->num == 0)
          throw Error("division by zero");
        v = 1;
        for (int r = 0; r < -rep; ++r)
          v /= f->num;
      }
      coeff *= v;
      return;
    }
    case Nk::Mul:
      for (const auto& k : f->kids)
        push(k, rep);
      return;
    case Nk::Pow:
      push(f->base, f->expo * rep);
      return;
    case Nk::Add:
      if (rep == 1) {
        adds.push_back(f);
      } else if (rep > 1) {
        for (int r = 0; r < rep; ++r)
          adds.push_back(f);
      } else {
        pairs.emplace_back(f, rep);
      }
      return;
    default:
      pairs.emplace_back(f, rep);
      return;
    }
  };
  for (const auto& f : factors)
    push(f, 1);
  if (coeff == 0)
    return zero();
  // collect equal bases
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    return ex_cmp(ch, a.first, b.first) < 0;
  });
  std::vector<std::pair<Expr, int>> merged;
  for (auto& p : pairs) {
    if (!merged.empty() && ex_cmp(ch, merged.back().first, p.first) == 0)
      merged.back().second += p.second;
    else
      merged.push_back(p);
  }
  std::vector<Expr> atoms;
  for (auto& [base, e] : merged) {
    if (e == 0)
      continue;
    // tanh^k, k >= 2: substitute tanh^2 = 1 - sech^2
    if (e >= 2 && base->k == Nk::Fun && base->fn == Fn::Tanh) {
      Expr s2 = ex_pow(ch, ex_fun(ch, Fn::Sech, base->arg), 2);
      Expr id = ex_sub(ch, one(), s2); // 1 - sech^2
      Expr fac = ex_pow(ch, id, e / 2);
      if (fac->k == Nk::Add)
        adds.push_back(fac);
      else
        atoms.push_back(fac);
      if (e % 2)
        atoms.push_back(base);
      continue;
    }
    atoms.push_back(e == 1 ? base : raw_pow(base, e));
  }
  std::sort(atoms.begin(), atoms.end(),
            [&](const Expr& a, const Expr& b) { return ex_cmp(ch, a, b) < 0; });
  std::vector<Expr> kids;
  if (coeff != 1 || atoms.empty())
    kids.push_back(ex_num(coeff));
  kids.insert(kids.end(), atoms.begin(), atoms.end());
  Expr prod = raw_mul(std::move(kids));
  if (adds.empty())
    return prod;
  // distribute over the collected sums
  std::vector<Expr> terms{prod};
  for (const auto& s : adds) {
    std::vector<Expr> next;
    const std::vector<Expr> sterm =
        s->k == Nk::Add ? s->kids : std::vector<Expr>{s};
    for (const auto& t : terms)
      for (const auto& u : sterm)
        next.push_back(ex_mul(ch, {t, u}));
    terms = std::move(next);
  }
  return ex_add(ch, std::move(terms));
}

Expr ex_mul(const Chart& ch, const Expr& a, const Expr& b) { return ex_mul(ch, {a, b}); }

Expr ex_pow(const Chart& ch, const Expr& base, int expo) {
  if (expo == 0)
    return one();
  if (expo == 1)
    return base;
  switch (base->k) {
  case Nk::Num: {
    if (base->num == 0) {
      if (expo < 0)
        throw Error("division by zero");
      return zero();
    }
    Rat v = 1;
    for (int r = 0; r < std::abs(expo); ++r)
      v *= base->num;
    if (expo < 0)
      v = Rat(1) / v;
    return ex_num(v);
  }
  case Nk::Mul: {
    std::vector<Expr> ps;
    for (const auto& k : base->kids)
      ps.push_back(ex_pow(ch, k, expo));
    return ex_mul(ch, std::move(ps));
  }
  case Nk::Pow:
    return ex_pow(ch, base->base, base->expo * expo);
  case Nk::Add: {
    if (expo > 0) {
      Expr r = base;
      for (int i = 1; i < expo; ++i)
        r = ex_mul(ch, r, base);
      return r;
    }
    return raw_pow(base, expo);
  }
  case Nk::Fun:
    if (base->fn == Fn::Tanh && expo >= 2) {
      Expr s2 = ex_pow(ch, ex_fun(ch, Fn::Sech, base->arg), 2);
      Expr id = ex_sub(ch, one(), s2);
      Expr r = ex_pow(ch, id, expo / 2);
      if (expo % 2)
        r = ex_mul(ch, r, base);
      return r;
    }
    return raw_pow(base, expo);
  default:
    return raw_pow(base, expo);
  }
}

Expr ex_fun(const Chart& ch, Fn fn, const Expr& arg) {
  (void)ch;
  if (arg->k == Nk::Num && arg->num == 0) {
    switch (fn) {
    case Fn::Sin:
    case Fn::Tanh:
      return zero();
    case Fn::Cos:
    case Fn::Exp:
    case Fn::Sech:
      return one();
    }
  }
  ExprNode n;
  n.k = Nk::Fun;
  n.fn = fn;
  n.arg = arg;
  return make(std::move(n));
}

Expr ex_neg(const Chart& ch, const Expr& a) { return ex_mul(ch, ex_int(-1), a); }
Expr ex_sub(const Chart& ch, const Expr& a, const Expr& b) {
  return ex_add(ch, a, ex_neg(ch, b));
}
Expr ex_div(const Chart& ch, const Expr& a, const Expr& b) {
  if (b->k == Nk::Num) {
    if (b->num == 0)
      throw Error("division by zero");
    return ex_mul(ch, a, ex_num(Rat(1) / b->num));
  }
  return ex_mul(ch, a, ex_pow(ch, b, -1));
}

Expr diff_partial(const Chart& ch, const Expr& e, int sym) {
  switch (e->k) {
  case Nk::Num:
    return zero();
  case Nk::Sym: {
    if (e->sym == sym)
      return one();
    const Symbol& s = ch.symbol(e->sym);
    if (s.kind == SymbolKind::UFunc) {
      const auto& deps = ch.ufunc_decl(s.ufunc).deps;
      for (size_t slot = 0; slot < deps.size(); ++slot)
        if (deps[slot] == sym)
          return ex_sym(ch.ufunc_deriv(e->sym, static_cast<int>(slot)));
    }
    return zero();
  }
  case Nk::Add: {
    std::vector<Expr> ds;
    for (const auto& k : e->kids)
      ds.push_back(diff_partial(ch, k, sym));
    return ex_add(ch, std::move(ds));
  }
  case Nk::Mul: {
    std::vector<Expr> terms;
    for (size_t i = 0; i < e->kids.size(); ++i) {
      Expr di = diff_partial(ch, e->kids[i], sym);
      if (ex_is_zero(di))
        continue;
      std::vector<Expr> fs;
      for (size_t j = 0; j < e->kids.size(); ++j)
        fs.push_back(i == j ? di : e->kids[j]);
      terms.push_back(ex_mul(ch, std::move(fs)));
    }
    return ex_add(ch, std::move(terms));
  }
  case Nk::Pow: {
    Expr db = diff_partial(ch, e->base, sym);
    if (ex_is_zero(db))
      return zero();
    return ex_mul(ch, {ex_int(e->expo), ex_pow(ch, e->base, e->expo - 1), db});
  }
  case Nk::Fun: {
    Expr da = diff_partial(ch, e->arg, sym);
    if (ex_is_zero(da))
      return zero();
    Expr d;
    switch (e->fn) {
    case Fn::Sin:
      d = ex_fun(ch, Fn::Cos, e->arg);
      break;
    case Fn::Cos:
      d = ex_neg(ch, ex_fun(ch, Fn::Sin, e->arg));
      break;
    case Fn::Exp:
      d = ex_fun(ch, Fn::Exp, e->arg);
      break;
    case Fn::Tanh:
      d = ex_pow(ch, ex_fun(ch, Fn::Sech, e->arg), 2);
      break;
    case Fn::Sech:
      d = ex_neg(ch, ex_mul(ch, ex_fun(ch, Fn::Sech, e->arg),
                            ex_fun(ch, Fn::Tanh, e->arg)));
      break;
    }
    return ex_mul(ch, d, da);
  }
  }
  return zero();
}

namespace {

void collect_symbols(const Expr& e, std::set<int>& out) {
  switch (e->k) {
  case Nk::Sym:
    out.insert(e->sym);
    return;
  case Nk::Add:
  case Nk::Mul:
    for (const auto& k : e->kids)
      collect_symbols(k, out);
    return;
  case Nk::Pow:
    collect_symbols(e->base, out);
    return;
  case Nk::Fun:
    collect_symbols(e->arg, out);
    return;
  default:
    return;
  }
}

// D_i of a single chart symbol along prolonged sections
Expr symbol_total_derivative(const Chart& ch, int sym, int i) {
  const Symbol& s = ch.symbol(sym);
  switch (s.kind) {
  case SymbolKind::BaseCoord:
    return ex_num(Rat(sym == ch.base_id(i) ? 1 : 0));
  case SymbolKind::Field: {
    for (int a = 0; a < ch.n_fields(); ++a)
      if (ch.field_id(a) == sym)
        return ex_sym(ch.jet_id(a, {i}));
    throw Error("bad field symbol");
  }
  case SymbolKind::Jet: {
    if (static_cast<int>(s.index.size()) >= kMaxJetOrder)
      throw Error("total derivative overflows jet order for " + s.name);
    auto idx = s.index;
    idx.push_back(i);
    std::sort(idx.begin(), idx.end());
    return ex_sym(ch.jet_id(s.field, idx));
  }
  case SymbolKind::Parameter:
    return zero();
  case SymbolKind::UFunc: {
    if (static_cast<int>(s.dindex.size()) >= kMaxJetOrder)
      throw Error("total derivative overflows derivative order for " + s.name);
    const auto& deps = ch.ufunc_decl(s.ufunc).deps;
    Expr acc = zero();
    for (size_t slot = 0; slot < deps.size(); ++slot) {
      Expr step = symbol_total_derivative(ch, deps[slot], i);
      if (ex_is_zero(step))
        continue;
      Expr dsym = ex_sym(ch.ufunc_deriv(sym, static_cast<int>(slot)));
      acc = ex_add(ch, acc, ex_mul(ch, dsym, step));
    }
    return acc;
  }
  }
  return zero();
}

} // namespace

Expr total_derivative(const Chart& ch, const Expr& e, int i) {
  std::set<int> syms;
  collect_symbols(e, syms);
  Expr acc = zero();
  for (int s : syms) {
    Expr de = diff_partial(ch, e, s);
    if (ex_is_zero(de))
      continue;
    Expr ds = symbol_total_derivative(ch, s, i);
    if (ex_is_zero(ds))
      continue;
    acc = ex_add(ch, acc, ex_mul(ch, de, ds));
  }
  return acc;
}

double evaluate(const Chart& ch, const Expr& e, const Assignment& a) {
  switch (e->k) {
  case Nk::Num:
    return e->numd;
  case Nk::Sym:
    if (!a.set[e->sym])
      throw Error("missing assignment for symbol " + ch.symbol(e->sym).name);
    return a.value[e->sym];
  case Nk::Add: {
    double s = 0;
    for (const auto& k : e->kids)
      s += evaluate(ch, k, a);
    return s;
  }
  case Nk::Mul: {
    double p = 1;
    for (const auto& k : e->kids)
      p *= evaluate(ch, k, a);
    return p;
  }
  case Nk::Pow: {
    double b = evaluate(ch, e->base, a);
    if (b == 0.0 && e->expo < 0)
      throw Error("division by zero in evaluate");
    return std::pow(b, e->expo);
  }
  case Nk::Fun: {
    double x = evaluate(ch, e->arg, a);
    switch (e->fn) {
    case Fn::Sin:
      return std::sin(x);
    case Fn::Cos:
      return std::cos(x);
    case Fn::Exp:
      return std::exp(x);
    case Fn::Tanh:
      return std::tanh(x);
    case Fn::Sech:
      return 1.0 / std::cosh(x);
    }
  }
  }
  return 0;
}

std::set<int> symbols_of(const Expr& e) {
  std::set<int> s;
  collect_symbols(e, s);
  return s;
}

bool contains_symbol(const Expr& e, int id) { return symbols_of(e).count(id) != 0; }

int max_jet_order(const Chart& ch, const Expr& e) {
  int m = 0;
  for (int s : symbols_of(e)) {
    const Symbol& sym = ch.symbol(s);
    if (sym.kind == SymbolKind::Jet)
      m = std::max(m, static_cast<int>(sym.index.size()));
  }
  return m;
}

Expr rebuild(const Chart& target, const Expr& e, const std::function<Expr(int)>& symmap) {
  switch (e->k) {
  case Nk::Num:
    return e;
  case Nk::Sym:
    return symmap(e->sym);
  case Nk::Add: {
    std::vector<Expr> ks;
    for (const auto& k : e->kids)
      ks.push_back(rebuild(target, k, symmap));
    return ex_add(target, std::move(ks));
  }
  case Nk::Mul: {
    std::vector<Expr> ks;
    for (const auto& k : e->kids)
      ks.push_back(rebuild(target, k, symmap));
    return ex_mul(target, std::move(ks));
  }
  case Nk::Pow:
    return ex_pow(target, rebuild(target, e->base, symmap), e->expo);
  case Nk::Fun:
    return ex_fun(target, e->fn, rebuild(target, e->arg, symmap));
  }
  return e;
}

Expr substitute(const Chart& target, const Expr& e, const std::map<int, Expr>& m) {
  return rebuild(target, e, [&](int id) -> Expr {
    auto it = m.find(id);
    return it == m.end() ? ex_sym(id) : it->second;
  });
}

Expr substitute_prolonged(const Chart& ch, const Expr& e, const std::map<int, Expr>& m) {
  return rebuild(ch, e, [&](int id) -> Expr {
    auto it = m.find(id);
    if (it != m.end())
      return it->second;
    const Symbol& s = ch.symbol(id);
    if (s.kind == SymbolKind::Jet) {
      auto fit = m.find(ch.field_id(s.field));
      if (fit != m.end()) {
        Expr r = fit->second;
        for (int i : s.index)
          r = total_derivative(ch, r, i);
        return r;
      }
    } else if (s.kind == SymbolKind::UFunc && !s.dindex.empty()) {
      auto fit = m.find(ch.ufunc_decl(s.ufunc).sym);
      if (fit != m.end()) {
        const auto& deps = ch.ufunc_decl(s.ufunc).deps;
        Expr r = fit->second;
        for (int slot : s.dindex) {
          const Symbol& dep = ch.symbol(deps[slot]);
          if (dep.kind != SymbolKind::BaseCoord)
            throw Error("prolonged substitution of " + s.name +
                        " requires base-coordinate dependencies");
          int i = 0;
          while (ch.base_id(i) != deps[slot])
            ++i;
          r = total_derivative(ch, r, i);
        }
        return r;
      }
    }
    return ex_sym(id);
  });
}

namespace {

const char* fn_name(Fn f) {
  switch (f) {
  case Fn::Sin:
    return "sin";
  case Fn::Cos:
    return "cos";
  case Fn::Exp:
    return "exp";
  case Fn::Tanh:
    return "tanh";
  case Fn::Sech:
    return "sech";
  }
  return "?";
}

std::string rat_str(const Rat& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

void print(const Chart& ch, const Expr& e, std::string& out);

void print_factor(const Chart& ch, const Expr& e, std::string& out) {
  if (e->k == Nk::Add || (e->k == Nk::Num && e->num < 0)) {
    out += '(';
    print(ch, e, out);
    out += ')';
  } else {
    print(ch, e, out);
  }
}

// prints a term without its sign; c is the |coefficient|
void print_term(const Chart& ch, const Rat& c, const Expr& rest, std::string& out) {
  if (rest->k == Nk::Num) {
    out += rat_str(c);
    return;
  }
  bool need_star = false;
  if (c != 1) {
    out += rat_str(c);
    need_star = true;
  }
  std::vector<Expr> fs = rest->k == Nk::Mul ? rest->kids : std::vector<Expr>{rest};
  for (const auto& f : fs) {
    if (need_star)
      out += '*';
    print_factor(ch, f, out);
    need_star = true;
  }
}

void print(const Chart& ch, const Expr& e, std::string& out) {
  switch (e->k) {
  case Nk::Num:
    out += rat_str(e->num);
    return;
  case Nk::Sym:
    out += ch.symbol(e->sym).name;
    return;
  case Nk::Fun:
    out += fn_name(e->fn);
    out += '(';
    print(ch, e->arg, out);
    out += ')';
    return;
  case Nk::Pow:
    print_factor(ch, e->base, out);
    out += '^';
    out += std::to_string(e->expo);
    return;
  case Nk::Mul: {
    auto [c, rest] = split_term(e);
    if (c < 0) {
      out += '-';
      print_term(ch, -c, rest, out);
    } else {
      print_term(ch, c, rest, out);
    }
    return;
  }
  case Nk::Add: {
    bool first = true;
    for (const auto& t : e->kids) {
      auto [c, rest] = split_term(t);
      if (first) {
        if (c < 0) {
          out += '-';
          print_term(ch, -c, rest, out);
        } else {
          print_term(ch, c, rest, out);
        }
        first = false;
      } else {
        out += c < 0 ? " - " : " + ";
        print_term(ch, c < 0 ? Rat(-c) : c, rest, out);
      }
    }
    return;
  }
  }
}

} // namespace

std::string to_string(const Chart& ch, const Expr& e) {
  std::string s;
  print(ch, e, s);
  return s;
}

} // namespace routhft
