#include "routhft/symmetry.hpp"

namespace routhft {

namespace {

void check_base_only(const Chart& ch, const Expr& e, const char* what) {
  for (int s : symbols_of(e)) {
    auto k = ch.symbol(s).kind;
    if (k == SymbolKind::Field || k == SymbolKind::Jet)
      throw Error(std::string(what) + " must depend on base coordinates only, found " +
                  ch.symbol(s).name);
    if (k == SymbolKind::UFunc)
      for (int dep : ch.ufunc_decl(ch.symbol(s).ufunc).deps)
        if (ch.symbol(dep).kind != SymbolKind::BaseCoord)
          throw Error(std::string(what) + " depends on " + ch.symbol(s).name +
                      ", which is not a function of the base alone");
  }
}

Expr divergence(const Chart& ch, const std::vector<Expr>& comps) {
  Expr d = ex_int(0);
  for (int i = 0; i < ch.dim(); ++i)
    d = ex_add(ch, d, diff_partial(ch, comps[i], ch.base_id(i)));
  return d;
}

// Solve div = 0 for one linearly occurring ufunc-derivative symbol; returns
// the rule (symbol -> replacement) or throws.
std::pair<int, Expr> solve_closure(const Chart& ch, const Expr& div) {
  std::vector<Expr> terms = div->k == Nk::Add ? div->kids : std::vector<Expr>{div};
  for (const auto& t : terms) {
    // want a term c * s with s a bare ufunc-derivative symbol
    Expr rest = t;
    Rat c = 1;
    if (t->k == Nk::Mul && t->kids.size() == 2 && t->kids[0]->k == Nk::Num) {
      c = t->kids[0]->num;
      rest = t->kids[1];
    }
    if (rest->k != Nk::Sym)
      continue;
    const Symbol& s = ch.symbol(rest->sym);
    if (s.kind != SymbolKind::UFunc || s.dindex.empty())
      continue;
    // rule: s -> s - div/c
    Expr repl = ex_sub(ch, ex_sym(rest->sym), ex_div(ch, div, ex_num(c)));
    return {rest->sym, repl};
  }
  throw Error("momentum value is not closed: divergence " + to_string(ch, div));
}

} // namespace

MomentumValue zero_momentum(const Chart& ch, const CyclicAction& action) {
  MomentumValue mu;
  mu.components.assign(action.fields.size(), std::vector<Expr>(ch.dim(), ex_int(0)));
  return mu;
}

MomentumValue momentum_from_components(const Chart& ch, const CyclicAction& action,
                                       std::vector<std::vector<Expr>> components) {
  if (components.size() != action.fields.size())
    throw Error("momentum components arity mismatch");
  MomentumValue mu;
  mu.components = std::move(components);
  for (auto& comps : mu.components) {
    if (static_cast<int>(comps.size()) != ch.dim())
      throw Error("momentum components arity mismatch");
    for (const auto& c : comps)
      check_base_only(ch, c, "momentum component");
    Expr d = divergence(ch, comps);
    d = apply_closure(ch, mu, d);
    if (!ex_is_zero(d))
      mu.closure_rules.insert(solve_closure(ch, d));
  }
  return mu;
}

MomentumValue momentum_from_covector(const Chart& ch, const CyclicAction& action,
                                     const std::vector<std::vector<Expr>>& mu_cov) {
  if (ch.dim() != 2)
    throw Error("covector-basis momentum input requires a 2-dimensional base");
  std::vector<std::vector<Expr>> comps;
  for (const auto& cov : mu_cov) {
    // mu = cov[0] dx^1 + cov[1] dx^2, eta_1 = dx^2, eta_2 = -dx^1
    comps.push_back({cov[1], ex_neg(ch, cov[0])});
  }
  return momentum_from_components(ch, action, std::move(comps));
}

Expr apply_closure(const Chart& ch, const MomentumValue& mu, const Expr& e) {
  if (mu.closure_rules.empty())
    return e;
  Expr r = e;
  // rules may chain (a rule's replacement mentioning another rule's symbol)
  for (size_t pass = 0; pass < mu.closure_rules.size(); ++pass)
    r = substitute(ch, r, mu.closure_rules);
  return r;
}

InvarianceReport check_invariance(const FieldModel& model, const CyclicAction& action) {
  const Chart& ch = *model.chart;
  InvarianceReport rep;
  for (int a : action.fields) {
    int fa = ch.field_id(a);
    Expr dl = diff_partial(ch, model.lagrangian, fa);
    if (!ex_is_zero(dl)) {
      rep.ok = false;
      rep.diagnostic = "lagrangian depends on cyclic field " + ch.symbol(fa).name +
                       ": dL/d" + ch.symbol(fa).name + " = " + to_string(ch, dl);
      return rep;
    }
    auto check_force = [&](const Expr& f) {
      Expr df = diff_partial(ch, f, fa);
      if (!ex_is_zero(df)) {
        rep.ok = false;
        rep.diagnostic = "force coefficient depends on cyclic field " +
                         ch.symbol(fa).name + ": " + to_string(ch, f);
      }
    };
    for (const auto& f : model.force_a) {
      check_force(f);
      if (!rep.ok)
        return rep;
    }
    for (const auto& fj : model.force_j)
      for (const auto& row : fj)
        for (const auto& f : row) {
          check_force(f);
          if (!rep.ok)
            return rep;
        }
  }
  return rep;
}

std::vector<DifferentialForm> momentum_map(const FieldModel& model,
                                           const CyclicAction& action) {
  const Chart& ch = *model.chart;
  auto inv = check_invariance(model, action);
  if (!inv.ok)
    throw Error("momentum map requires an invariant model: " + inv.diagnostic);
  HorizontalBasis hb(ch);
  auto p = legendre_multipliers(model);
  std::vector<DifferentialForm> out;
  for (int a : action.fields) {
    DifferentialForm j(ch.dim() - 1);
    for (int i = 0; i < ch.dim(); ++i)
      j = form_add(ch, j, form_scale(ch, p[a][i], hb.eta_i[i]));
    out.push_back(std::move(j));
  }
  return out;
}

ClosednessReport check_momentum_closed(const Chart& ch, const MomentumValue& mu) {
  ClosednessReport rep;
  for (const auto& comps : mu.components) {
    Expr d = apply_closure(ch, mu, divergence(ch, comps));
    rep.divergences.push_back(d);
    if (!ex_is_zero(d))
      rep.ok = false;
  }
  return rep;
}

std::vector<std::vector<Expr>> momentum_constraint(const FieldModel& model,
                                                   const CyclicAction& action,
                                                   const MomentumValue& mu) {
  const Chart& ch = *model.chart;
  auto inv = check_invariance(model, action);
  if (!inv.ok)
    throw Error("momentum constraint requires an invariant model: " + inv.diagnostic);
  auto closed = check_momentum_closed(ch, mu);
  if (!closed.ok)
    throw Error("momentum value is not closed");
  auto p = legendre_multipliers(model);
  std::vector<std::vector<Expr>> eqs;
  for (size_t k = 0; k < action.fields.size(); ++k) {
    int a = action.fields[k];
    std::vector<Expr> row;
    for (int i = 0; i < ch.dim(); ++i)
      row.push_back(ex_sub(ch, p[a][i], mu.components[k][i]));
    eqs.push_back(std::move(row));
  }
  return eqs;
}

} // namespace routhft
