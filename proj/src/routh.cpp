#include "routhft/routh.hpp"

#include <algorithm>

namespace routhft {

namespace {

std::vector<int> noncyclic_fields(const Chart& ch, const CyclicAction& action) {
  std::vector<int> out;
  for (int a = 0; a < ch.n_fields(); ++a)
    if (std::find(action.fields.begin(), action.fields.end(), a) == action.fields.end())
      out.push_back(a);
  return out;
}

void check_connection_entry(const Chart& ch, const CyclicAction& action, const Expr& e) {
  for (int s : symbols_of(e)) {
    const Symbol& sym = ch.symbol(s);
    if (sym.kind == SymbolKind::Jet)
      throw Error("connection coefficient depends on jet coordinate " + sym.name);
    if (sym.kind == SymbolKind::Field)
      for (int a : action.fields)
        if (ch.field_id(a) == s)
          throw Error("connection coefficient depends on cyclic field " + sym.name);
    if (sym.kind == SymbolKind::UFunc)
      for (int dep : ch.ufunc_decl(sym.ufunc).deps)
        for (int a : action.fields)
          if (ch.field_id(a) == dep)
            throw Error("connection coefficient " + sym.name +
                        " depends on cyclic field " + ch.symbol(dep).name);
  }
}

// omega^a as a 1-form on the unreduced chart
DifferentialForm connection_form(const Chart& ch, const CyclicAction& action,
                                 const ConnectionData& conn, int k,
                                 const std::vector<int>& noncyc) {
  DifferentialForm w(1);
  w.add_term(ch, {ch.symbol_gen(ch.field_id(action.fields[k]))}, ex_int(1));
  for (int i = 0; i < ch.dim(); ++i)
    w.add_term(ch, {ch.symbol_gen(ch.base_id(i))}, ex_neg(ch, conn.gamma_base[k][i]));
  for (size_t b = 0; b < noncyc.size(); ++b)
    w.add_term(ch, {ch.symbol_gen(ch.field_id(noncyc[b]))},
               ex_neg(ch, conn.gamma_field[k][b]));
  return w;
}

} // namespace

ConnectionData flat_connection(const Chart& ch, const CyclicAction& action) {
  ConnectionData c;
  size_t nc = noncyclic_fields(ch, action).size();
  c.gamma_base.assign(action.fields.size(), std::vector<Expr>(ch.dim(), ex_int(0)));
  c.gamma_field.assign(action.fields.size(), std::vector<Expr>(nc, ex_int(0)));
  return c;
}

void validate_connection(const Chart& ch, const CyclicAction& action,
                         const ConnectionData& conn) {
  size_t nc = noncyclic_fields(ch, action).size();
  if (conn.gamma_base.size() != action.fields.size() ||
      conn.gamma_field.size() != action.fields.size())
    throw Error("connection data arity mismatch");
  for (size_t k = 0; k < action.fields.size(); ++k) {
    if (static_cast<int>(conn.gamma_base[k].size()) != ch.dim() ||
        conn.gamma_field[k].size() != nc)
      throw Error("connection data arity mismatch");
    for (const auto& e : conn.gamma_base[k])
      check_connection_entry(ch, action, e);
    for (const auto& e : conn.gamma_field[k])
      check_connection_entry(ch, action, e);
  }
}

Expr routhian(const FieldModel& model, const CyclicAction& action,
              const ConnectionData& conn, const MomentumValue& mu) {
  const Chart& ch = *model.chart;
  auto inv = check_invariance(model, action);
  if (!inv.ok)
    throw Error("routhian requires an invariant model: " + inv.diagnostic);
  if (!check_momentum_closed(ch, mu).ok)
    throw Error("routhian requires a closed momentum value");
  validate_connection(ch, action, conn);
  auto noncyc = noncyclic_fields(ch, action);
  Expr r = model.lagrangian;
  for (size_t k = 0; k < action.fields.size(); ++k) {
    int a = action.fields[k];
    for (int i = 0; i < ch.dim(); ++i) {
      // vertical defect u^a_i - Gamma^a_i - sum_b Gamma^a_b u^b_i
      Expr w = ex_sub(ch, ex_sym(ch.jet_id(a, {i})), conn.gamma_base[k][i]);
      for (size_t b = 0; b < noncyc.size(); ++b)
        w = ex_sub(ch, w,
                   ex_mul(ch, conn.gamma_field[k][b], ex_sym(ch.jet_id(noncyc[b], {i}))));
      r = ex_sub(ch, r, ex_mul(ch, mu.components[k][i], w));
    }
  }
  return r;
}

GyroscopicForce gyroscopic_force(const FieldModel& model, const CyclicAction& action,
                                 const ConnectionData& conn, const MomentumValue& mu) {
  const Chart& ch = *model.chart;
  if (!check_momentum_closed(ch, mu).ok)
    throw Error("gyroscopic force requires a closed momentum value");
  validate_connection(ch, action, conn);
  auto noncyc = noncyclic_fields(ch, action);
  HorizontalBasis hb(ch);

  DifferentialForm omega_mu(ch.dim());
  for (size_t k = 0; k < action.fields.size(); ++k) {
    DifferentialForm mu_k(ch.dim() - 1);
    for (int i = 0; i < ch.dim(); ++i)
      mu_k = form_add(ch, mu_k, form_scale(ch, mu.components[k][i], hb.eta_i[i]));
    DifferentialForm w = connection_form(ch, action, conn, static_cast<int>(k), noncyc);
    omega_mu = form_add(ch, omega_mu,
                        form_scale(ch, ex_num(Rat(hb.eps)), wedge(ch, mu_k, w)));
  }
  DifferentialForm d_omega = exterior_derivative(ch, omega_mu);
  // closedness kills the d(mu) ^ du^cyclic contribution
  DifferentialForm reduced(d_omega.degree());
  for (const auto& [gens, c] : d_omega.terms())
    reduced.add_term(ch, gens, apply_closure(ch, mu, c));

  GyroscopicForce out{std::move(reduced), {}, {}};
  int m = ch.dim();
  int nnc = static_cast<int>(noncyc.size());
  out.f_b.assign(nnc, ex_int(0));
  out.f_j.assign(m, std::vector<std::vector<Expr>>(nnc, std::vector<Expr>(nnc, ex_int(0))));

  // basis matching: F_b from du^b ^ eta, F^j_bc from du^b ^ du^c ^ eta_j
  DifferentialForm rebuilt(out.form.degree());
  for (int b = 0; b < nnc; ++b) {
    DifferentialForm du(1);
    du.add_term(ch, {ch.symbol_gen(ch.field_id(noncyc[b]))}, ex_int(1));
    DifferentialForm basis = wedge(ch, du, hb.eta);
    const auto& [gens, sgn] = *basis.terms().begin();
    Expr f = ex_mul(ch, out.form.coefficient(gens), sgn);
    out.f_b[b] = f;
    rebuilt = form_add(ch, rebuilt, form_scale(ch, f, basis));
    for (int c = b + 1; c < nnc; ++c)
      for (int j = 0; j < m; ++j) {
        DifferentialForm duc(1);
        duc.add_term(ch, {ch.symbol_gen(ch.field_id(noncyc[c]))}, ex_int(1));
        DifferentialForm basis2 = wedge(ch, wedge(ch, du, duc), hb.eta_i[j]);
        if (basis2.is_zero())
          continue;
        const auto& [gens2, sgn2] = *basis2.terms().begin();
        Expr f2 = ex_mul(ch, out.form.coefficient(gens2), sgn2);
        out.f_j[j][b][c] = f2;
        out.f_j[j][c][b] = ex_neg(ch, f2);
        rebuilt = form_add(ch, rebuilt, form_scale(ch, f2, basis2));
      }
  }
  if (!form_equal(rebuilt, out.form))
    throw Error("gyroscopic force has components outside the reduced shape "
                "F^j_bc du^b^du^c^eta_j + F_b du^b^eta");
  return out;
}

ReducedModel reduce_model(const FieldModel& model, const CyclicAction& action,
                          const ConnectionData& conn, const MomentumValue& mu,
                          const SigmaNames& names) {
  const Chart& ch = *model.chart;
  Expr r_mu = routhian(model, action, conn, mu); // runs all the checks
  auto gyro = gyroscopic_force(model, action, conn, mu);
  auto noncyc = noncyclic_fields(ch, action);

  // reduced chart: base coords, non-cyclic fields, then sigma^a_i
  std::vector<std::string> base_names, field_names;
  for (int i = 0; i < ch.dim(); ++i)
    base_names.push_back(ch.symbol(ch.base_id(i)).name);
  for (int b : noncyc)
    field_names.push_back(ch.symbol(ch.field_id(b)).name);
  for (size_t k = 0; k < action.fields.size(); ++k)
    for (int i = 0; i < ch.dim(); ++i) {
      auto it = names.find({static_cast<int>(k), i});
      field_names.push_back(it != names.end()
                                ? it->second
                                : "sigma_" + ch.symbol(ch.field_id(action.fields[k])).name +
                                      "_" + ch.symbol(ch.base_id(i)).name);
    }
  auto red = std::make_shared<Chart>(base_names, field_names);
  for (int s = 0; s < ch.n_symbols(); ++s)
    if (ch.symbol(s).kind == SymbolKind::Parameter)
      red->declare_parameter(ch.symbol(s).name);
  for (int u = 0; u < ch.n_ufuncs(); ++u) {
    const auto& decl = ch.ufunc_decl(u);
    std::vector<std::string> deps;
    for (int d : decl.deps)
      deps.push_back(ch.symbol(d).name);
    red->declare_ufunc(decl.name, deps);
  }

  ReducedModel rm;
  rm.chart = red;
  rm.noncyclic = noncyc;
  int nnc = static_cast<int>(noncyc.size());
  for (size_t k = 0; k < action.fields.size(); ++k) {
    std::vector<int> row;
    for (int i = 0; i < ch.dim(); ++i)
      row.push_back(red->field_id(nnc + static_cast<int>(k) * ch.dim() + i));
    rm.sigma_fields.push_back(std::move(row));
  }

  // original-chart symbol -> reduced-chart expression; direct renamings
  // first so the g_omega pass can transfer the connection coefficients
  std::map<int, Expr>& sub = rm.substitution;
  for (int s = 0; s < ch.n_symbols(); ++s) {
    const Symbol& sym = ch.symbol(s);
    switch (sym.kind) {
    case SymbolKind::BaseCoord:
    case SymbolKind::Parameter:
      sub[s] = ex_sym(red->id(sym.name));
      break;
    case SymbolKind::UFunc:
      sub[s] = ex_sym(red->ufunc_id(sym.ufunc, sym.dindex));
      break;
    case SymbolKind::Field:
      if (red->has(sym.name)) // cyclic fields stay unmapped (must not occur)
        sub[s] = ex_sym(red->id(sym.name));
      break;
    case SymbolKind::Jet:
      if (std::find(action.fields.begin(), action.fields.end(), sym.field) ==
          action.fields.end()) {
        int rb = static_cast<int>(std::find(noncyc.begin(), noncyc.end(), sym.field) -
                                  noncyc.begin());
        sub[s] = ex_sym(red->jet_id(rb, sym.index));
      }
      break;
    }
  }
  for (size_t k = 0; k < action.fields.size(); ++k)
    for (int i = 0; i < ch.dim(); ++i) {
      // g_omega: u^a_i -> sigma^a_i + Gamma^a_i + sum_b Gamma^a_b u^b_i
      auto xfer = [&](const Expr& e) { return substitute(*red, e, sub); };
      Expr repl = ex_add(*red, ex_sym(rm.sigma_fields[k][i]),
                         xfer(conn.gamma_base[k][i]));
      for (int b = 0; b < nnc; ++b)
        repl = ex_add(*red, repl,
                      ex_mul(*red, xfer(conn.gamma_field[k][b]),
                             ex_sym(red->jet_id(b, {i}))));
      sub[ch.jet_id(action.fields[k], {i})] = repl;
    }

  auto transfer = [&](const Expr& e) {
    return rebuild(*red, e, [&](int id) -> Expr {
      auto it = sub.find(id);
      if (it == sub.end())
        throw Error("reduction left an unreducible symbol: " + ch.symbol(id).name);
      return it->second;
    });
  };

  Expr r_red = transfer(r_mu);
  for (size_t k = 0; k < action.fields.size(); ++k)
    for (int i = 0; i < ch.dim(); ++i)
      for (int j = 0; j < ch.dim(); ++j)
        if (!ex_is_zero(diff_partial(
                *red, r_red,
                red->jet_id(nnc + static_cast<int>(k) * ch.dim() + i, {j}))))
          throw Error("reduced Routhian unexpectedly depends on sigma jets");

  FieldModel fm;
  fm.chart = red;
  fm.lagrangian = r_red;
  int m = ch.dim();
  int nred = red->n_fields();
  fm.force_a.assign(nred, ex_int(0));
  fm.force_j.assign(m, std::vector<std::vector<Expr>>(nred, std::vector<Expr>(nred, ex_int(0))));
  for (int b = 0; b < nnc; ++b) {
    fm.force_a[b] = transfer(gyro.f_b[b]);
    for (int c = 0; c < nnc; ++c)
      for (int j = 0; j < m; ++j)
        fm.force_j[j][b][c] = transfer(gyro.f_j[j][b][c]);
  }
  fm.validate();
  rm.mu.components.assign(mu.components.size(), {});
  for (size_t k = 0; k < mu.components.size(); ++k)
    for (const auto& c : mu.components[k])
      rm.mu.components[k].push_back(transfer(c));
  for (const auto& [id, e] : mu.closure_rules) {
    const Symbol& sym = ch.symbol(id);
    rm.mu.closure_rules[red->ufunc_id(sym.ufunc, sym.dindex)] = transfer(e);
  }
  rm.model = std::move(fm);
  rm.gyro_form = std::move(gyro.form);
  return rm;
}

ELSystem reduced_euler_lagrange(const ReducedModel& rm) {
  return euler_lagrange(rm.model);
}

} // namespace routhft
