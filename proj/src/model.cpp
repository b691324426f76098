#include "routhft/model.hpp"

namespace routhft {

void FieldModel::validate() const {
  const Chart& ch = *chart;
  if (max_jet_order(ch, lagrangian) > 1)
    throw Error("lagrangian contains jets of order > 1");
  int m = ch.dim(), n = ch.n_fields();
  if (!force_a.empty() && static_cast<int>(force_a.size()) != n)
    throw Error("force F_a has wrong arity");
  for (const auto& f : force_a)
    if (max_jet_order(ch, f) > 0)
      throw Error("force coefficient F_a depends on jet coordinates");
  if (!force_j.empty()) {
    if (static_cast<int>(force_j.size()) != m)
      throw Error("force F^j has wrong arity");
    for (int j = 0; j < m; ++j) {
      if (static_cast<int>(force_j[j].size()) != n)
        throw Error("force F^j has wrong arity");
      for (int a = 0; a < n; ++a) {
        if (static_cast<int>(force_j[j][a].size()) != n)
          throw Error("force F^j has wrong arity");
        for (int b = 0; b < n; ++b) {
          if (max_jet_order(ch, force_j[j][a][b]) > 0)
            throw Error("force coefficient F^j depends on jet coordinates");
          if (!ex_equal(force_j[j][a][b], ex_neg(ch, force_j[j][b][a])))
            throw Error("force F^j is not antisymmetric");
        }
      }
    }
  }
}

FieldModel make_model(std::shared_ptr<Chart> chart, Expr lagrangian) {
  FieldModel m;
  m.chart = std::move(chart);
  m.lagrangian = std::move(lagrangian);
  m.validate();
  return m;
}

ELSystem euler_lagrange(const FieldModel& model) {
  const Chart& ch = *model.chart;
  int m = ch.dim(), n = ch.n_fields();
  auto p = legendre_multipliers(model);
  ELSystem sys;
  for (int a = 0; a < n; ++a) {
    Expr r = ex_neg(ch, diff_partial(ch, model.lagrangian, ch.field_id(a)));
    for (int i = 0; i < m; ++i)
      r = ex_add(ch, r, total_derivative(ch, p[a][i], i));
    if (!model.force_j.empty())
      for (int b = 0; b < n; ++b)
        for (int j = 0; j < m; ++j)
          r = ex_sub(ch, r,
                     ex_mul(ch, model.force_j[j][a][b], ex_sym(ch.jet_id(b, {j}))));
    if (!model.force_a.empty())
      r = ex_sub(ch, r, model.force_a[a]);
    sys.residuals.push_back(r);
  }
  return sys;
}

std::vector<std::vector<Expr>> legendre_multipliers(const FieldModel& model) {
  const Chart& ch = *model.chart;
  std::vector<std::vector<Expr>> p(ch.n_fields());
  for (int a = 0; a < ch.n_fields(); ++a)
    for (int i = 0; i < ch.dim(); ++i)
      p[a].push_back(diff_partial(ch, model.lagrangian, ch.jet_id(a, {i})));
  return p;
}

DifferentialForm cartan_form(const FieldModel& model) {
  const Chart& ch = *model.chart;
  HorizontalBasis hb(ch);
  auto p = legendre_multipliers(model);
  DifferentialForm lambda = form_scale(ch, model.lagrangian, hb.eta);
  for (int a = 0; a < ch.n_fields(); ++a) {
    DifferentialForm du(1);
    du.add_term(ch, {ch.symbol_gen(ch.field_id(a))}, ex_int(1));
    for (int i = 0; i < ch.dim(); ++i) {
      lambda = form_add(ch, lambda, form_scale(ch, p[a][i], wedge(ch, du, hb.eta_i[i])));
      lambda = form_add(
          ch, lambda,
          form_scale(ch, ex_neg(ch, ex_mul(ch, p[a][i], ex_sym(ch.jet_id(a, {i})))),
                     hb.eta));
    }
  }
  return lambda;
}

} // namespace routhft
