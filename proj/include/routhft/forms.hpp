#pragma once

#include "routhft/expr.hpp"

#include <map>
#include <vector>

namespace routhft {

// Graded exterior-algebra element over a chart. Terms map strictly
// increasing generator-index lists to Expr coefficients; the antisymmetry
// sign is absorbed into the coefficient and zero coefficients are pruned.
class DifferentialForm {
public:
  DifferentialForm() = default;
  explicit DifferentialForm(int degree) : degree_(degree) {}

  int degree() const { return degree_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<std::vector<int>, Expr>& terms() const { return terms_; }

  // adds coeff * (gens as given, not necessarily sorted); resolves the sign
  void add_term(const Chart& ch, std::vector<int> gens, Expr coeff);
  Expr coefficient(const std::vector<int>& gens) const; // gens sorted

  static DifferentialForm scalar(const Chart& ch, Expr f); // degree 0

private:
  int degree_ = 0;
  std::map<std::vector<int>, Expr> terms_;
};

DifferentialForm form_add(const Chart& ch, const DifferentialForm& a,
                          const DifferentialForm& b);
DifferentialForm form_scale(const Chart& ch, const Expr& f, const DifferentialForm& a);
DifferentialForm wedge(const Chart& ch, const DifferentialForm& a,
                       const DifferentialForm& b);
DifferentialForm exterior_derivative(const Chart& ch, const DifferentialForm& a);
// interior product with the coordinate vector field dual to generator gen
DifferentialForm contract(const Chart& ch, int gen, const DifferentialForm& a);

bool form_equal(const DifferentialForm& a, const DifferentialForm& b);
std::string to_string(const Chart& ch, const DifferentialForm& a);

// volume form eta = dx^1 ^ ... ^ dx^m, the (m-1)-form basis
// eta_i = d/dx^i _| eta, and the sign eps = (-1)^(m-1)
struct HorizontalBasis {
  explicit HorizontalBasis(const Chart& ch);
  DifferentialForm eta;
  std::vector<DifferentialForm> eta_i;
  int eps;
};

} // namespace routhft
