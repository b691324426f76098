#pragma once

#include "routhft/forms.hpp"

#include <memory>

namespace routhft {

// First-order Lagrangian field theory over a trivial bundle R^m x R^n.
// The optional force is F = 1/2 F^j_ab du^a ^ du^b ^ eta_j + F_a du^a ^ eta
// with coefficients of jet order 0 and F^j antisymmetric in (a, b).
struct FieldModel {
  std::shared_ptr<Chart> chart;
  Expr lagrangian;
  std::vector<Expr> force_a;                            // [n], may be empty
  std::vector<std::vector<std::vector<Expr>>> force_j;  // [m][n][n], may be empty

  bool has_force() const { return !force_a.empty() || !force_j.empty(); }
  // throws on: second jets in L, jets in force coefficients, F^j not
  // antisymmetric
  void validate() const;
};

FieldModel make_model(std::shared_ptr<Chart> chart, Expr lagrangian);

// one residual per field:
//   D_k(dL/du^a_k) - dL/du^a - sum_bj F^j_ab u^b_j - F_a
struct ELSystem {
  std::vector<Expr> residuals; // indexed by field
};

ELSystem euler_lagrange(const FieldModel& model);

// p^i_a = dL/du^a_i, indexed [field][base]
std::vector<std::vector<Expr>> legendre_multipliers(const FieldModel& model);

// lambda = L eta + p^i_a du^a ^ eta_i - p^i_a u^a_i eta, with the
// multipliers substituted by their Legendre values
DifferentialForm cartan_form(const FieldModel& model);

} // namespace routhft
