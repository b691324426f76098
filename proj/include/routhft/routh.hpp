#pragma once

#include "routhft/symmetry.hpp"

namespace routhft {

// Principal-connection data for the translation action:
//   omega^a = du^a - Gamma^a_i dx^i - Gamma^a_b du^b
// with all coefficients independent of the cyclic fields and of jets.
struct ConnectionData {
  std::vector<std::vector<Expr>> gamma_base;  // [cyclic][m]
  std::vector<std::vector<Expr>> gamma_field; // [cyclic][non-cyclic field]
};

ConnectionData flat_connection(const Chart& ch, const CyclicAction& action);
void validate_connection(const Chart& ch, const CyclicAction& action,
                         const ConnectionData& conn);

// R_mu = L - sum_ai muhat^i_a (u^a_i - Gamma^a_i - sum_b Gamma^a_b u^b_i),
// an expression in the unreduced chart depending on the cyclic fields only
// through their jets
Expr routhian(const FieldModel& model, const CyclicAction& action,
              const ConnectionData& conn, const MomentumValue& mu);

// omega_mu = eps <mu ^, omega> and its exterior derivative; the reduced
// force coefficients are read off d(omega_mu)
struct GyroscopicForce {
  DifferentialForm form;                       // d(omega_mu), unreduced chart
  std::vector<Expr> f_b;                       // per non-cyclic field
  std::vector<std::vector<std::vector<Expr>>> f_j; // [m][non-cyc][non-cyc]
};

GyroscopicForce gyroscopic_force(const FieldModel& model, const CyclicAction& action,
                                 const ConnectionData& conn, const MomentumValue& mu);

struct ReducedModel {
  FieldModel model;             // over the reduced chart, force attached
  std::shared_ptr<Chart> chart; // == model.chart
  std::vector<int> noncyclic;   // original field indices, in order
  // sigma^a_i symbols in the reduced chart, indexed [cyclic][i]
  std::vector<std::vector<int>> sigma_fields;
  // original-chart symbol id -> reduced-chart expression, including the
  // g_omega substitution of cyclic jets
  std::map<int, Expr> substitution;
  MomentumValue mu;           // the momentum value, in the reduced chart
  DifferentialForm gyro_form; // d(omega_mu) in the unreduced chart
};

// Optional display names for the sigma^a_i fields, keyed (cyclic index, i);
// defaults to sigma_<field>_<coord>.
using SigmaNames = std::map<std::pair<int, int>, std::string>;

ReducedModel reduce_model(const FieldModel& model, const CyclicAction& action,
                          const ConnectionData& conn, const MomentumValue& mu,
                          const SigmaNames& names = {});

ELSystem reduced_euler_lagrange(const ReducedModel& rm);

} // namespace routhft
