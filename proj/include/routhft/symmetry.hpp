#pragma once

#include "routhft/model.hpp"

namespace routhft {

// Abelian translation symmetry: G = R^|S| acting by translation on a subset
// S of the fields. The action is vertical and free, and G_mu = G for every
// momentum value.
struct CyclicAction {
  std::vector<int> fields; // field indices, in declaration order
};

// A momentum value per cyclic field, stored by its eta_i-basis components
// muhat^i_a (mu = sum_i muhat^i_a eta_i), Exprs in base coordinates only.
// closure_rules substitute one derivative symbol per relation so that
// opaque components declared closed (e.g. d mu_1/dx -> d mu_2/dt) actually
// canonicalize the divergence to zero.
struct MomentumValue {
  std::vector<std::vector<Expr>> components; // [cyclic][m]
  std::map<int, Expr> closure_rules;
};

// zero momentum for the given action
MomentumValue zero_momentum(const Chart& ch, const CyclicAction& action);

// m = 2 only: builds the value from covector-basis coefficients
// mu = mu_cov[0] dx^1 + mu_cov[1] dx^2 (the familiar mu_1 dt + mu_2 dx),
// i.e. muhat^1 = mu_cov[1], muhat^2 = -mu_cov[0]. Derives closure rules
// for opaque components; throws if the divergence cannot be closed.
MomentumValue momentum_from_covector(const Chart& ch, const CyclicAction& action,
                                     const std::vector<std::vector<Expr>>& mu_cov);
MomentumValue momentum_from_components(const Chart& ch, const CyclicAction& action,
                                       std::vector<std::vector<Expr>> components);

Expr apply_closure(const Chart& ch, const MomentumValue& mu, const Expr& e);

struct InvarianceReport {
  bool ok = true;
  std::string diagnostic; // offending field and term on failure
};

// passes iff dL/du^a = 0 and the force coefficients are independent of u^a
// for every cyclic field a
InvarianceReport check_invariance(const FieldModel& model, const CyclicAction& action);

// J_a = sum_i p^i_a eta_i, the conserved (m-1)-form current per cyclic field
std::vector<DifferentialForm> momentum_map(const FieldModel& model,
                                           const CyclicAction& action);

struct ClosednessReport {
  bool ok = true;
  std::vector<Expr> divergences; // per cyclic field, after closure rules
};

ClosednessReport check_momentum_closed(const Chart& ch, const MomentumValue& mu);

// level-set equations dL/du^a_i - muhat^i_a = 0, indexed [cyclic][i]
std::vector<std::vector<Expr>> momentum_constraint(const FieldModel& model,
                                                   const CyclicAction& action,
                                                   const MomentumValue& mu);

} // namespace routhft
