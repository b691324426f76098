#pragma once

#include "routhft/routh.hpp"

#include <string>

namespace routhft {

// A fully parsed model file: the field theory plus the optional symmetry,
// connection, momentum and display-name data for reduction.
struct ModelFile {
  std::shared_ptr<Chart> chart;
  FieldModel model;
  bool has_symmetry = false;
  CyclicAction action;
  ConnectionData connection; // flat when the section is absent
  MomentumValue momentum;    // zero when the section is absent
  SigmaNames reduced_names;
};

// Section format, one `key = expression` per line, `#` comments:
//   [base]        coords = t x
//   [fields]      names = phi psi
//   [lagrangian]  L = 1/2*phi_t*phi_x + ...
//   [symmetry]    cyclic = phi
//   [connection]  Gamma phi t = ...   /  Gamma phi psi = ...
//   [momentum]    mu phi dt = ...     (covector basis; m = 2)
//                 mu phi eta t = ...  (eta_i basis; any m)
//   [force]       F phi = ...        /  F t phi psi = ...   (F^j_ab)
//   [reduced-names] sigma phi t = sigma
// Unknown identifiers in [momentum] become opaque functions of the base
// coordinates; in [connection], of base coordinates and non-cyclic fields.
// Unknown identifiers in [lagrangian] and [force] are errors.
ModelFile parse_model_file(const std::string& text);
ModelFile load_model_file(const std::string& path);

} // namespace routhft
