#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace routhft {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SymbolKind { BaseCoord, Field, Jet, Parameter, UFunc };

// Highest derivative order housed by the symbol table. Lagrangians are
// first order, Euler-Lagrange residuals are second order, and symbolic
// elimination (flat condition applied to an EL output) needs third order.
constexpr int kMaxJetOrder = 3;

struct Symbol {
  SymbolKind kind;
  std::string name;
  int field = -1;          // Jet: owning field index
  std::vector<int> index;  // Jet: sorted base-coordinate indices (size 1..3)
  int ufunc = -1;          // UFunc: declaration index
  std::vector<int> dindex; // UFunc: sorted derivative slots into the dep list
};

// An opaque function of a fixed list of chart coordinates (base coordinates
// and/or fields). Partial derivatives are housed as further UFunc symbols.
struct UFuncDecl {
  std::string name;
  std::vector<int> deps; // symbol ids, each BaseCoord or Field
  int sym = -1;          // order-0 symbol id
};

// Symbol table for one coordinate chart: base coordinates x^i, fields u^a,
// jet coordinates u^a_I (|I| <= kMaxJetOrder, multi-index kept sorted so
// symmetric mixed derivatives share one symbol), scalar parameters, and
// opaque functions with their derivative symbols.
class Chart {
public:
  Chart(std::vector<std::string> base, std::vector<std::string> fields,
        const std::vector<std::string>& params = {});

  int declare_parameter(const std::string& name);
  // Declares an opaque function of the named coordinates; creates all
  // derivative symbols up to kMaxJetOrder. Returns the order-0 symbol id.
  int declare_ufunc(const std::string& name, const std::vector<std::string>& deps);

  int dim() const { return static_cast<int>(base_.size()); }
  int n_fields() const { return static_cast<int>(fields_.size()); }

  int base_id(int i) const { return base_[i]; }
  int field_id(int a) const { return fields_[a]; }
  // index must be sorted; throws on order overflow
  int jet_id(int field, const std::vector<int>& index) const;
  int ufunc_id(int decl, const std::vector<int>& dindex) const;
  int ufunc_deriv(int sym, int slot) const; // d(sym)/d(dep slot)

  const Symbol& symbol(int id) const { return symbols_[id]; }
  const UFuncDecl& ufunc_decl(int i) const { return ufuncs_[i]; }
  int n_ufuncs() const { return static_cast<int>(ufuncs_.size()); }
  int n_symbols() const { return static_cast<int>(symbols_.size()); }

  int id(const std::string& name) const; // exact lookup, throws
  bool has(const std::string& name) const { return byname_.count(name) != 0; }
  // Exact lookup, then the jet / ufunc-derivative suffix convention
  // (phi_tx, Gamma_psi_t). Returns nullopt if unresolvable.
  std::optional<int> resolve(const std::string& name) const;

  // Exterior-algebra generators: dx^i, then du^a, then du^a_i.
  int n_generators() const { return static_cast<int>(gens_.size()); }
  int gen_symbol(int g) const { return gens_[g]; }
  int symbol_gen(int id) const { return gen_of_[id]; } // -1 if none
  std::string gen_name(int g) const { return "d" + symbols_[gens_[g]].name; }

  // total order used by canonical forms: (kind rank, name)
  int sym_cmp(int a, int b) const;

private:
  int add_symbol(Symbol s);

  std::vector<Symbol> symbols_;
  std::map<std::string, int> byname_;
  std::vector<int> base_;
  std::vector<int> fields_;
  std::map<std::pair<int, std::vector<int>>, int> jets_;
  std::vector<UFuncDecl> ufuncs_;
  std::map<std::pair<int, std::vector<int>>, int> uderivs_;
  std::vector<int> gens_;
  std::vector<int> gen_of_;
};

} // namespace routhft
