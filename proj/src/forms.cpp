#include "routhft/forms.hpp"

#include <algorithm>

namespace routhft {

namespace {

// sorts gens ascending; returns 0 on a repeated generator, else the
// permutation sign
int sort_sign(std::vector<int>& gens) {
  int sign = 1;
  for (size_t i = 1; i < gens.size(); ++i)
    for (size_t j = i; j > 0 && gens[j] <= gens[j - 1]; --j) {
      if (gens[j] == gens[j - 1])
        return 0;
      std::swap(gens[j], gens[j - 1]);
      sign = -sign;
    }
  return sign;
}

} // namespace

void DifferentialForm::add_term(const Chart& ch, std::vector<int> gens, Expr coeff) {
  if (static_cast<int>(gens.size()) != degree_)
    throw Error("term degree mismatch");
  int sign = sort_sign(gens);
  if (sign == 0 || ex_is_zero(coeff))
    return;
  if (sign < 0)
    coeff = ex_neg(ch, coeff);
  auto it = terms_.find(gens);
  if (it == terms_.end()) {
    terms_.emplace(std::move(gens), std::move(coeff));
  } else {
    it->second = ex_add(ch, it->second, coeff);
    if (ex_is_zero(it->second))
      terms_.erase(it);
  }
}

Expr DifferentialForm::coefficient(const std::vector<int>& gens) const {
  auto it = terms_.find(gens);
  return it == terms_.end() ? ex_int(0) : it->second;
}

DifferentialForm DifferentialForm::scalar(const Chart& ch, Expr f) {
  DifferentialForm r(0);
  r.add_term(ch, {}, std::move(f));
  return r;
}

DifferentialForm form_add(const Chart& ch, const DifferentialForm& a,
                          const DifferentialForm& b) {
  if (a.degree() != b.degree())
    throw Error("degree mismatch in form addition");
  DifferentialForm r = a;
  for (const auto& [gens, c] : b.terms())
    r.add_term(ch, gens, c);
  return r;
}

DifferentialForm form_scale(const Chart& ch, const Expr& f, const DifferentialForm& a) {
  DifferentialForm r(a.degree());
  for (const auto& [gens, c] : a.terms())
    r.add_term(ch, gens, ex_mul(ch, f, c));
  return r;
}

DifferentialForm wedge(const Chart& ch, const DifferentialForm& a,
                       const DifferentialForm& b) {
  DifferentialForm r(a.degree() + b.degree());
  if (a.degree() + b.degree() > ch.n_generators())
    return r; // degree overflow: zero form
  for (const auto& [ga, ca] : a.terms())
    for (const auto& [gb, cb] : b.terms()) {
      std::vector<int> gens = ga;
      gens.insert(gens.end(), gb.begin(), gb.end());
      r.add_term(ch, std::move(gens), ex_mul(ch, ca, cb));
    }
  return r;
}

DifferentialForm exterior_derivative(const Chart& ch, const DifferentialForm& a) {
  DifferentialForm r(a.degree() + 1);
  for (const auto& [gens, c] : a.terms()) {
    // candidate directions: generator symbols in c, plus the dependencies
    // of any ufunc symbols (diff_partial chains through those)
    std::set<int> dirs;
    for (int s : symbols_of(c)) {
      if (ch.symbol_gen(s) >= 0)
        dirs.insert(s);
      else if (ch.symbol(s).kind == SymbolKind::UFunc)
        for (int dep : ch.ufunc_decl(ch.symbol(s).ufunc).deps)
          dirs.insert(dep);
    }
    for (int s : dirs) {
      Expr dc = diff_partial(ch, c, s);
      if (ex_is_zero(dc))
        continue;
      std::vector<int> ng{ch.symbol_gen(s)};
      ng.insert(ng.end(), gens.begin(), gens.end());
      r.add_term(ch, std::move(ng), std::move(dc));
    }
  }
  return r;
}

DifferentialForm contract(const Chart& ch, int gen, const DifferentialForm& a) {
  (void)ch;
  DifferentialForm r(a.degree() - 1);
  for (const auto& [gens, c] : a.terms()) {
    auto it = std::find(gens.begin(), gens.end(), gen);
    if (it == gens.end())
      continue;
    int pos = static_cast<int>(it - gens.begin());
    std::vector<int> ng = gens;
    ng.erase(ng.begin() + pos);
    r.add_term(ch, std::move(ng), pos % 2 == 0 ? c : ex_neg(ch, c));
  }
  return r;
}

bool form_equal(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.degree() != b.degree() || a.terms().size() != b.terms().size())
    return false;
  auto ia = a.terms().begin();
  auto ib = b.terms().begin();
  for (; ia != a.terms().end(); ++ia, ++ib)
    if (ia->first != ib->first || !ex_equal(ia->second, ib->second))
      return false;
  return true;
}

std::string to_string(const Chart& ch, const DifferentialForm& a) {
  if (a.is_zero())
    return "0";
  std::string out;
  bool first = true;
  for (const auto& [gens, c] : a.terms()) {
    if (!first)
      out += " + ";
    first = false;
    std::string cs = to_string(ch, c);
    if (cs.find(' ') != std::string::npos || (cs.find('-') != std::string::npos && cs[0] != '-'))
      cs = "(" + cs + ")";
    if (!(ex_is_one(c) && !gens.empty()))
      out += cs;
    for (int g : gens) {
      out += gens[0] == g && a.degree() > 0 && !(ex_is_one(c)) ? " " : gens[0] == g ? "" : "^";
      out += ch.gen_name(g);
    }
  }
  return out;
}

HorizontalBasis::HorizontalBasis(const Chart& ch)
    : eta(ch.dim()), eps(ch.dim() % 2 == 1 ? 1 : -1) {
  std::vector<int> gens;
  for (int i = 0; i < ch.dim(); ++i)
    gens.push_back(ch.symbol_gen(ch.base_id(i)));
  eta.add_term(ch, gens, ex_int(1));
  for (int i = 0; i < ch.dim(); ++i)
    eta_i.push_back(contract(ch, ch.symbol_gen(ch.base_id(i)), eta));
}

} // namespace routhft
