#include "routhft/chart.hpp"

#include <algorithm>
#include <functional>

namespace routhft {

namespace {

int kind_rank(SymbolKind k) {
  switch (k) {
  case SymbolKind::BaseCoord: return 0;
  case SymbolKind::Field: return 1;
  case SymbolKind::Jet: return 2;
  case SymbolKind::Parameter: return 3;
  case SymbolKind::UFunc: return 4;
  }
  return 5;
}

// all sorted multisets of {0..k-1} with sizes 1..maxlen, in length-major order
std::vector<std::vector<int>> multisets(int k, int maxlen) {
  std::vector<std::vector<int>> out;
  std::vector<std::vector<int>> cur = {{}};
  for (int len = 1; len <= maxlen; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& c : cur) {
      int lo = c.empty() ? 0 : c.back();
      for (int i = lo; i < k; ++i) {
        auto v = c;
        v.push_back(i);
        next.push_back(v);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    cur = std::move(next);
  }
  return out;
}

} // namespace

int Chart::add_symbol(Symbol s) {
  if (byname_.count(s.name))
    throw Error("duplicate symbol name: " + s.name);
  int id = static_cast<int>(symbols_.size());
  byname_[s.name] = id;
  symbols_.push_back(std::move(s));
  gen_of_.push_back(-1);
  return id;
}

Chart::Chart(std::vector<std::string> base, std::vector<std::string> fields,
             const std::vector<std::string>& params) {
  for (const auto& b : base) {
    Symbol s;
    s.kind = SymbolKind::BaseCoord;
    s.name = b;
    base_.push_back(add_symbol(std::move(s)));
  }
  for (const auto& f : fields) {
    Symbol s;
    s.kind = SymbolKind::Field;
    s.name = f;
    fields_.push_back(add_symbol(std::move(s)));
  }
  for (int a = 0; a < n_fields(); ++a) {
    for (const auto& idx : multisets(dim(), kMaxJetOrder)) {
      std::string name = symbols_[fields_[a]].name + "_";
      for (int i : idx)
        name += symbols_[base_[i]].name;
      Symbol s;
      s.kind = SymbolKind::Jet;
      s.name = name;
      s.field = a;
      s.index = idx;
      jets_[{a, idx}] = add_symbol(std::move(s));
    }
  }
  for (const auto& p : params)
    declare_parameter(p);
  // generators: dx^i, du^a, du^a_i
  auto add_gen = [&](int id) {
    gen_of_[id] = static_cast<int>(gens_.size());
    gens_.push_back(id);
  };
  for (int id : base_)
    add_gen(id);
  for (int id : fields_)
    add_gen(id);
  for (int a = 0; a < n_fields(); ++a)
    for (int i = 0; i < dim(); ++i)
      add_gen(jet_id(a, {i}));
}

int Chart::declare_parameter(const std::string& name) {
  Symbol s;
  s.kind = SymbolKind::Parameter;
  s.name = name;
  return add_symbol(std::move(s));
}

int Chart::declare_ufunc(const std::string& name, const std::vector<std::string>& deps) {
  UFuncDecl decl;
  decl.name = name;
  for (const auto& d : deps) {
    int id = this->id(d);
    auto k = symbols_[id].kind;
    if (k != SymbolKind::BaseCoord && k != SymbolKind::Field)
      throw Error("ufunc dependency must be a base coordinate or field: " + d);
    decl.deps.push_back(id);
  }
  int di = static_cast<int>(ufuncs_.size());
  Symbol s0;
  s0.kind = SymbolKind::UFunc;
  s0.name = name;
  s0.ufunc = di;
  decl.sym = add_symbol(std::move(s0));
  uderivs_[{di, {}}] = decl.sym;
  int nd = static_cast<int>(decl.deps.size());
  for (const auto& idx : multisets(nd, kMaxJetOrder)) {
    std::string dname = name + "_";
    for (int slot : idx)
      dname += symbols_[decl.deps[slot]].name;
    Symbol s;
    s.kind = SymbolKind::UFunc;
    s.name = dname;
    s.ufunc = di;
    s.dindex = idx;
    uderivs_[{di, idx}] = add_symbol(std::move(s));
  }
  ufuncs_.push_back(std::move(decl));
  return ufuncs_[di].sym;
}

int Chart::jet_id(int field, const std::vector<int>& index) const {
  if (static_cast<int>(index.size()) > kMaxJetOrder)
    throw Error("jet order overflow for field " + symbols_[fields_[field]].name);
  auto it = jets_.find({field, index});
  if (it == jets_.end())
    throw Error("no such jet coordinate");
  return it->second;
}

int Chart::ufunc_id(int decl, const std::vector<int>& dindex) const {
  if (static_cast<int>(dindex.size()) > kMaxJetOrder)
    throw Error("derivative order overflow for " + ufuncs_[decl].name);
  auto it = uderivs_.find({decl, dindex});
  if (it == uderivs_.end())
    throw Error("no such derivative symbol");
  return it->second;
}

int Chart::ufunc_deriv(int sym, int slot) const {
  const Symbol& s = symbols_[sym];
  auto idx = s.dindex;
  idx.push_back(slot);
  std::sort(idx.begin(), idx.end());
  return ufunc_id(s.ufunc, idx);
}

int Chart::id(const std::string& name) const {
  auto it = byname_.find(name);
  if (it == byname_.end())
    throw Error("unknown symbol: " + name);
  return it->second;
}

std::optional<int> Chart::resolve(const std::string& name) const {
  auto it = byname_.find(name);
  if (it != byname_.end())
    return it->second;
  // suffix convention: <field>_<base coords> or <ufunc>_<deps>
  // try split points right to left so multi-underscore names bind greedily
  for (auto pos = name.rfind('_'); pos != std::string::npos && pos > 0;
       pos = name.rfind('_', pos - 1)) {
    std::string prefix = name.substr(0, pos);
    std::string suffix = name.substr(pos + 1);
    auto pit = byname_.find(prefix);
    if (pit == byname_.end() || suffix.empty())
      continue;
    const Symbol& ps = symbols_[pit->second];
    // greedy longest-match tokenization of the suffix against a name list
    auto tokenize = [&](const std::vector<int>& ids) -> std::optional<std::vector<int>> {
      std::vector<int> slots;
      size_t at = 0;
      while (at < suffix.size()) {
        int best = -1;
        size_t bestlen = 0;
        for (size_t k = 0; k < ids.size(); ++k) {
          const std::string& nm = symbols_[ids[k]].name;
          if (nm.size() > bestlen && suffix.compare(at, nm.size(), nm) == 0) {
            best = static_cast<int>(k);
            bestlen = nm.size();
          }
        }
        if (best < 0)
          return std::nullopt;
        slots.push_back(best);
        at += bestlen;
      }
      std::sort(slots.begin(), slots.end());
      return slots;
    };
    if (ps.kind == SymbolKind::Field) {
      std::vector<int> bids;
      for (int i = 0; i < dim(); ++i)
        bids.push_back(base_[i]);
      auto slots = tokenize(bids);
      if (slots && static_cast<int>(slots->size()) <= kMaxJetOrder) {
        int fa = static_cast<int>(std::find(fields_.begin(), fields_.end(), pit->second) -
                                  fields_.begin());
        auto jit = jets_.find({fa, *slots});
        if (jit != jets_.end())
          return jit->second;
      }
    } else if (ps.kind == SymbolKind::UFunc && ps.dindex.empty()) {
      std::vector<int> dids = ufuncs_[ps.ufunc].deps;
      auto slots = tokenize(dids);
      if (slots && static_cast<int>(slots->size()) <= kMaxJetOrder) {
        auto uit = uderivs_.find({ps.ufunc, *slots});
        if (uit != uderivs_.end())
          return uit->second;
      }
    }
  }
  return std::nullopt;
}

int Chart::sym_cmp(int a, int b) const {
  if (a == b)
    return 0;
  const Symbol& sa = symbols_[a];
  const Symbol& sb = symbols_[b];
  int ra = kind_rank(sa.kind), rb = kind_rank(sb.kind);
  if (ra != rb)
    return ra < rb ? -1 : 1;
  int c = sa.name.compare(sb.name);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

} // namespace routhft
