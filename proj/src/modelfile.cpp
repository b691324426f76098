#include "routhft/modelfile.hpp"

#include "routhft/parser.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace routhft {

namespace {

struct Line {
  int number;
  std::string key, value;
};

using Sections = std::map<std::string, std::vector<Line>>;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos)
    return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w)
    out.push_back(w);
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error("model file, line " + std::to_string(line) + ": " + msg);
}

Sections split_sections(const std::string& text) {
  Sections out;
  std::istringstream is(text);
  std::string raw, section;
  int number = 0;
  while (std::getline(is, raw)) {
    ++number;
    auto hash = raw.find('#');
    if (hash != std::string::npos)
      raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(number, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        fail(number, "empty section name");
      out[section]; // a section may be present but empty
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(number, "expected `key = value`");
    if (section.empty())
      fail(number, "entry outside any section");
    out[section].push_back({number, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }
  return out;
}

const std::vector<Line>& section(const Sections& s, const std::string& name) {
  static const std::vector<Line> empty;
  auto it = s.find(name);
  return it == s.end() ? empty : it->second;
}

Expr parse_in(const Chart& ch, const Line& line, const UnknownHandler& unknown = {}) {
  try {
    return parse_expr(ch, line.value, unknown);
  } catch (const Error& e) {
    fail(line.number, e.what());
  }
}

int field_index(const Chart& ch, const Line& line, const std::string& name) {
  for (int a = 0; a < ch.n_fields(); ++a)
    if (ch.symbol(ch.field_id(a)).name == name)
      return a;
  fail(line.number, "unknown field: " + name);
}

int base_index(const Chart& ch, const Line& line, const std::string& name) {
  for (int i = 0; i < ch.dim(); ++i)
    if (ch.symbol(ch.base_id(i)).name == name)
      return i;
  fail(line.number, "unknown base coordinate: " + name);
}

} // namespace

ModelFile parse_model_file(const std::string& text) {
  auto sections = split_sections(text);
  for (const auto& [name, lines] : sections) {
    (void)lines;
    static const std::vector<std::string> known = {
        "base",     "fields",   "lagrangian",    "symmetry",
        "connection", "momentum", "force",       "reduced-names"};
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw Error("model file: unknown section [" + name + "]");
  }

  ModelFile out;
  std::vector<std::string> coords, fields;
  for (const auto& line : section(sections, "base")) {
    if (line.key != "coords")
      fail(line.number, "unknown key in [base]: " + line.key);
    coords = split_ws(line.value);
  }
  for (const auto& line : section(sections, "fields")) {
    if (line.key != "names")
      fail(line.number, "unknown key in [fields]: " + line.key);
    fields = split_ws(line.value);
  }
  if (coords.empty())
    throw Error("model file: missing [base] coords");
  if (fields.empty())
    throw Error("model file: missing [fields] names");
  out.chart = std::make_shared<Chart>(coords, fields);
  Chart& ch = *out.chart;
  int m = ch.dim(), n = ch.n_fields();

  // cyclic fields first: the connection/momentum handlers depend on them
  for (const auto& line : section(sections, "symmetry")) {
    if (line.key != "cyclic")
      fail(line.number, "unknown key in [symmetry]: " + line.key);
    out.has_symmetry = true;
    for (const auto& name : split_ws(line.value))
      out.action.fields.push_back(field_index(ch, line, name));
  }
  std::vector<int> noncyc;
  for (int a = 0; a < n; ++a)
    if (std::find(out.action.fields.begin(), out.action.fields.end(), a) ==
        out.action.fields.end())
      noncyc.push_back(a);

  // opaque-function declaration for identifiers unknown to the chart
  auto declare_of = [&ch](std::vector<std::string> deps) {
    return [&ch, deps = std::move(deps)](const std::string& name) {
      return ch.declare_ufunc(name, deps);
    };
  };
  std::vector<std::string> base_deps = coords;
  std::vector<std::string> conn_deps = coords;
  for (int b : noncyc)
    conn_deps.push_back(ch.symbol(ch.field_id(b)).name);

  Expr lagrangian = ex_int(0);
  {
    const auto& lines = section(sections, "lagrangian");
    if (lines.empty())
      throw Error("model file: missing [lagrangian]");
    for (const auto& line : lines) {
      if (line.key != "L")
        fail(line.number, "unknown key in [lagrangian]: " + line.key);
      lagrangian = parse_in(ch, line);
    }
  }

  out.connection = out.has_symmetry
                       ? flat_connection(ch, out.action)
                       : ConnectionData{};
  for (const auto& line : section(sections, "connection")) {
    auto key = split_ws(line.key);
    if (key.size() != 3 || key[0] != "Gamma")
      fail(line.number, "connection keys read `Gamma <cyclic field> <coord or field>`");
    if (!out.has_symmetry)
      fail(line.number, "[connection] requires a [symmetry] section");
    int a = field_index(ch, line, key[1]);
    auto kit = std::find(out.action.fields.begin(), out.action.fields.end(), a);
    if (kit == out.action.fields.end())
      fail(line.number, key[1] + " is not a cyclic field");
    size_t k = kit - out.action.fields.begin();
    Expr value = parse_in(ch, line, declare_of(conn_deps));
    if (ch.has(key[2]) &&
        ch.symbol(ch.id(key[2])).kind == SymbolKind::BaseCoord) {
      out.connection.gamma_base[k][base_index(ch, line, key[2])] = value;
    } else {
      int b = field_index(ch, line, key[2]);
      auto bit = std::find(noncyc.begin(), noncyc.end(), b);
      if (bit == noncyc.end())
        fail(line.number, "connection coefficient keyed by a cyclic field: " + key[2]);
      out.connection.gamma_field[k][bit - noncyc.begin()] = value;
    }
    try {
      validate_connection(ch, out.action, out.connection);
    } catch (const Error& e) {
      fail(line.number, e.what());
    }
  }

  {
    const auto& lines = section(sections, "momentum");
    if (!lines.empty() && !out.has_symmetry)
      fail(lines.front().number, "[momentum] requires a [symmetry] section");
    // covector entries `mu <field> d<coord>` or eta entries `mu <field> eta <coord>`
    size_t nc = out.action.fields.size();
    std::vector<std::vector<Expr>> cov(nc, std::vector<Expr>(m, ex_int(0)));
    std::vector<std::vector<Expr>> eta(nc, std::vector<Expr>(m, ex_int(0)));
    bool any_cov = false, any_eta = false;
    for (const auto& line : lines) {
      auto key = split_ws(line.key);
      if (key.size() < 3 || key[0] != "mu")
        fail(line.number, "momentum keys read `mu <cyclic field> d<coord>` or "
                          "`mu <cyclic field> eta <coord>`");
      int a = field_index(ch, line, key[1]);
      auto kit = std::find(out.action.fields.begin(), out.action.fields.end(), a);
      if (kit == out.action.fields.end())
        fail(line.number, key[1] + " is not a cyclic field");
      size_t k = kit - out.action.fields.begin();
      Expr value = parse_in(ch, line, declare_of(base_deps));
      if (key.size() == 4 && key[2] == "eta") {
        eta[k][base_index(ch, line, key[3])] = value;
        any_eta = true;
      } else if (key.size() == 3 && key[2].size() > 1 && key[2][0] == 'd') {
        cov[k][base_index(ch, line, key[2].substr(1))] = value;
        any_cov = true;
      } else {
        fail(line.number, "bad momentum key: " + line.key);
      }
    }
    if (any_cov && any_eta)
      throw Error("model file: mix of covector and eta momentum entries");
    if (any_cov && m != 2)
      throw Error("model file: covector momentum entries need a 2-dimensional base; "
                  "use `mu <field> eta <coord>` keys");
    if (out.has_symmetry) {
      try {
        out.momentum = any_cov ? momentum_from_covector(ch, out.action, cov)
                     : any_eta ? momentum_from_components(ch, out.action, eta)
                               : zero_momentum(ch, out.action);
      } catch (const Error& e) {
        throw Error(std::string("model file: [momentum] ") + e.what());
      }
    }
  }

  out.model = make_model(out.chart, lagrangian);
  for (const auto& line : section(sections, "force")) {
    auto key = split_ws(line.key);
    if (out.model.force_a.empty()) {
      out.model.force_a.assign(n, ex_int(0));
      out.model.force_j.assign(
          m, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n, ex_int(0))));
    }
    Expr value = parse_in(ch, line);
    if (key.size() == 2 && key[0] == "F") {
      out.model.force_a[field_index(ch, line, key[1])] = value;
    } else if (key.size() == 4 && key[0] == "F") {
      int j = base_index(ch, line, key[1]);
      int a = field_index(ch, line, key[2]);
      int b = field_index(ch, line, key[3]);
      out.model.force_j[j][a][b] = value;
      out.model.force_j[j][b][a] = ex_neg(ch, value);
    } else {
      fail(line.number, "force keys read `F <field>` or `F <coord> <field> <field>`");
    }
  }
  try {
    out.model.validate();
    if (out.has_symmetry) {
      auto inv = check_invariance(out.model, out.action);
      if (!inv.ok)
        throw Error("not invariant under the cyclic action: " + inv.diagnostic);
    }
  } catch (const Error& e) {
    throw Error(std::string("model file: ") + e.what());
  }

  for (const auto& line : section(sections, "reduced-names")) {
    auto key = split_ws(line.key);
    if (key.size() != 3 || key[0] != "sigma")
      fail(line.number, "reduced-names keys read `sigma <cyclic field> <coord>`");
    int a = field_index(ch, line, key[1]);
    auto kit = std::find(out.action.fields.begin(), out.action.fields.end(), a);
    if (kit == out.action.fields.end())
      fail(line.number, key[1] + " is not a cyclic field");
    out.reduced_names[{static_cast<int>(kit - out.action.fields.begin()),
                       base_index(ch, line, key[2])}] = split_ws(line.value).at(0);
  }
  return out;
}

ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_file(ss.str());
}

} // namespace routhft
