// routhft command-line tool: derive / momentum / reduce / reconstruct /
// verify-kdv on INI-style model files. Exit codes: 0 success, 1 validation
// failure, 2 tolerance failure.

#include "routhft/modelfile.hpp"
#include "routhft/numerics.hpp"
#include "routhft/reconstruct.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace routhft;

constexpr int kExitValidation = 1;
constexpr int kExitTolerance = 2;

std::string field_name(const Chart& ch, int a) {
  return ch.symbol(ch.field_id(a)).name;
}
std::string coord_name(const Chart& ch, int i) {
  return ch.symbol(ch.base_id(i)).name;
}

void require_symmetry(const ModelFile& mf) {
  if (!mf.has_symmetry)
    throw Error("model file has no [symmetry] section");
}

void print_momentum_bases(const ModelFile& mf) {
  const Chart& ch = *mf.chart;
  const int m = ch.dim();
  for (size_t k = 0; k < mf.action.fields.size(); ++k) {
    const std::string fn = field_name(ch, mf.action.fields[k]);
    for (int i = 0; i < m; ++i)
      std::cout << "  muhat^" << coord_name(ch, i) << "_" << fn << " = "
                << to_string(ch, mf.momentum.components[k][i]) << "\n";
    if (m == 2) {
      // mu = muhat^1 eta_1 + muhat^2 eta_2 with eta_1 = dx^2, eta_2 = -dx^1
      std::cout << "  mu_" << fn << " = ("
                << to_string(ch, ex_neg(ch, mf.momentum.components[k][1]))
                << ") d" << coord_name(ch, 0) << " + ("
                << to_string(ch, mf.momentum.components[k][0]) << ") d"
                << coord_name(ch, 1) << "\n";
    }
  }
}

int cmd_derive(const std::string& path) {
  ModelFile mf = load_model_file(path);
  const Chart& ch = *mf.chart;
  ELSystem el = euler_lagrange(mf.model);
  std::cout << "Euler-Lagrange equations:\n";
  for (int a = 0; a < ch.n_fields(); ++a)
    std::cout << "  [" << field_name(ch, a) << "] "
              << to_string(ch, el.residuals[a]) << " = 0\n";
  auto p = legendre_multipliers(mf.model);
  std::cout << "Legendre multipliers:\n";
  for (int a = 0; a < ch.n_fields(); ++a)
    for (int i = 0; i < ch.dim(); ++i)
      std::cout << "  p^" << coord_name(ch, i) << "_" << field_name(ch, a)
                << " = " << to_string(ch, p[a][i]) << "\n";
  return 0;
}

int cmd_momentum(const std::string& path) {
  ModelFile mf = load_model_file(path);
  require_symmetry(mf);
  const Chart& ch = *mf.chart;
  auto inv = check_invariance(mf.model, mf.action);
  if (!inv.ok) throw Error("model is not invariant: " + inv.diagnostic);
  auto currents = momentum_map(mf.model, mf.action);
  std::cout << "momentum currents:\n";
  for (size_t k = 0; k < mf.action.fields.size(); ++k)
    std::cout << "  J_" << field_name(ch, mf.action.fields[k]) << " = "
              << to_string(ch, currents[k]) << "\n";
  std::cout << "momentum value:\n";
  print_momentum_bases(mf);
  auto constraints = momentum_constraint(mf.model, mf.action, mf.momentum);
  std::cout << "momentum constraints:\n";
  for (size_t k = 0; k < mf.action.fields.size(); ++k)
    for (int i = 0; i < ch.dim(); ++i)
      std::cout << "  [" << field_name(ch, mf.action.fields[k]) << ","
                << coord_name(ch, i) << "] "
                << to_string(ch, constraints[k][i]) << " = 0\n";
  auto closed = check_momentum_closed(ch, mf.momentum);
  if (closed.ok) {
    std::cout << "closedness: closed\n";
  } else {
    std::cout << "closedness: NOT closed\n";
    for (size_t k = 0; k < closed.divergences.size(); ++k)
      std::cout << "  divergence[" << field_name(ch, mf.action.fields[k])
                << "] = " << to_string(ch, closed.divergences[k]) << "\n";
    return kExitValidation;
  }
  return 0;
}

int cmd_reduce(const std::string& path, bool flat) {
  ModelFile mf = load_model_file(path);
  require_symmetry(mf);
  const Chart& ch = *mf.chart;
  ConnectionData conn =
      flat ? flat_connection(ch, mf.action) : mf.connection;
  Expr rmu = routhian(mf.model, mf.action, conn, mf.momentum);
  std::cout << "Routhian R_mu = " << to_string(ch, rmu) << "\n";
  ReducedModel rm =
      reduce_model(mf.model, mf.action, conn, mf.momentum, mf.reduced_names);
  const Chart& rch = *rm.chart;
  std::cout << "reduced Routhian R = " << to_string(rch, rm.model.lagrangian)
            << "\n";
  GyroscopicForce gyro = gyroscopic_force(mf.model, mf.action, conn, mf.momentum);
  std::cout << "gyroscopic force d(omega_mu) = " << to_string(ch, gyro.form)
            << "\n";
  ELSystem el = reduced_euler_lagrange(rm);
  std::cout << "reduced Euler-Lagrange equations:\n";
  for (int a = 0; a < rch.n_fields(); ++a)
    std::cout << "  [" << field_name(rch, a) << "] "
              << to_string(rch, el.residuals[a]) << " = 0\n";
  return 0;
}

// ---- reconstruct: CSV-sampled reduced data --------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    size_t b = cell.find_first_not_of(" \t\r");
    size_t e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

std::string sigma_column_name(const ModelFile& mf, int k, int i) {
  auto it = mf.reduced_names.find({k, i});
  if (it != mf.reduced_names.end()) return it->second;
  const Chart& ch = *mf.chart;
  return "sigma_" + field_name(ch, mf.action.fields[k]) + "_" +
         coord_name(ch, i);
}

ReducedSectionData read_section_csv(const ModelFile& mf,
                                    const std::string& path) {
  const Chart& ch = *mf.chart;
  const int m = ch.dim();
  std::ifstream in(path);
  if (!in) throw Error("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("data file is empty: " + path);
  std::vector<std::string> header = split_csv_line(line);

  // expected columns: base coords, non-cyclic fields, sigma components
  std::vector<std::string> expected;
  for (int i = 0; i < m; ++i) expected.push_back(coord_name(ch, i));
  std::vector<std::string> value_cols;
  for (int a = 0; a < ch.n_fields(); ++a) {
    bool cyc = false;
    for (int f : mf.action.fields) cyc = cyc || f == a;
    if (!cyc) value_cols.push_back(field_name(ch, a));
  }
  for (size_t k = 0; k < mf.action.fields.size(); ++k)
    for (int i = 0; i < m; ++i)
      value_cols.push_back(sigma_column_name(mf, static_cast<int>(k), i));
  for (const auto& c : value_cols) expected.push_back(c);
  if (header != expected) {
    std::string want;
    for (size_t i = 0; i < expected.size(); ++i)
      want += (i ? "," : "") + expected[i];
    throw Error("data file header mismatch; expected: " + want);
  }

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != expected.size())
      throw Error("data file line " + std::to_string(lineno) +
                  ": expected " + std::to_string(expected.size()) +
                  " columns, got " + std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        size_t pos = 0;
        row.push_back(std::stod(c, &pos));
        if (pos != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw Error("data file line " + std::to_string(lineno) +
                    ": not a number: " + c);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("data file has no data rows: " + path);

  // infer the tensor-product grid from the coordinate columns
  Grid grid;
  std::vector<std::vector<double>> axis_vals(m);
  for (int i = 0; i < m; ++i) {
    std::vector<double> vals;
    for (const auto& r : rows) vals.push_back(r[i]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    if (vals.size() < 5)
      throw Error("axis " + coord_name(ch, i) +
                  ": fewer than 5 distinct coordinate values");
    double h = (vals.back() - vals.front()) / (double)(vals.size() - 1);
    for (size_t j = 0; j < vals.size(); ++j)
      if (std::abs(vals[j] - (vals.front() + (double)j * h)) > 1e-9 * (1 + std::abs(h)))
        throw Error("axis " + coord_name(ch, i) + ": spacing is not uniform");
    grid.min.push_back(vals.front());
    grid.max.push_back(vals.back());
    grid.npts.push_back(static_cast<int>(vals.size()));
    axis_vals[i] = std::move(vals);
  }
  grid.validate();
  long long total = grid.size();
  if ((long long)rows.size() != total)
    throw Error("data file rows (" + std::to_string(rows.size()) +
                ") do not fill the " + std::to_string(total) +
                "-point tensor-product grid");

  auto strides = grid.strides();
  std::vector<std::vector<double>> cols(value_cols.size(),
                                        std::vector<double>(total, 0.0));
  std::vector<char> seen(total, 0);
  for (const auto& r : rows) {
    long long flat = 0;
    for (int i = 0; i < m; ++i) {
      double h = grid.spacing(i);
      long long idx = std::llround((r[i] - grid.min[i]) / h);
      flat += idx * strides[i];
    }
    if (seen[flat])
      throw Error("data file repeats a grid point");
    seen[flat] = 1;
    for (size_t c = 0; c < value_cols.size(); ++c)
      cols[c][flat] = r[m + c];
  }

  ReducedSectionData data;
  data.chart = mf.chart;
  data.action = mf.action;
  data.grid = grid;
  size_t c = 0;
  for (int a = 0; a < ch.n_fields(); ++a) {
    bool cyc = false;
    for (int f : mf.action.fields) cyc = cyc || f == a;
    if (!cyc)
      data.fields.emplace(field_name(ch, a),
                          GridField(grid, std::move(cols[c++])));
  }
  for (size_t k = 0; k < mf.action.fields.size(); ++k) {
    std::vector<GridField> comps;
    for (int i = 0; i < m; ++i)
      comps.push_back(GridField(grid, std::move(cols[c++])));
    data.sigma.push_back(std::move(comps));
  }
  return data;
}

int cmd_reconstruct(const std::string& path, const std::string& data_path,
                    const std::string& out_path, double tol, bool flat) {
  ModelFile mf = load_model_file(path);
  require_symmetry(mf);
  const Chart& ch = *mf.chart;
  ConnectionData conn =
      flat ? flat_connection(ch, mf.action) : mf.connection;
  ReducedSectionData data = read_section_csv(mf, data_path);
  FlatResidual fr = flat_residual(data, conn);
  std::cout << "flat residual max norm = " << fr.max_norm << "\n";
  std::vector<int> base_index(ch.dim(), 0);
  std::vector<double> initial(mf.action.fields.size(), 0.0);
  std::vector<GridField> lifted;
  try {
    lifted = lift_section(data, conn, base_index, initial, tol);
  } catch (const Error& e) {
    std::string msg = e.what();
    if (msg.find("flat condition violated") != std::string::npos) {
      std::cerr << "error: " << msg << "\n";
      return kExitTolerance;
    }
    throw;
  }
  for (size_t k = 0; k < lifted.size(); ++k) {
    Norms n = interior_norms(lifted[k]);
    std::cout << "lifted " << field_name(ch, mf.action.fields[k])
              << ": max_norm = " << n.max_norm << ", l2_norm = " << n.l2_norm
              << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot open output file: " + out_path);
    for (int i = 0; i < ch.dim(); ++i)
      out << (i ? "," : "") << coord_name(ch, i);
    for (size_t k = 0; k < lifted.size(); ++k)
      out << "," << field_name(ch, mf.action.fields[k]);
    out << "\n";
    const Grid& g = data.grid;
    auto strides = g.strides();
    std::vector<int> idx(g.dim(), 0);
    for (long long flat = 0; flat < g.size(); ++flat) {
      long long rem = flat;
      for (int i = 0; i < g.dim(); ++i) {
        idx[i] = static_cast<int>(rem / strides[i]);
        rem %= strides[i];
      }
      for (int i = 0; i < g.dim(); ++i)
        out << (i ? "," : "") << g.coord(i, idx[i]);
      for (const auto& f : lifted) out << "," << f[flat];
      out << "\n";
    }
    std::cout << "lifted sections written to " << out_path << "\n";
  }
  std::cout << "reconstruction: pass\n";
  return 0;
}

int cmd_verify_kdv(const PipelineOptions& opt, const std::string& out_path) {
  PipelineReport report = verify_kdv_pipeline(opt);
  std::string csv = report_csv(report);
  std::ofstream out(out_path);
  if (!out) throw Error("cannot open output file: " + out_path);
  out << csv;
  out.close();
  std::cout << csv;
  if (!report.passed) {
    std::cerr << "error: " << report.failure << "\n";
    return kExitTolerance;
  }
  std::cout << "verify-kdv: pass\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Routh reduction toolkit for first-order Lagrangian field "
               "theories with cyclic symmetries"};
  app.require_subcommand(1);

  std::string model_path, data_path, out_path;
  bool flat = false;
  double tol = -1.0;

  auto* derive = app.add_subcommand("derive",
      "print the Euler-Lagrange equations and Legendre multipliers");
  derive->add_option("model", model_path, "model file")->required();

  auto* momentum = app.add_subcommand("momentum",
      "print the momentum currents, constraints, and closedness verdict");
  momentum->add_option("model", model_path, "model file")->required();

  auto* reduce = app.add_subcommand("reduce",
      "print the Routhian, reduced Routhian, gyroscopic force, and reduced "
      "equations");
  reduce->add_option("model", model_path, "model file")->required();
  reduce->add_flag("--flat", flat, "use the flat connection (all Gamma = 0)");

  auto* reconstruct = app.add_subcommand("reconstruct",
      "check the flat condition on sampled reduced data and lift it");
  reconstruct->add_option("model", model_path, "model file")->required();
  reconstruct->add_option("--data", data_path, "CSV of sampled reduced data")
      ->required();
  reconstruct->add_flag("--flat", flat,
                        "use the flat connection (all Gamma = 0)");
  reconstruct->add_option("--out", out_path, "CSV output for the lifted fields");
  reconstruct->add_option("--tol", tol, "flat-residual tolerance");

  PipelineOptions opt;
  auto* verify = app.add_subcommand("verify-kdv",
      "run the KdV reduction/reconstruction pipeline and write the CSV report");
  verify->add_option("--c", opt.c, "soliton speed");
  verify->add_option("--nx", opt.nx, "grid points in x");
  verify->add_option("--nt", opt.nt, "grid points in t");
  verify->add_option("--xmin", opt.xmin, "left x boundary");
  verify->add_option("--xmax", opt.xmax, "right x boundary");
  verify->add_option("--tmax", opt.tmax, "final time");
  verify->add_option("--tol", opt.tol_factor, "stage tolerance factor (x h^2)");
  verify->add_option("--out", out_path, "CSV report path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (derive->parsed()) return cmd_derive(model_path);
    if (momentum->parsed()) return cmd_momentum(model_path);
    if (reduce->parsed()) return cmd_reduce(model_path, flat);
    if (reconstruct->parsed())
      return cmd_reconstruct(model_path, data_path, out_path, tol, flat);
    if (verify->parsed()) return cmd_verify_kdv(opt, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
