#pragma once

#include "routhft/expr.hpp"

#include <map>
#include <string>
#include <vector>

namespace routhft {

// Rectangular tensor-product grid, row-major with the last axis fastest.
struct Grid {
  std::vector<double> min, max;
  std::vector<int> npts;
  std::vector<bool> periodic; // empty means all one-sided

  int dim() const { return static_cast<int>(npts.size()); }
  bool is_periodic(int axis) const {
    return !periodic.empty() && periodic[axis];
  }
  double spacing(int axis) const {
    return (max[axis] - min[axis]) /
           (is_periodic(axis) ? npts[axis] : npts[axis] - 1);
  }
  double max_spacing() const;
  double coord(int axis, int i) const { return min[axis] + i * spacing(axis); }
  long long size() const;
  std::vector<long long> strides() const;
  void validate() const; // >= 5 points per axis, max > min
  Grid refined() const;  // 2n-1 points per axis: halves every spacing
};

class GridField {
public:
  GridField(Grid grid, std::vector<double> data); // rejects NaN/Inf
  static GridField zeros(const Grid& grid);
  // sample a callback f(coords) over the grid
  static GridField sample(const Grid& grid,
                          const std::function<double(const std::vector<double>&)>& f);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& data() const { return data_; }
  double operator[](long long i) const { return data_[i]; }
  double& mutable_at(long long i) { return data_[i]; }
  void check_finite() const;

private:
  Grid grid_;
  std::vector<double> data_;
};

// d^order f / d(axis)^order, second-order accurate: centered stencils in
// the interior, matching-order one-sided stencils at non-periodic edges
GridField fd_partial(const GridField& f, int axis, int order);

struct Norms {
  double max_norm = 0;
  double l2_norm = 0;
};

// norms over interior points: 2 boundary layers excluded per non-periodic
// axis; L2 is the grid-weighted sqrt(sum f^2 * prod h), pairwise-summed
Norms interior_norms(const GridField& f);

// named numeric data backing the symbols of a chart
struct FieldData {
  std::map<std::string, GridField> fields; // field and ufunc samples
  std::map<std::string, double> params;
};

// evaluate an expression pointwise over the grid; jets and ufunc
// derivatives resolve through fd_partial of the named samples
GridField sample_expression(const Chart& ch, const Expr& e, const FieldData& data,
                            const Grid& grid);
std::vector<Norms> equation_residual_norms(const Chart& ch,
                                           const std::vector<Expr>& eqs,
                                           const FieldData& data, const Grid& grid);

// rho(t,x) = (c/2) sech^2(sqrt(c) (x - c t - x0) / 2) with analytic
// derivative fields; grid axes are (t, x)
struct SolitonFields {
  GridField rho, rho_t, rho_x, rho_xx, rho_xxx;
};
SolitonFields kdv_soliton_field(double c, double x0, const Grid& grid);

struct ReportRow {
  std::string stage;
  std::string quantity;
  double max_norm = 0;
  double l2_norm = 0;
  double h = 0;
  double observed_order = 0; // 0 marks analytic (round-off) stages
  bool analytic = false;
};

struct PipelineOptions {
  double c = 1.0;
  double x0 = 0.0;
  double xmin = -20.0, xmax = 20.0;
  double tmin = 0.0, tmax = 10.0;
  int nt = 256, nx = 512;
  double tol_factor = 50.0;       // stage gate: tol_factor * h^2 * scale
  double analytic_tol = 1e-10;    // gate for closed-form stages
  double order_lo = 1.8, order_hi = 2.2;
};

struct PipelineReport {
  std::vector<ReportRow> rows;
  bool passed = false;
  std::string failure; // first failing stage and norm
};

// end-to-end check on the KdV model: reduced equations, flat condition,
// reconstruction, unreduced equations, momentum identities; runs the base
// grid and the refinement to measure convergence orders
PipelineReport verify_kdv_pipeline(const PipelineOptions& opt);

// header: stage,quantity,max_norm,l2_norm,h,observed_order
std::string report_csv(const PipelineReport& report);

} // namespace routhft
