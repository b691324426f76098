#include "routhft/reconstruct.hpp"

#include <algorithm>
#include <cmath>

namespace routhft {

namespace {

void check_section(const ReducedSectionData& data) {
  data.grid.validate();
  if (data.grid.dim() != data.chart->dim())
    throw Error("section grid does not match the chart");
  if (data.sigma.size() != data.action.fields.size())
    throw Error("section sigma data arity mismatch");
  for (const auto& row : data.sigma)
    if (static_cast<int>(row.size()) != data.grid.dim())
      throw Error("section sigma data arity mismatch");
}

} // namespace

std::vector<std::vector<GridField>> lift_components(const ReducedSectionData& data,
                                                    const ConnectionData& conn) {
  check_section(data);
  const Chart& ch = *data.chart;
  validate_connection(ch, data.action, conn);
  std::vector<int> noncyc;
  for (int a = 0; a < ch.n_fields(); ++a)
    if (std::find(data.action.fields.begin(), data.action.fields.end(), a) ==
        data.action.fields.end())
      noncyc.push_back(a);

  FieldData fd;
  fd.fields = data.fields;
  long long sz = data.grid.size();
  std::vector<std::vector<GridField>> A;
  for (size_t k = 0; k < data.action.fields.size(); ++k) {
    std::vector<GridField> row;
    for (int j = 0; j < ch.dim(); ++j) {
      std::vector<double> acc(data.sigma[k][j].data());
      if (!ex_is_zero(conn.gamma_base[k][j])) {
        auto g = sample_expression(ch, conn.gamma_base[k][j], fd, data.grid);
        for (long long p = 0; p < sz; ++p)
          acc[p] += g[p];
      }
      for (size_t b = 0; b < noncyc.size(); ++b) {
        if (ex_is_zero(conn.gamma_field[k][b]))
          continue;
        const std::string& name = ch.symbol(ch.field_id(noncyc[b])).name;
        auto uit = data.fields.find(name);
        if (uit == data.fields.end())
          throw Error("section data missing field " + name);
        auto du = fd_partial(uit->second, j, 1);
        auto g = sample_expression(ch, conn.gamma_field[k][b], fd, data.grid);
        for (long long p = 0; p < sz; ++p)
          acc[p] += g[p] * du[p];
      }
      row.emplace_back(data.grid, std::move(acc));
    }
    A.push_back(std::move(row));
  }
  return A;
}

FlatResidual flat_residual(const ReducedSectionData& data, const ConnectionData& conn) {
  auto A = lift_components(data, conn);
  FlatResidual out;
  long long sz = data.grid.size();
  for (const auto& row : A) {
    std::map<std::pair<int, int>, GridField> res;
    for (int i = 0; i < data.grid.dim(); ++i)
      for (int j = i + 1; j < data.grid.dim(); ++j) {
        auto dji = fd_partial(row[i], j, 1);
        auto dij = fd_partial(row[j], i, 1);
        std::vector<double> r(sz);
        for (long long p = 0; p < sz; ++p)
          r[p] = dji[p] - dij[p];
        GridField field(data.grid, std::move(r));
        out.max_norm = std::max(out.max_norm, interior_norms(field).max_norm);
        res.insert({{i, j}, std::move(field)});
      }
    out.residual.push_back(std::move(res));
  }
  return out;
}

std::vector<GridField> lift_section(const ReducedSectionData& data,
                                    const ConnectionData& conn,
                                    const std::vector<int>& base_index,
                                    const std::vector<double>& initial_values,
                                    double tol) {
  auto A = lift_components(data, conn);
  const Grid& g = data.grid;
  int m = g.dim();
  if (static_cast<int>(base_index.size()) != m)
    throw Error("lift base point arity mismatch");
  for (int a = 0; a < m; ++a)
    if (base_index[a] < 0 || base_index[a] >= g.npts[a])
      throw Error("lift base point outside the grid");
  if (initial_values.size() != data.action.fields.size())
    throw Error("lift initial values arity mismatch");

  // the residual is a difference of first derivatives of A, so the
  // round-off/truncation scale is set by those derivatives, not by A itself
  double scale = 1.0;
  for (const auto& row : A)
    for (const auto& f : row)
      for (int j = 0; j < m; ++j)
        scale = std::max(scale, interior_norms(fd_partial(f, j, 1)).max_norm);
  double h = g.max_spacing();
  if (tol < 0)
    tol = 10.0 * h * h * scale;
  auto flat = flat_residual(data, conn);
  if (flat.max_norm > tol)
    throw Error("flat condition violated: max residual " +
                std::to_string(flat.max_norm) + " exceeds tolerance " +
                std::to_string(tol) + "; the section does not lift");

  auto st = g.strides();
  long long base_off = 0;
  for (int a = 0; a < m; ++a)
    base_off += base_index[a] * st[a];

  std::vector<GridField> out;
  for (size_t k = 0; k < data.action.fields.size(); ++k) {
    std::vector<double> phi(g.size(), 0.0);
    phi[base_off] = initial_values[k];
    // axis-ordered staircase: after pass `axis`, phi is known wherever the
    // indices beyond `axis` sit at the base point
    for (int axis = 0; axis < m; ++axis) {
      const GridField& Ak = A[k][axis];
      double ha = g.spacing(axis);
      // enumerate the filled sub-grid of axes < axis
      long long lines = 1;
      for (int a = 0; a < axis; ++a)
        lines *= g.npts[a];
      for (long long line = 0; line < lines; ++line) {
        long long off = 0, rem = line;
        for (int a = axis - 1; a >= 0; --a) {
          off += (rem % g.npts[a]) * st[a];
          rem /= g.npts[a];
        }
        for (int a = axis; a < m; ++a)
          off += base_index[a] * st[a];
        // trapezoid away from the base index in both directions
        for (int i = base_index[axis] + 1; i < g.npts[axis]; ++i) {
          long long at = off + (i - base_index[axis]) * st[axis];
          phi[at] = phi[at - st[axis]] +
                    0.5 * ha * (Ak[at - st[axis]] + Ak[at]);
        }
        for (int i = base_index[axis] - 1; i >= 0; --i) {
          long long at = off - (base_index[axis] - i) * st[axis];
          phi[at] = phi[at + st[axis]] -
                    0.5 * ha * (Ak[at + st[axis]] + Ak[at]);
        }
      }
    }
    out.emplace_back(g, std::move(phi));
  }
  return out;
}

} // namespace routhft
