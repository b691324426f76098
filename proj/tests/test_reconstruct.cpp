#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "routhft/parser.hpp"
#include "routhft/reconstruct.hpp"

#include <cmath>

using namespace routhft;

namespace {

// the section scaffolding of the KdV example: base (t, x), cyclic phi
struct Scaffold {
  std::shared_ptr<Chart> ch;
  CyclicAction action{{0}};
  Grid grid;
  ReducedSectionData section(GridField sigma, GridField rho) const {
    ReducedSectionData d;
    d.chart = ch;
    d.action = action;
    d.grid = grid;
    d.fields.insert({"psi", GridField::zeros(grid)});
    d.sigma = {{std::move(sigma), std::move(rho)}};
    return d;
  }
  ConnectionData flat() const { return flat_connection(*ch, action); }
};

Scaffold scaffold(int nt = 33, int nx = 41) {
  Scaffold s;
  s.ch = std::make_shared<Chart>(std::vector<std::string>{"t", "x"},
                                 std::vector<std::string>{"phi", "psi"});
  s.grid.min = {0, -2};
  s.grid.max = {2, 2};
  s.grid.npts = {nt, nx};
  return s;
}

} // namespace

TEST_CASE("flat residual vanishes for separated data") {
  auto s = scaffold();
  // sigma = f(t), rho = g(x): d(sigma)/dx = d(rho)/dt = 0
  auto sigma = GridField::sample(s.grid, [](const std::vector<double>& v) {
    return std::sin(v[0]);
  });
  auto rho = GridField::sample(s.grid, [](const std::vector<double>& v) {
    return v[1] * v[1];
  });
  auto r = flat_residual(s.section(sigma, rho), s.flat());
  CHECK(r.max_norm <= 1e-12);
}

TEST_CASE("flat residual of sigma = x is 1 everywhere") {
  auto s = scaffold();
  auto sigma = GridField::sample(s.grid, [](const std::vector<double>& v) { return v[1]; });
  auto r = flat_residual(s.section(sigma, GridField::zeros(s.grid)), s.flat());
  const auto& field = r.residual[0].at({0, 1});
  for (double v : field.data())
    CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("flat residual sees the connection term") {
  auto s = scaffold();
  // Gamma_phi_x = psi with psi = t makes A_x = t, so the residual is
  // d(A_t)/dx - d(A_x)/dt = -1
  auto d = s.section(GridField::zeros(s.grid), GridField::zeros(s.grid));
  d.fields.erase("psi");
  d.fields.insert({"psi", GridField::sample(s.grid, [](const std::vector<double>& v) {
                     return v[0];
                   })});
  ConnectionData conn = s.flat();
  conn.gamma_base[0][1] = parse_expr(*s.ch, "psi");
  auto r = flat_residual(d, conn);
  CHECK(r.residual[0].at({0, 1})[s.grid.size() / 2] == doctest::Approx(-1.0));
}

TEST_CASE("lift of zero data is constant") {
  auto s = scaffold();
  auto phi = lift_section(s.section(GridField::zeros(s.grid), GridField::zeros(s.grid)),
                          s.flat(), {0, 0}, {3.25});
  for (double v : phi[0].data())
    CHECK(v == doctest::Approx(3.25));
}

TEST_CASE("lift of sigma = 1 is phi0 + (t - t0)") {
  auto s = scaffold();
  auto one = GridField::sample(s.grid, [](const std::vector<double>&) { return 1.0; });
  auto phi = lift_section(s.section(one, GridField::zeros(s.grid)), s.flat(), {0, 0},
                          {2.0});
  auto st = s.grid.strides();
  for (int i = 0; i < s.grid.npts[0]; ++i)
    for (int j = 0; j < s.grid.npts[1]; ++j)
      CHECK(phi[0][i * st[0] + j] == doctest::Approx(2.0 + s.grid.coord(0, i)));
}

TEST_CASE("lift refuses non-integrable data and reports the obstruction") {
  auto s = scaffold();
  auto sigma = GridField::sample(s.grid, [](const std::vector<double>& v) { return v[1]; });
  CHECK_THROWS_WITH_AS(
      lift_section(s.section(sigma, GridField::zeros(s.grid)), s.flat(), {0, 0}, {0.0}),
      doctest::Contains("flat condition violated"), Error);
}

TEST_CASE("lift projects back onto the data") {
  auto s = scaffold(65, 81);
  // integrable pair from a potential phi = sin(t) cos(x)
  auto sigma = GridField::sample(s.grid, [](const std::vector<double>& v) {
    return std::cos(v[0]) * std::cos(v[1]);
  });
  auto rho = GridField::sample(s.grid, [](const std::vector<double>& v) {
    return -std::sin(v[0]) * std::sin(v[1]);
  });
  auto phi = lift_section(s.section(sigma, rho), s.flat(), {0, 0},
                          {std::sin(0.0) * std::cos(-2.0)});
  double h = s.grid.max_spacing();
  auto dt = fd_partial(phi[0], 0, 1);
  auto dx = fd_partial(phi[0], 1, 1);
  double err = 0;
  for (long long p = 0; p < s.grid.size(); ++p)
    err = std::max({err, std::abs(dt[p] - sigma[p]), std::abs(dx[p] - rho[p])});
  CHECK(err < 5 * h * h);
  // and matches the exact potential up to quadrature error
  auto exact = GridField::sample(s.grid, [](const std::vector<double>& v) {
    return std::sin(v[0]) * std::cos(v[1]);
  });
  double ferr = 0;
  for (long long p = 0; p < s.grid.size(); ++p)
    ferr = std::max(ferr, std::abs(phi[0][p] - exact[p]));
  CHECK(ferr < 5 * h * h);
}

TEST_CASE("lifts from opposite corners agree up to quadrature error") {
  auto s = scaffold(65, 81);
  auto sigma = GridField::sample(s.grid, [](const std::vector<double>& v) {
    return std::cos(v[0]) * std::cos(v[1]);
  });
  auto rho = GridField::sample(s.grid, [](const std::vector<double>& v) {
    return -std::sin(v[0]) * std::sin(v[1]);
  });
  auto data = s.section(sigma, rho);
  auto a = lift_section(data, s.flat(), {0, 0}, {0.0});
  std::vector<int> corner{s.grid.npts[0] - 1, s.grid.npts[1] - 1};
  auto st = s.grid.strides();
  long long coff = corner[0] * st[0] + corner[1] * st[1];
  auto b = lift_section(data, s.flat(), corner, {a[0][coff]});
  double h = s.grid.max_spacing();
  double err = 0;
  for (long long p = 0; p < s.grid.size(); ++p)
    err = std::max(err, std::abs(a[0][p] - b[0][p]));
  CHECK(err < 10 * h * h);
}

TEST_CASE("lift argument validation") {
  auto s = scaffold();
  auto d = s.section(GridField::zeros(s.grid), GridField::zeros(s.grid));
  CHECK_THROWS_AS(lift_section(d, s.flat(), {0}, {0.0}), Error);
  CHECK_THROWS_AS(lift_section(d, s.flat(), {0, 99}, {0.0}), Error);
  CHECK_THROWS_AS(lift_section(d, s.flat(), {0, 0}, {}), Error);
}

TEST_CASE("soliton reconstruction matches the tanh closed form") {
  auto s = scaffold();
  s.grid.min = {0, -12};
  s.grid.max = {2, 12};
  s.grid.npts = {65, 385};
  double c = 1.0;
  auto sol = kdv_soliton_field(c, 0.0, s.grid);
  std::vector<double> sg(s.grid.size());
  for (long long p = 0; p < s.grid.size(); ++p)
    sg[p] = c * sol.rho[p] - 6 * sol.rho[p] * sol.rho[p] - 2 * sol.rho_xx[p];
  auto data = s.section(GridField(s.grid, std::move(sg)), sol.rho);
  double rc = std::sqrt(c);
  auto exact = GridField::sample(s.grid, [&](const std::vector<double>& v) {
    return rc * std::tanh(0.5 * rc * (v[1] - c * v[0]));
  });
  auto phi = lift_section(data, s.flat(), {0, 0}, {exact[0]});
  double h = s.grid.max_spacing();
  double err = 0;
  for (long long p = 0; p < s.grid.size(); ++p)
    err = std::max(err, std::abs(phi[0][p] - exact[p]));
  CHECK(err < 10 * h * h);
}
