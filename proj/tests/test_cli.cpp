#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct RunResult {
  int status = -1;
  std::string output; // stdout + stderr interleaved
};

RunResult run(const std::string& args) {
  RunResult r;
  std::string cmd = std::string(ROUTHFT_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0)
    r.output.append(buf.data(), n);
  int rc = pclose(p);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

std::string soliton_csv_path() {
  static std::string path = [] {
    std::string p = "build/cli_soliton.csv";
    std::ofstream out(p);
    out << "t,x,psi,sigma,rho\n";
    const double c = 1.0;
    for (int it = 0; it < 9; ++it)
      for (int jx = 0; jx < 81; ++jx) {
        double t = 0.1 * it, x = -8.0 + 0.2 * jx;
        double u = std::sqrt(c) / 2 * (x - c * t);
        double s = 1.0 / std::cosh(u);
        double rho = c / 2 * s * s;
        double psi = -(c * std::sqrt(c) / 2) * s * s * std::tanh(u);
        char line[256];
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      t, x, psi, -c * rho, rho);
        out << line;
      }
    return p;
  }();
  return path;
}

} // namespace

TEST_CASE("derive prints the KdV Euler-Lagrange system and multipliers") {
  auto r = run("derive models/kdv.model");
  CHECK(r.status == 0);
  CHECK(r.output.find("[phi] phi_tx + psi_xx + 6*phi_x*phi_xx = 0") != std::string::npos);
  CHECK(r.output.find("[psi] -psi + phi_xx = 0") != std::string::npos);
  CHECK(r.output.find("p^t_phi = 1/2*phi_x") != std::string::npos);
  CHECK(r.output.find("p^x_phi = 1/2*phi_t + psi_x + 3*phi_x^2") != std::string::npos);
  CHECK(r.output.find("p^t_psi = 0") != std::string::npos);
  CHECK(r.output.find("p^x_psi = phi_x") != std::string::npos);
}

TEST_CASE("derive output is byte-identical across runs") {
  auto a = run("derive models/kdv.model");
  auto b = run("derive models/kdv.model");
  CHECK(a.output == b.output);
  auto c = run("reduce models/kdv.model --flat");
  auto d = run("reduce models/kdv.model --flat");
  CHECK(c.output == d.output);
}

TEST_CASE("momentum prints currents, both bases, constraints, verdict") {
  auto r = run("momentum models/kdv.model");
  CHECK(r.status == 0);
  CHECK(r.output.find("J_phi = (-1/2*phi_t - psi_x - 3*phi_x^2) dt + 1/2*phi_x dx")
        != std::string::npos);
  CHECK(r.output.find("muhat^t_phi = mu_2") != std::string::npos);
  CHECK(r.output.find("muhat^x_phi = -mu_1") != std::string::npos);
  CHECK(r.output.find("mu_phi = (mu_1) dt + (mu_2) dx") != std::string::npos);
  CHECK(r.output.find("[phi,t] 1/2*phi_x - mu_2 = 0") != std::string::npos);
  CHECK(r.output.find("[phi,x] 1/2*phi_t + psi_x + mu_1 + 3*phi_x^2 = 0")
        != std::string::npos);
  CHECK(r.output.find("closedness: closed") != std::string::npos);
}

TEST_CASE("reduce --flat prints the flat Routhian and reduced equations") {
  auto r = run("reduce models/kdv.model --flat");
  CHECK(r.status == 0);
  CHECK(r.output.find("reduced Routhian R = 1/2*rho*sigma + rho*psi_x + rho*mu_1"
                      " - sigma*mu_2 + 1/2*psi^2 + rho^3") != std::string::npos);
  CHECK(r.output.find("gyroscopic force d(omega_mu) = 0") != std::string::npos);
  CHECK(r.output.find("[psi] -psi + rho_x = 0") != std::string::npos);
  CHECK(r.output.find("[sigma] -1/2*rho + mu_2 = 0") != std::string::npos);
  CHECK(r.output.find("[rho] -1/2*sigma - psi_x - mu_1 - 3*rho^2 = 0")
        != std::string::npos);
}

TEST_CASE("reduce with the declared connection prints the gyroscopic force") {
  auto r = run("reduce models/kdv.model");
  CHECK(r.status == 0);
  CHECK(r.output.find("gyroscopic force d(omega_mu) = (Gamma_psi_t*mu_2 - "
                      "Gamma_psi_x*mu_1 - Gamma_t_psi*mu_2 + Gamma_x_psi*mu_1) "
                      "dt^dx^dpsi") != std::string::npos);
}

TEST_CASE("validation failures exit with status 1") {
  auto r = run("derive models/no_such_file.model");
  CHECK(r.status == 1);
  CHECK(r.output.find("error:") != std::string::npos);
  auto s = run("momentum build/cli_bad_model.model");
  CHECK(s.status == 1);
}

TEST_CASE("reconstruct lifts sampled soliton data") {
  auto r = run("reconstruct models/kdv.model --flat --data " + soliton_csv_path() +
               " --out build/cli_lifted.csv");
  CHECK(r.status == 0);
  CHECK(r.output.find("reconstruction: pass") != std::string::npos);
  // the lifted field matches tanh-profile reconstruction up to the base shift
  std::ifstream in("build/cli_lifted.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x,phi");
  double worst = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    double t, x, phi;
    char comma;
    ss >> t >> comma >> x >> comma >> phi;
    double exact = std::tanh(0.5 * (x - t)) - std::tanh(0.5 * (-8.0));
    worst = std::max(worst, std::abs(phi - exact));
  }
  CHECK(worst < 5e-3);
}

TEST_CASE("reconstruct refuses non-integrable data with exit 2") {
  // corrupt sigma by += x
  std::ifstream in(soliton_csv_path());
  std::ofstream out("build/cli_bad.csv");
  std::string line;
  std::getline(in, line);
  out << line << "\n";
  while (std::getline(in, line)) {
    double t, x, psi, sigma, rho;
    char c;
    std::istringstream ss(line);
    ss >> t >> c >> x >> c >> psi >> c >> sigma >> c >> rho;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", t, x,
                  psi, sigma + x, rho);
    out << buf;
  }
  out.close();
  auto r = run("reconstruct models/kdv.model --flat --data build/cli_bad.csv");
  CHECK(r.status == 2);
  CHECK(r.output.find("does not lift") != std::string::npos);
}

TEST_CASE("verify-kdv writes the CSV report and exits 0") {
  auto r = run("verify-kdv --c 1 --nx 256 --nt 64 --xmin -20 --xmax 20 "
               "--tmax 5 --out build/cli_report.csv");
  CHECK(r.status == 0);
  CHECK(r.output.find("verify-kdv: pass") != std::string::npos);
  std::ifstream in("build/cli_report.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "stage,quantity,max_norm,l2_norm,h,observed_order");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows >= 10);
}

TEST_CASE("verify-kdv rejects an unresolvable grid with exit 1") {
  auto r = run("verify-kdv --c 1 --nx 64 --nt 64 --xmin -20 --xmax 20 "
               "--tmax 5 --out build/cli_report2.csv");
  CHECK(r.status == 1);
  CHECK(r.output.find("does not resolve") != std::string::npos);
}

TEST_CASE("an impossible tolerance makes verify-kdv exit 2") {
  auto r = run("verify-kdv --c 1 --nx 256 --nt 64 --xmin -20 --xmax 20 "
               "--tmax 5 --tol 1e-9 --out build/cli_report3.csv");
  CHECK(r.status == 2);
}
