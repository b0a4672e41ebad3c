#include "npbc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace npbc {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trajectory_csv(const TrajectoryResult& traj) {
  std::ostringstream os;
  os << "n,x\n";
  for (const auto& [n, x] : traj.samples) os << n << "," << fmt_double(x) << "\n";
  return os.str();
}

std::string bifurcation_csv(const std::vector<BifurcationRow>& rows) {
  std::ostringstream os;
  os << "alpha,state\n";
  for (const auto& row : rows) {
    if (row.skipped) continue;
    for (double s : row.states)
      os << fmt_double(row.alpha) << "," << fmt_double(s) << "\n";
  }
  return os.str();
}

std::string region_csv(const StabilityRegion& region) {
  std::ostringstream os;
  os << "alpha,ell,analytic,rate\n";
  for (size_t ia = 0; ia < region.alpha_grid.size(); ++ia)
    for (size_t il = 0; il < region.ell_grid.size(); ++il) {
      size_t cell = ia * region.ell_grid.size() + il;
      os << fmt_double(region.alpha_grid[ia]) << "," << fmt_double(region.ell_grid[il])
         << "," << to_string(region.analytic[cell]) << ","
         << fmt_double(region.rate[cell]) << "\n";
    }
  return os.str();
}

std::string envelope_curve_csv(const EnvelopeCurve& curve) {
  std::ostringstream os;
  os << "x,envel\n";
  for (const auto& [x, e] : curve.curve)
    os << fmt_double(x) << "," << fmt_double(e) << "\n";
  return os.str();
}

std::string threshold_csv(const ThresholdScan& scan) {
  std::ostringstream os;
  os << "alpha,rate\n";
  for (size_t i = 0; i < scan.alpha.size(); ++i)
    os << fmt_double(scan.alpha[i]) << "," << fmt_double(scan.rate[i]) << "\n";
  return os.str();
}

nlohmann::json probe_json(const MapSpec& spec, const MapProbe& probe) {
  nlohmann::json j;
  j["map"]["name"] = spec.name;
  for (const auto& [k, v] : spec.params) j["map"]["params"][k] = v;
  j["K"] = probe.K;
  j["residual"] = probe.residual;
  j["x_max"] = probe.x_max;
  j["f_m"] = probe.f_m;
  j["f2_m"] = probe.f2_m;
  j["L_minus"] = probe.L_minus;
  j["L_plus"] = probe.L_plus;
  if (probe.L0) j["L0"] = *probe.L0;
  j["schwarzian_ok"] = probe.schwarzian_ok;
  j["sides_swapped"] = probe.sides_swapped;
  return j;
}

nlohmann::json certificate_json(const CertificateResult& cert) {
  nlohmann::json j;
  j["alpha0"] = cert.alpha0;
  j["certified"] = cert.certified;
  j["psi_values"] = cert.psi_values;
  j["L_minus"] = cert.L_minus;
  j["L_plus"] = cert.L_plus;
  j["b"] = cert.b;
  if (cert.envelope) {
    j["envelope"]["a"] = cert.envelope->a;
    j["envelope"]["b"] = cert.envelope->b;
    j["envelope"]["c_minus"] = cert.envelope->c_minus;
    j["envelope"]["worst_margin"] = cert.envelope_check.worst_margin;
    j["envelope"]["grid"] = 10000;
  }
  return j;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace npbc
