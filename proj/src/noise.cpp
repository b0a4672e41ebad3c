#include "npbc/noise.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "npbc/numerics.hpp"

namespace npbc {

namespace {

void validate_atoms(const std::vector<std::pair<double, double>>& atoms) {
  if (atoms.empty()) throw std::invalid_argument("discrete noise: no atoms");
  double mass = 0.0;
  bool atom_at_one = false;
  for (const auto& [u, psi] : atoms) {
    if (!(u > 0.0 && u <= 1.0))
      throw std::invalid_argument("discrete noise: atom values must lie in (0, 1]");
    if (!(psi > 0.0)) throw std::invalid_argument("discrete noise: atom mass must be positive");
    if (u == 1.0) atom_at_one = true;
    mass += psi;
  }
  if (std::fabs(mass - 0.5) > 1e-12)
    throw std::invalid_argument("discrete noise: one-sided masses must sum to 1/2");
  if (!atom_at_one)
    throw std::invalid_argument("discrete noise: an atom at 1 is required");
}

// script-L factor (1-beta)L - beta at beta = alpha + ell*u.
inline double factor(double L, double alpha, double ell, double u) {
  double beta = alpha + ell * u;
  return (1.0 - beta) * L - beta;
}

}  // namespace

NoiseSpec NoiseSpec::bernoulli() {
  NoiseSpec n;
  n.kind = Kind::Bernoulli;
  n.mu2 = 1.0;
  return n;
}

NoiseSpec NoiseSpec::uniform() {
  NoiseSpec n;
  n.kind = Kind::Uniform;
  n.mu2 = 1.0 / 3.0;
  return n;
}

NoiseSpec NoiseSpec::discrete(const std::vector<std::pair<double, double>>& atoms) {
  validate_atoms(atoms);
  NoiseSpec n;
  n.kind = Kind::Discrete;
  n.atoms = atoms;
  n.mu2 = 0.0;
  for (const auto& [u, psi] : atoms) n.mu2 += 2.0 * u * u * psi;
  return n;
}

NoiseSpec NoiseSpec::from_json(const nlohmann::json& doc) {
  std::string kind = doc.at("kind").get<std::string>();
  if (kind == "bernoulli") return bernoulli();
  if (kind == "uniform") return uniform();
  if (kind == "discrete") {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : doc.at("atoms"))
      atoms.emplace_back(a.at("u").get<double>(), a.at("mass").get<double>());
    return discrete(atoms);
  }
  throw std::invalid_argument("unknown noise kind: " + kind);
}

nlohmann::json NoiseSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_name();
  j["mu2"] = mu2;
  if (kind == Kind::Discrete) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [u, psi] : atoms) arr.push_back({{"u", u}, {"mass", psi}});
    j["atoms"] = arr;
  }
  return j;
}

std::string NoiseSpec::kind_name() const {
  switch (kind) {
    case Kind::Bernoulli: return "bernoulli";
    case Kind::Uniform: return "uniform";
    default: return "discrete";
  }
}

double sample(const NoiseSpec& noise, RngStream& stream) {
  switch (noise.kind) {
    case NoiseSpec::Kind::Bernoulli:
      return (stream.next_u64() & 1u) ? 1.0 : -1.0;
    case NoiseSpec::Kind::Uniform:
      return 2.0 * stream.u01() - 1.0;
    default: {
      double v = stream.u01();  // in [0,1): first bit picks the sign
      double sign = 1.0;
      if (v >= 0.5) {
        sign = -1.0;
        v -= 0.5;
      }
      double acc = 0.0;
      for (const auto& [u, psi] : noise.atoms) {
        acc += psi;
        if (v < acc) return sign * u;
      }
      return sign * noise.atoms.back().first;
    }
  }
}

std::optional<double> expected_log_L0(double L0, double alpha, double ell,
                                      const NoiseSpec& noise) {
  if (!(L0 > 1.0)) throw std::invalid_argument("expected_log_L0: L0 must exceed 1");
  if (ell < 0.0) throw std::invalid_argument("expected_log_L0: ell must be >= 0");
  // The factor is decreasing in the noise value, so positivity on the whole
  // support reduces to positivity at u = +1.
  if (!(factor(L0, alpha, ell, 1.0) > 0.0)) return std::nullopt;
  switch (noise.kind) {
    case NoiseSpec::Kind::Bernoulli: {
      double a = L0 - alpha * (L0 + 1.0);
      double b = ell * (L0 + 1.0);
      return 0.5 * std::log(a * a - b * b);
    }
    case NoiseSpec::Kind::Uniform: {
      if (ell == 0.0) return std::log(factor(L0, alpha, 0.0, 0.0));
      return adaptive_simpson(
          [&](double u) { return 0.5 * std::log(factor(L0, alpha, ell, u)); }, -1.0,
          1.0, 1e-10);
    }
    default: {
      double acc = 0.0;
      for (const auto& [u, psi] : noise.atoms)
        acc += psi * (std::log(factor(L0, alpha, ell, u)) +
                      std::log(factor(L0, alpha, ell, -u)));
      return acc;
    }
  }
}

std::optional<double> expected_log_pair(double L_minus, double L_plus, double alpha,
                                        double ell, const NoiseSpec& noise) {
  if (ell < 0.0) throw std::invalid_argument("expected_log_pair: ell must be >= 0");
  if (!(factor(L_minus, alpha, ell, 1.0) > 0.0) ||
      !(factor(L_plus, alpha, ell, 1.0) > 0.0))
    return std::nullopt;
  auto ln_pair = [&](double u) {
    return std::log(factor(L_minus, alpha, ell, u)) +
           std::log(factor(L_plus, alpha, ell, u));
  };
  switch (noise.kind) {
    case NoiseSpec::Kind::Bernoulli:
      return 0.5 * (ln_pair(1.0) + ln_pair(-1.0));
    case NoiseSpec::Kind::Uniform: {
      if (ell == 0.0) return ln_pair(0.0);
      return adaptive_simpson([&](double u) { return 0.5 * ln_pair(u); }, -1.0, 1.0,
                              1e-10);
    }
    default: {
      double acc = 0.0;
      for (const auto& [u, psi] : noise.atoms)
        acc += psi * (ln_pair(u) + ln_pair(-u));
      return acc;
    }
  }
}

}  // namespace npbc
