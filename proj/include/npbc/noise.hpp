#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "npbc/common.hpp"
#include "npbc/rng.hpp"

namespace npbc {

// Bounded symmetric zero-mean i.i.d. noise on [-1, 1].  The law must put mass
// arbitrarily close to 1; for the discrete kind this is enforced by requiring
// an atom exactly at 1.
struct NoiseSpec {
  enum class Kind { Bernoulli, Uniform, Discrete };

  Kind kind = Kind::Bernoulli;
  // One-sided atoms (u in (0,1], mass), mirrored to -u with equal mass.
  // Masses sum to 1/2.  Only used for Kind::Discrete.
  std::vector<std::pair<double, double>> atoms;
  double mu2 = 1.0;  // second moment

  static NoiseSpec bernoulli();
  static NoiseSpec uniform();
  static NoiseSpec discrete(const std::vector<std::pair<double, double>>& atoms);
  static NoiseSpec from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  std::string kind_name() const;
};

// One i.i.d. draw of the noise variable.
double sample(const NoiseSpec& noise, RngStream& stream);

// E ln L0(alpha + ell*xi) with L0(beta) = L0 - beta*(L0+1).
// Returns nullopt when some factor is non-positive on the support
// (condition-infeasible, distinct from a numeric failure).
std::optional<double> expected_log_L0(double L0, double alpha, double ell,
                                      const NoiseSpec& noise);

// E ln[Lm(alpha + ell*xi) * Lp(alpha + ell*xi)] with L(beta) = (1-beta)L - beta.
std::optional<double> expected_log_pair(double L_minus, double L_plus, double alpha,
                                        double ell, const NoiseSpec& noise);

}  // namespace npbc
