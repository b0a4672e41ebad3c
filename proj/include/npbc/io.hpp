#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "npbc/dynamics.hpp"
#include "npbc/stability.hpp"
#include "npbc/sweep.hpp"

namespace npbc {

// Round-trip-exact, locale-independent formatting so identical runs produce
// byte-identical artifacts.
std::string fmt_double(double v);

std::string trajectory_csv(const TrajectoryResult& traj);
std::string bifurcation_csv(const std::vector<BifurcationRow>& rows);
std::string region_csv(const StabilityRegion& region);
std::string envelope_curve_csv(const EnvelopeCurve& curve);
std::string threshold_csv(const ThresholdScan& scan);

nlohmann::json probe_json(const MapSpec& spec, const MapProbe& probe);
nlohmann::json certificate_json(const CertificateResult& cert);

void write_file(const std::string& path, const std::string& contents);

}  // namespace npbc
