#include "bce/gnss/tracking_noise.hpp"

#include <cmath>
#include <stdexcept>

namespace bce::gnss {

TrackingConfig low_grade_tracking() {
  TrackingConfig cfg;
  cfg.fs_mhz = 4.092;
  cfg.d_el_chips = 0.5;
  cfg.b_rho_hz = 2.0;
  cfg.b_phi_hz = 50.0;
  return cfg;
}

TrackingConfig high_grade_tracking() {
  TrackingConfig cfg;
  cfg.fs_mhz = 16.368;
  cfg.d_el_chips = 0.2;
  cfg.b_rho_hz = 1.0;
  cfg.b_phi_hz = 25.0;
  return cfg;
}

void validate(const TrackingConfig& cfg) {
  const bool positive = cfg.fs_mhz > 0.0 && cfg.d_el_chips > 0.0 && cfg.b_rho_hz > 0.0 &&
                        cfg.b_phi_hz > 0.0 && cfg.b_fe_hz > 0.0 && cfg.chip_rate_hz > 0.0 &&
                        cfg.integration_time_s > 0.0;
  if (!positive) {
    throw std::invalid_argument("tracking config: all fields must be positive");
  }
  if (cfg.d_el_chips > 1.0) {
    throw std::invalid_argument("tracking config: d_el_chips must lie in (0, 1]");
  }
}

namespace {

double cn0_linear(double cn0_dbhz) {
  if (!(cn0_dbhz > 0.0)) {
    throw std::invalid_argument("cn0_dbhz must be positive");
  }
  return std::pow(10.0, cn0_dbhz / 10.0);
}

}  // namespace

double pll_sigma_m(const TrackingConfig& cfg, double cn0_dbhz) {
  validate(cfg);
  const double cn0 = cn0_linear(cn0_dbhz);
  const double T = cfg.integration_time_s;
  const double bracket = (cfg.b_phi_hz / cn0) * (1.0 + 1.0 / (2.0 * T * cn0));
  return (kL1WavelengthM / (2.0 * M_PI)) * std::sqrt(bracket);
}

double dll_sigma_chips(const TrackingConfig& cfg, double cn0_dbhz) {
  validate(cfg);
  const double cn0 = cn0_linear(cn0_dbhz);
  const double T = cfg.integration_time_s;
  const double D = cfg.d_el_chips;
  const double B = cfg.b_rho_hz;
  const double fe_tc = cfg.b_fe_hz / cfg.chip_rate_hz;  // b_fe * Tc
  const auto [r, pi_r] = dll_regime_boundaries(cfg);

  if (D >= pi_r) {
    return std::sqrt((B / (2.0 * cn0)) * D * (1.0 + 2.0 / (T * cn0 * (2.0 - D))));
  }
  if (D > r) {
    const double dev = D - 1.0 / fe_tc;
    const double shape = 1.0 / fe_tc + (fe_tc / (M_PI - 1.0)) * dev * dev;
    return std::sqrt((B / (2.0 * cn0)) * shape * (1.0 + 2.0 / (T * cn0 * (2.0 - D))));
  }
  return std::sqrt((B / (2.0 * cn0)) * (1.0 / fe_tc) * (1.0 + 1.0 / (T * cn0)));
}

double dll_sigma_m(const TrackingConfig& cfg, double cn0_dbhz) {
  return dll_sigma_chips(cfg, cn0_dbhz) * (kSpeedOfLight / cfg.chip_rate_hz);
}

std::pair<double, double> dll_regime_boundaries(const TrackingConfig& cfg) {
  const double r = cfg.chip_rate_hz / cfg.b_fe_hz;
  return {r, M_PI * r};
}

}  // namespace bce::gnss
