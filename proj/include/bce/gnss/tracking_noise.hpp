#pragma once

#include <utility>

namespace bce::gnss {

inline constexpr double kSpeedOfLight = 299792458.0;         // m/s
inline constexpr double kL1FrequencyHz = 1575.42e6;           // GPS L1 carrier
inline constexpr double kL1WavelengthM = kSpeedOfLight / kL1FrequencyHz;
inline constexpr double kCaChipRateHz = 1.023e6;              // C/A code
inline constexpr double kChipMeters = kSpeedOfLight / kCaChipRateHz;

// Receiver tracking-loop parameters that set the thermal noise of the code
// and carrier observables.
struct TrackingConfig {
  double fs_mhz = 16.368;            // IQ sampling rate, documentation only
  double d_el_chips = 0.2;           // early-minus-late correlator spacing
  double b_rho_hz = 1.0;             // DLL noise bandwidth
  double b_phi_hz = 25.0;            // PLL noise bandwidth
  double b_fe_hz = 9.66e6;           // front-end bandwidth
  double chip_rate_hz = kCaChipRateHz;
  double integration_time_s = 0.02;  // coherent integration T
};

// Presets patterned on a low-cost and a high-grade receiver configuration.
TrackingConfig low_grade_tracking();
TrackingConfig high_grade_tracking();

// Throws std::invalid_argument unless all fields are positive and
// d_el_chips lies in (0, 1].
void validate(const TrackingConfig& cfg);

// 1-sigma carrier-phase thermal noise in meters:
//   (lambda/2pi) * sqrt( (B_phi/cn0) * (1 + 1/(2*T*cn0)) ),
// cn0 linear = 10^(dBHz/10). Requires cn0_dbhz > 0.
double pll_sigma_m(const TrackingConfig& cfg, double cn0_dbhz);

// 1-sigma code tracking jitter in chips. Three regimes selected by the
// correlator spacing D against r = chip_rate/b_fe:
//   D >= pi*r   wide:    sqrt( B/(2cn0) * D * (1 + 2/(T*cn0*(2-D))) )
//   r < D < pi*r mid:    sqrt( B/(2cn0) * (1/(b_fe*Tc)
//                          + b_fe*Tc/(pi-1) * (D - 1/(b_fe*Tc))^2)
//                          * (1 + 2/(T*cn0*(2-D))) )
//   D <= r      narrow:  sqrt( B/(2cn0) * 1/(b_fe*Tc) * (1 + 1/(T*cn0)) )
// with Tc = 1/chip_rate, so b_fe*Tc = b_fe/chip_rate is dimensionless. The
// mid formula is continuous with both neighbors to well under 1%.
double dll_sigma_chips(const TrackingConfig& cfg, double cn0_dbhz);

// dll_sigma_chips converted to meters via kChipMeters scaled to cfg.chip_rate_hz.
double dll_sigma_m(const TrackingConfig& cfg, double cn0_dbhz);

// The (r, pi*r) correlator spacings where the DLL jitter formula changes.
std::pair<double, double> dll_regime_boundaries(const TrackingConfig& cfg);

}  // namespace bce::gnss
