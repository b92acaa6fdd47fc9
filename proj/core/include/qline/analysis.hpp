#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qline/eigenbasis.hpp"
#include "qline/errors.hpp"

namespace qline {

enum class WindowKind { rect, tukey, hann };

/// One-sided ratio spectrum of a reflected record against an incident
/// reference. `incident_mag` is kept for gating peak searches to frequencies
/// the source actually excited.
struct Spectrum {
  Eigen::VectorXd freq;          // Hz, nonnegative bins only
  Eigen::VectorXcd amplitude;    // reflected/incident ratio
  Eigen::VectorXd incident_mag;  // |F(incident)|
  std::string window;
  double record_length = 0.0;  // s

  double resolution_hz() const { return 1.0 / record_length; }
};

/// Isolate the reflected wave as (device - reference) and form the ratio
/// spectrum. Both records must share the sample grid; the reference comes
/// from a matched, qubit-free, resonator-free line.
Spectrum reflection_spectrum(const std::vector<double>& device_record,
                             const std::vector<double>& reference_record, double dt_sample,
                             WindowKind window = WindowKind::tukey,
                             double min_resolution_hz = 0.0);

struct PeakOptions {
  double band_lo = 0.0;  // Hz
  double band_hi = 0.0;
  double gate_rel = 0.02;          // incident-support gate vs in-band max
  bool strict_single_peak = true;  // ambiguity error when competitors exist
  double comparable_frac = 0.5;    // competitor threshold vs the main peak
};

/// Peak location by parabolic interpolation over log-magnitude on the three
/// bins around the maximum. With strict_single_peak, competing local maxima
/// above comparable_frac of the main peak raise a DomainError listing them.
double extract_peak_frequency(const Spectrum& s, const PeakOptions& opt,
                              std::vector<double>* candidates = nullptr);

struct DispersiveResult {
  int state = 0;
  double f_peak = 0.0;  // Hz, loaded resonance with the qubit in `state`
  double f_bare = 0.0;  // Hz
  double chi_hz = 0.0;  // f_peak - f_bare
  double interp_curvature = 0.0;        // log-magnitude parabola curvature
  std::vector<double> peak_candidates;  // from the state-m spectrum
};

DispersiveResult extract_dispersive_shift(const Spectrum& spectrum_m,
                                          const Spectrum& spectrum_bare, const PeakOptions& opt,
                                          int state);

/// Geometry of the resonator seen by the cavity-QED perturbation oracle.
struct ResonatorGeometry {
  double omega_r = 0.0;    // rad/s, measured loaded resonance
  double ell_r = 0.0;      // m
  double ell_t = 0.0;      // m, qubit offset from the open end
  double c_per_len = 0.0;  // F/m
};

struct OracleChi {
  double chi_hz = 0.0;
  bool near_resonance = false;  // some denominator within 10 |g|
};

/// 2nd-order dispersive shift of the resonator with the qubit in `level`:
/// g_mm' = (2 e beta / hbar) sqrt(hbar w_r / (l_r C)) cos(pi l_T / l_r) <m|n|m'>,
/// chi_mm' = |g_mm'|^2 / (w_mm' - w_r), chi_m = sum_m' (chi_mm' - chi_m'm).
OracleChi perturbation_dispersive_chi(const ReducedModel& model, const ResonatorGeometry& geom,
                                      int level, int n_sum = 10);

struct FrequencyTrack {
  std::vector<double> time;       // s
  std::vector<double> offset_hz;  // instantaneous frequency minus reference
  int smooth_window = 0;          // samples, documented in outputs
};

/// Smoothed derivative of the unwrapped phase of c0, minus the free-evolution
/// reference (zero after E0-referencing). Per-sample jumps above pi raise a
/// DomainError advising denser sampling.
FrequencyTrack track_oscillation_frequency(const std::vector<double>& c0_phase,
                                           double dt_sample, int smooth_window);

struct DecayFit {
  double rate = 0.0;       // 1/s
  double amplitude = 0.0;  // value extrapolated to t = 0
  double r_squared = 0.0;
};

/// Linear least squares on log(series); series must be positive with at
/// least 10 samples.
DecayFit fit_exponential_decay(const std::vector<double>& series, double dt_sample);

struct ResonatorQ {
  double q_external = 0.0;
  double kappa = 0.0;  // power decay rate omega_r / Q, 1/s
};

/// External Q of a capacitively coupled half-wave resonator,
/// Q = C l_r / (2 w C_k^2 R_ext); hanger taps see R_ext = Z0/2. Declines
/// validity outside the small-coupling regime (w C_k R_ext >= 0.3).
ResonatorQ resonator_q_oracle(double omega_r, double c_per_len, double ell_r, double c_k,
                              double r_external);

}  // namespace qline
