#include "qline/analysis.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qline {

using constants::electron_charge;
using constants::hbar;
using constants::pi;
using constants::two_pi;

namespace {

std::vector<double> window_values(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::rect) return w;
  if (kind == WindowKind::hann) {
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 * (1.0 - std::cos(two_pi * i / (n - 1)));
    return w;
  }
  // tukey: Hann taper over the leading/trailing 5%, flat in the middle
  const std::size_t taper = static_cast<std::size_t>(0.05 * n);
  for (std::size_t i = 0; i < taper; ++i) {
    const double v = 0.5 * (1.0 - std::cos(pi * i / taper));
    w[i] = v;
    w[n - 1 - i] = v;
  }
  return w;
}

const char* window_name(WindowKind kind) {
  switch (kind) {
    case WindowKind::rect:
      return "rect";
    case WindowKind::hann:
      return "hann";
    default:
      return "tukey05";
  }
}

}  // namespace

Spectrum reflection_spectrum(const std::vector<double>& device_record,
                             const std::vector<double>& reference_record, double dt_sample,
                             WindowKind window, double min_resolution_hz) {
  if (device_record.size() != reference_record.size())
    throw DomainError("device and reference records must share the sample grid");
  const std::size_t n = device_record.size();
  if (n < 16) throw DomainError("record too short");
  if (dt_sample <= 0) throw DomainError("dt_sample must be positive");
  const double record_length = n * dt_sample;
  if (min_resolution_hz > 0 && 1.0 / record_length > min_resolution_hz) {
    std::ostringstream os;
    os << "record too short for " << min_resolution_hz << " Hz resolution: need >= "
       << 1.0 / min_resolution_hz << " s, got " << record_length << " s";
    throw DomainError(os.str());
  }

  const std::vector<double> w = window_values(window, n);
  std::vector<double> reflected(n), incident(n);
  for (std::size_t i = 0; i < n; ++i) {
    reflected[i] = (device_record[i] - reference_record[i]) * w[i];
    incident[i] = reference_record[i] * w[i];
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> f_ref, f_inc;
  fft.fwd(f_ref, reflected);
  fft.fwd(f_inc, incident);

  const std::size_t half = n / 2 + 1;
  Spectrum s;
  s.window = window_name(window);
  s.record_length = record_length;
  s.freq.resize(half);
  s.amplitude.resize(half);
  s.incident_mag.resize(half);
  for (std::size_t k = 0; k < half; ++k) {
    s.freq(k) = k / record_length;
    const std::complex<double> denom = f_inc[k];
    s.incident_mag(k) = std::abs(denom);
    s.amplitude(k) = denom == std::complex<double>(0.0, 0.0)
                         ? std::complex<double>(0.0, 0.0)
                         : f_ref[k] / denom;
  }
  return s;
}

double extract_peak_frequency(const Spectrum& s, const PeakOptions& opt,
                              std::vector<double>* candidates) {
  const Eigen::Index n = s.freq.size();
  std::vector<Eigen::Index> in_band;
  double inc_max = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (s.freq(k) >= opt.band_lo && s.freq(k) <= opt.band_hi) {
      in_band.push_back(k);
      inc_max = std::max(inc_max, s.incident_mag(k));
    }
  }
  if (in_band.size() < 3) throw DomainError("search band contains fewer than 3 bins");

  auto gated = [&](Eigen::Index k) { return s.incident_mag(k) >= opt.gate_rel * inc_max; };

  Eigen::Index i_max = -1;
  double mag_max = 0.0;
  for (Eigen::Index k : in_band) {
    if (!gated(k)) continue;
    const double m = std::abs(s.amplitude(k));
    if (m > mag_max) {
      mag_max = m;
      i_max = k;
    }
  }
  if (i_max <= 0 || i_max >= n - 1) throw DomainError("no usable peak in band");

  // competing local maxima
  std::vector<double> comp;
  for (std::size_t j = 1; j + 1 < in_band.size(); ++j) {
    const Eigen::Index k = in_band[j];
    if (k == i_max || !gated(k)) continue;
    const double m = std::abs(s.amplitude(k));
    if (m >= opt.comparable_frac * mag_max && m > std::abs(s.amplitude(k - 1)) &&
        m > std::abs(s.amplitude(k + 1))) {
      // skip shoulders of the main peak
      if (std::abs(k - i_max) > 2) comp.push_back(s.freq(k));
    }
  }
  if (candidates) *candidates = comp;
  if (opt.strict_single_peak && !comp.empty()) {
    std::ostringstream os;
    os << "ambiguous peak extraction: main " << s.freq(i_max) << " Hz, candidates";
    for (double f : comp) os << " " << f;
    throw DomainError(os.str());
  }

  const double la = std::log(std::abs(s.amplitude(i_max - 1)));
  const double lb = std::log(std::abs(s.amplitude(i_max)));
  const double lc = std::log(std::abs(s.amplitude(i_max + 1)));
  const double denom = la - 2.0 * lb + lc;
  const double delta = denom == 0.0 ? 0.0 : 0.5 * (la - lc) / denom;
  return s.freq(i_max) + delta * (s.freq(1) - s.freq(0));
}

DispersiveResult extract_dispersive_shift(const Spectrum& spectrum_m,
                                          const Spectrum& spectrum_bare, const PeakOptions& opt,
                                          int state) {
  DispersiveResult r;
  r.state = state;
  r.f_peak = extract_peak_frequency(spectrum_m, opt, &r.peak_candidates);
  PeakOptions bare_opt = opt;
  bare_opt.strict_single_peak = true;
  r.f_bare = extract_peak_frequency(spectrum_bare, bare_opt);
  r.chi_hz = r.f_peak - r.f_bare;
  return r;
}

OracleChi perturbation_dispersive_chi(const ReducedModel& model, const ResonatorGeometry& geom,
                                      int level, int n_sum) {
  if (level < 0 || level >= model.size()) throw DomainError("level outside reduced model");
  n_sum = std::min(n_sum, model.size());
  const double v_zp = std::sqrt(hbar * geom.omega_r / (geom.ell_r * geom.c_per_len));
  const double mode = std::cos(pi * geom.ell_t / geom.ell_r);
  const double pref = 2.0 * electron_charge * model.beta / hbar * v_zp * mode;

  OracleChi out;
  double chi = 0.0;
  for (int mp = 0; mp < n_sum; ++mp) {
    if (mp == level) continue;
    const double g = pref * std::abs(model.charge_element(level, mp));
    const double w_mm = (model.energies(level) - model.energies(mp)) / hbar;
    if (std::abs(w_mm - geom.omega_r) < 10.0 * std::abs(g) ||
        std::abs(w_mm + geom.omega_r) < 10.0 * std::abs(g))
      out.near_resonance = true;
    chi += g * g * (1.0 / (w_mm - geom.omega_r) + 1.0 / (w_mm + geom.omega_r));
  }
  out.chi_hz = chi / two_pi;
  return out;
}

FrequencyTrack track_oscillation_frequency(const std::vector<double>& c0_phase,
                                           double dt_sample, int smooth_window) {
  if (c0_phase.size() < 4) throw DomainError("phase record too short");
  if (smooth_window < 1) smooth_window = 1;

  // unwrap
  std::vector<double> phase(c0_phase.size());
  phase[0] = c0_phase[0];
  for (std::size_t i = 1; i < c0_phase.size(); ++i) {
    double d = c0_phase[i] - c0_phase[i - 1];
    while (d > pi) d -= two_pi;
    while (d < -pi) d += two_pi;
    if (std::abs(d) > pi * (1.0 - 1e-9))
      throw DomainError("phase unwrap ambiguity at sample " + std::to_string(i) +
                        "; record with denser sampling or smaller dt");
    phase[i] = phase[i - 1] + d;
  }

  // centred difference then moving average
  std::vector<double> inst(phase.size() - 2);
  for (std::size_t i = 1; i + 1 < phase.size(); ++i)
    inst[i - 1] = (phase[i + 1] - phase[i - 1]) / (2.0 * dt_sample) / two_pi;

  FrequencyTrack track;
  track.smooth_window = smooth_window;
  const std::size_t w = static_cast<std::size_t>(smooth_window);
  for (std::size_t i = 0; i + w <= inst.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < w; ++k) acc += inst[i + k];
    track.offset_hz.push_back(acc / w);
    track.time.push_back((i + 0.5 * w + 1.0) * dt_sample);
  }
  return track;
}

DecayFit fit_exponential_decay(const std::vector<double>& series, double dt_sample) {
  if (series.size() < 10) throw DomainError("need at least 10 samples for a decay fit");
  std::vector<double> logs(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] <= 0.0)
      throw DomainError("non-positive sample at index " + std::to_string(i) +
                        "; exponential fit needs a positive series");
    logs[i] = std::log(series[i]);
  }
  const double n = static_cast<double>(series.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = i * dt_sample;
    st += t;
    sy += logs[i];
    stt += t * t;
    sty += t * logs[i];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double intercept = (sy - slope * st) / n;

  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double fit = intercept + slope * (i * dt_sample);
    ss_res += (logs[i] - fit) * (logs[i] - fit);
    ss_tot += (logs[i] - mean) * (logs[i] - mean);
  }

  DecayFit out;
  out.rate = -slope;
  out.amplitude = std::exp(intercept);
  out.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return out;
}

ResonatorQ resonator_q_oracle(double omega_r, double c_per_len, double ell_r, double c_k,
                              double r_external) {
  if (omega_r <= 0 || c_per_len <= 0 || ell_r <= 0 || r_external <= 0)
    throw DomainError("resonator oracle needs positive parameters");
  if (c_k <= 0)
    throw DomainError("no coupling capacitor: loaded Q is of order unity, outside the "
                      "small-coupling analysis");
  const double coupling = omega_r * c_k * r_external;
  if (coupling >= 0.3)
    throw DomainError("coupling too strong for the small-coupling Q analysis (w C_k R = " +
                      std::to_string(coupling) + ")");
  ResonatorQ out;
  out.q_external = c_per_len * ell_r / (2.0 * omega_r * c_k * c_k * r_external);
  out.kappa = omega_r / out.q_external;
  return out;
}

}  // namespace qline
