#pragma once

#include <functional>

#include "qline/analysis.hpp"
#include "qline/coupler.hpp"
#include "qline/txline.hpp"

namespace qline {

/// A concrete line topology with named measurement/coupling points.
/// Section coordinates: resonator position 0 is the coupled (capacitor) end,
/// `resonator_length` the open end; the qubit offset ell_T is measured from
/// the open end.
struct DeviceLayout {
  LineNetwork network;
  NetPort probe;  // reflection/transmission probe on the input feed
  int resonator_section = -1;
  double resonator_length = 0.0;
  double coupling_cap = 0.0;
  double qubit_offset = 0.0;  // ell_T
  bool has_qubit_port = false;
};

/// Plain matched line: source -- length -- load, optional qubit tap.
DeviceLayout plain_line_device(double l_per_len, double c_per_len, double length, double r_source,
                               double r_load, double qubit_position, bool with_qubit,
                               double eppw = 20.0);

/// Control topology: source feed -- C_k -- half-wave resonator -- C_k -- feed -- load.
DeviceLayout through_resonator_device(double l_per_len, double c_per_len, double feed_length,
                                      double resonator_length, double c_k, double qubit_offset,
                                      double r_source, double r_load, bool with_qubit,
                                      double eppw = 20.0);

/// Readout topology: through feed line with the resonator hanging off a tap
/// via C_k (reflection measured upstream of the tap).
DeviceLayout hanger_resonator_device(double l_per_len, double c_per_len, double feed_length,
                                     double resonator_length, double c_k, double qubit_offset,
                                     double r_source, double r_load, bool with_qubit,
                                     double eppw = 20.0);

/// The matched, qubit-free, resonator-free reference of a device: identical
/// feed sections and mesh breakpoints, capacitors and resonator removed.
DeviceLayout reference_of(const DeviceLayout& dev);

struct LineOnlyRun {
  std::vector<double> probe_voltage;
  double dt = 0.0;
  double dt_sample = 0.0;
};

/// Source-driven line-only run (no qubit) recording dphi/dt at the probe.
LineOnlyRun run_line_only(const DeviceLayout& dev, const Pulse& pulse, double t_total,
                          double f_max_mesh, double safety, int record_every,
                          std::optional<double> dt_override = std::nullopt);

struct ResonatorCalibration {
  double length = 0.0;    // m
  double f_loaded = 0.0;  // Hz, measured at the calibrated length
  int iterations = 0;
};

/// Bisection on resonator length until the simulated reflection-spectrum peak
/// hits the target frequency. `make_device` must map a length to a device.
ResonatorCalibration calibrate_resonator_length(
    const std::function<DeviceLayout(double)>& make_device, double target_hz,
    double length_guess, double f_max_mesh, double safety, double rel_tol = 2e-5);

/// One-shot reflection peak measurement of a (qubit-free) device.
double measure_reflection_peak(const DeviceLayout& dev, double band_lo, double band_hi,
                               double t_total, double f_max_mesh, double safety);

}  // namespace qline
