#include "qline/devices.hpp"

#include <cmath>

namespace qline {

DeviceLayout plain_line_device(double l_per_len, double c_per_len, double length, double r_source,
                               double r_load, double qubit_position, bool with_qubit,
                               double eppw) {
  DeviceLayout dev;
  auto& net = dev.network;
  net.inductance_per_length = l_per_len;
  net.capacitance_per_length = c_per_len;
  net.elements_per_min_wavelength = eppw;
  net.sections.push_back({length, {}});
  net.source = {0, 0.0};
  net.source_resistance = r_source;
  net.loads.push_back({0, length});
  net.load_resistances.push_back(r_load);
  if (with_qubit) {
    net.couplings.push_back({0, qubit_position});
    dev.has_qubit_port = true;
    dev.qubit_offset = qubit_position;
  }
  dev.probe = {0, 0.25 * length};
  net.sections[0].ports.push_back(dev.probe.pos);
  return dev;
}

DeviceLayout through_resonator_device(double l_per_len, double c_per_len, double feed_length,
                                      double resonator_length, double c_k, double qubit_offset,
                                      double r_source, double r_load, bool with_qubit,
                                      double eppw) {
  if (qubit_offset <= 0 || qubit_offset >= resonator_length)
    throw DomainError("qubit offset must lie inside the resonator");
  DeviceLayout dev;
  auto& net = dev.network;
  net.inductance_per_length = l_per_len;
  net.capacitance_per_length = c_per_len;
  net.elements_per_min_wavelength = eppw;
  net.sections.push_back({feed_length, {}});       // 0: input feed
  net.sections.push_back({resonator_length, {}});  // 1: resonator
  net.sections.push_back({feed_length, {}});       // 2: output feed
  net.caps.push_back({0, feed_length, 1, 0.0, c_k});
  net.caps.push_back({1, resonator_length, 2, 0.0, c_k});
  net.source = {0, 0.0};
  net.source_resistance = r_source;
  net.loads.push_back({2, feed_length});
  net.load_resistances.push_back(r_load);
  if (with_qubit) {
    // position 0 is the input-side end; the "open end" label of ell_T refers
    // to the output-side end here for symmetry with the hanger device
    net.couplings.push_back({1, resonator_length - qubit_offset});
    dev.has_qubit_port = true;
  }
  dev.resonator_section = 1;
  dev.resonator_length = resonator_length;
  dev.coupling_cap = c_k;
  dev.qubit_offset = qubit_offset;
  dev.probe = {0, 0.5 * feed_length};
  net.sections[0].ports.push_back(dev.probe.pos);
  return dev;
}

DeviceLayout hanger_resonator_device(double l_per_len, double c_per_len, double feed_length,
                                     double resonator_length, double c_k, double qubit_offset,
                                     double r_source, double r_load, bool with_qubit,
                                     double eppw) {
  if (qubit_offset <= 0 || qubit_offset >= resonator_length)
    throw DomainError("qubit offset must lie inside the resonator");
  DeviceLayout dev;
  auto& net = dev.network;
  net.inductance_per_length = l_per_len;
  net.capacitance_per_length = c_per_len;
  net.elements_per_min_wavelength = eppw;
  const double tap = 0.5 * feed_length;
  net.sections.push_back({feed_length, {tap}});    // 0: through feed
  net.sections.push_back({resonator_length, {}});  // 1: hanging resonator
  net.caps.push_back({0, tap, 1, 0.0, c_k});
  net.source = {0, 0.0};
  net.source_resistance = r_source;
  net.loads.push_back({0, feed_length});
  net.load_resistances.push_back(r_load);
  if (with_qubit) {
    net.couplings.push_back({1, resonator_length - qubit_offset});
    dev.has_qubit_port = true;
  }
  dev.resonator_section = 1;
  dev.resonator_length = resonator_length;
  dev.coupling_cap = c_k;
  dev.qubit_offset = qubit_offset;
  dev.probe = {0, 0.5 * tap};
  net.sections[0].ports.push_back(dev.probe.pos);
  return dev;
}

DeviceLayout reference_of(const DeviceLayout& dev) {
  // Keep only the source/probe feed section with its exact breakpoints, so
  // the incident wave at the probe matches the device run to rounding. Taps
  // at the section ends become matched terminations; interior taps just
  // disappear (the through line already continues to its own load).
  const int keep = dev.probe.section;
  const auto& src_net = dev.network;
  if (dev.network.source.section != keep)
    throw DomainError("reference line requires source and probe on the same section");

  DeviceLayout ref;
  ref.probe = {0, dev.probe.pos};
  auto& net = ref.network;
  net.inductance_per_length = src_net.inductance_per_length;
  net.capacitance_per_length = src_net.capacitance_per_length;
  net.elements_per_min_wavelength = src_net.elements_per_min_wavelength;
  net.sections.push_back(src_net.sections[keep]);
  net.source = {0, src_net.source.pos};
  net.source_resistance = src_net.source_resistance;

  for (std::size_t i = 0; i < src_net.loads.size(); ++i) {
    if (src_net.loads[i].section == keep) {
      net.loads.push_back({0, src_net.loads[i].pos});
      net.load_resistances.push_back(src_net.load_resistances[i]);
    }
  }
  const double len = src_net.sections[keep].length;
  const double z0 = src_net.impedance();
  for (const auto& cap : src_net.caps) {
    for (const auto& [sec, pos] : {std::pair{cap.section_a, cap.pos_a},
                                   std::pair{cap.section_b, cap.pos_b}}) {
      if (sec != keep) continue;
      const bool at_end = pos < 1e-12 * len || pos > len * (1.0 - 1e-12);
      if (at_end) {
        net.loads.push_back({0, pos});
        net.load_resistances.push_back(z0);
      } else {
        net.sections[0].ports.push_back(pos);  // keep the mesh breakpoint
      }
    }
  }
  return ref;
}

LineOnlyRun run_line_only(const DeviceLayout& dev, const Pulse& pulse, double t_total,
                          double f_max_mesh, double safety, int record_every,
                          std::optional<double> dt_override) {
  const NetworkMesh mesh = build_network_mesh(dev.network, f_max_mesh);
  LineSystem sys = assemble_network(dev.network, mesh);
  const double dt = dt_override ? *dt_override : safety * line_stability_dt(sys);
  sys.set_timestep(dt);

  const int probe = mesh.global_node(dev.probe.section, dev.probe.pos);
  LineState state = LineState::zero(sys.node_count());
  Eigen::VectorXd f = Eigen::VectorXd::Zero(sys.node_count());
  const double src_coeff = sys.l_per_len / sys.source_resistance;
  const long steps = static_cast<long>(t_total / dt);

  LineOnlyRun out;
  out.dt = dt;
  out.dt_sample = dt * record_every;
  out.probe_voltage.reserve(static_cast<std::size_t>(steps / record_every) + 1);
  for (long j = 0; j < steps; ++j) {
    if (j % record_every == 0)
      out.probe_voltage.push_back(j == 0 ? 0.0 : port_voltage(state, sys, probe));
    f(sys.source_node) = src_coeff * pulse.value(j * dt);
    step_line(sys, state, f);
  }
  return out;
}

double measure_reflection_peak(const DeviceLayout& dev, double band_lo, double band_hi,
                               double t_total, double f_max_mesh, double safety) {
  const double f_c = 0.5 * (band_lo + band_hi);
  Pulse pulse;
  pulse.amplitude = 1e-6;
  pulse.sigma = 1.0 / (constants::two_pi * 0.05 * f_c);  // ~5% fractional bandwidth
  pulse.t0 = 6.0 * pulse.sigma;
  pulse.f_d = f_c;

  // shared dt and cadence between device and reference
  const NetworkMesh mesh = build_network_mesh(dev.network, f_max_mesh);
  LineSystem sys = assemble_network(dev.network, mesh);
  const double dt = safety * line_stability_dt(sys);
  const int record_every = std::max(1, static_cast<int>(1.0 / (8.0 * band_hi * dt)));

  LineOnlyRun device = run_line_only(dev, pulse, t_total, f_max_mesh, safety, record_every, dt);
  LineOnlyRun ref =
      run_line_only(reference_of(dev), pulse, t_total, f_max_mesh, safety, record_every, dt);
  const std::size_t n = std::min(device.probe_voltage.size(), ref.probe_voltage.size());
  device.probe_voltage.resize(n);
  ref.probe_voltage.resize(n);

  const Spectrum s =
      reflection_spectrum(device.probe_voltage, ref.probe_voltage, device.dt_sample);
  PeakOptions opt;
  opt.band_lo = band_lo;
  opt.band_hi = band_hi;
  opt.strict_single_peak = false;
  return extract_peak_frequency(s, opt);
}

ResonatorCalibration calibrate_resonator_length(
    const std::function<DeviceLayout(double)>& make_device, double target_hz,
    double length_guess, double f_max_mesh, double safety, double rel_tol) {
  const double band_lo = 0.85 * target_hz;
  const double band_hi = 1.15 * target_hz;

  // record long enough to resolve the loaded linewidth
  auto record_time = [&](const DeviceLayout& dev) {
    const double z0 = dev.network.impedance();
    double kappa = 0.1 * target_hz;
    try {
      kappa = resonator_q_oracle(constants::two_pi * target_hz,
                                 dev.network.capacitance_per_length, dev.resonator_length,
                                 dev.coupling_cap, 0.5 * z0)
                  .kappa;
    } catch (const DomainError&) {
    }
    return std::max(12.0 / kappa, 3000.0 / target_hz);
  };

  auto peak_at = [&](double len) {
    const DeviceLayout dev = make_device(len);
    return measure_reflection_peak(dev, band_lo, band_hi, record_time(dev), f_max_mesh, safety);
  };

  // loading and dispersion shift the peak by well under 5%
  double lo = 0.90 * length_guess, hi = 1.06 * length_guess;
  double f_lo = peak_at(lo), f_hi = peak_at(hi);
  if ((f_lo - target_hz) * (f_hi - target_hz) > 0)
    throw CalibrationError("resonator length bracket does not straddle the target frequency");

  ResonatorCalibration cal;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = peak_at(mid);
    cal.iterations = it + 1;
    cal.length = mid;
    cal.f_loaded = f_mid;
    if (std::abs(f_mid - target_hz) <= rel_tol * target_hz || hi - lo <= rel_tol * mid) break;
    if ((f_mid - target_hz) * (f_lo - target_hz) > 0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return cal;
}

}  // namespace qline
