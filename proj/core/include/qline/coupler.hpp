#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qline/eigenbasis.hpp"
#include "qline/qubit.hpp"
#include "qline/txline.hpp"

namespace qline {

/// Modulated Gaussian drive: A exp(-(t-t0)^2/2sigma^2) cos(2 pi f_d (t-t0) + phase).
struct Pulse {
  double amplitude = 0.0;  // V
  double t0 = 0.0;         // s
  double sigma = 0.0;      // s
  double f_d = 0.0;        // Hz
  double phase = 0.0;      // rad
  std::string area_label;  // e.g. "6pi"; metadata only

  double value(double t) const;
  void validate() const;
};

enum class QubitModel { full, reduced };
enum class CouplingMode { two_way, one_way };

struct RecorderChannel {
  std::string name;
  std::string unit;
  double sample_offset = 0.0;  // in units of dt, relative to the row time
  std::vector<double> samples;
};

/// Append-only uniformly sampled time series.
struct Recorder {
  double dt_sample = 0.0;
  std::vector<RecorderChannel> channels;

  std::size_t rows() const {
    return channels.empty() ? 0 : channels.front().samples.size();
  }
  const RecorderChannel& channel(const std::string& name) const;
  bool has_channel(const std::string& name) const;
  void write_csv(std::ostream& os) const;
};

/// Everything assembled for one co-simulation.
struct CoupledSystem {
  LineSystem line;
  QubitOperators ops;
  EigenBasis basis;
  ReducedModel reduced;
  int qubit_node = -1;

  static CoupledSystem build(LineSystem line_sys, QubitOperators qubit_ops, int n_eig);
};

struct CoupledConfig {
  QubitModel model = QubitModel::reduced;
  CouplingMode mode = CouplingMode::two_way;
  int n_eig = 6;
  double safety = 0.5;        // fraction of the binding stability bound
  double t_total = 0.0;       // s
  int record_every = 8;
  int record_occupations = 4;
  int initial_state = 0;
  std::vector<int> probe_nodes;        // line voltage probes (global node ids)
  std::optional<double> dt_override;   // force a shared dt across paired runs

  void validate() const;
};

struct TimestepInfo {
  double dt = 0.0;
  double line_bound = 0.0;
  double full_bound = 0.0;
  double reduced_bound = 0.0;
  double v_max = 0.0;  // safety-doubled estimate used in the qubit bounds
};

struct CoupledRun {
  Recorder recorder;
  TimestepInfo timestep;
  Eigen::VectorXd final_occupations;
  double final_norm = 0.0;
  double max_port_voltage = 0.0;
};

/// Max |dphi/dt(z0)| over a qubit-free line-only run of the same pulse,
/// multiplied by a safety factor of 2.
double estimate_v_max(const LineSystem& line, int qubit_node, const Pulse& pulse,
                      double t_total, double safety);

/// All three stability bounds plus the selected dt = safety * min(line, model).
TimestepInfo choose_timestep(const CoupledSystem& sys, const CoupledConfig& cfg,
                             const Pulse& pulse);

/// Staggered leapfrog co-simulation. Line steps on integer levels, the qubit
/// on half-integer levels; one-way mode zeroes the semiclassical current
/// source in {f} while the qubit still receives the port voltage.
CoupledRun run_coupled(const CoupledSystem& sys, const CoupledConfig& cfg, const Pulse& pulse);

struct CalibrationResult {
  double amplitude_2pi = 0.0;  // V
  double amplitude = 0.0;      // V, for the requested area
  double p0_at_2pi = 0.0;
  std::vector<std::pair<double, double>> scan;  // (amplitude, final P0) trace
};

/// Scan upward for the first Rabi minimum of final P0, bracket the following
/// maximum, then golden-section to 1e-4 relative in amplitude. Other areas
/// scale the 2pi amplitude linearly.
CalibrationResult calibrate_pulse_area(const CoupledSystem& sys, const CoupledConfig& cfg,
                                       double target_area_rad, double sigma, double f_d,
                                       double a_start = 1e-7, double a_max = 1.0);

/// Re-maximize final P0 in a bracket around `amplitude` (used for even-pi
/// areas where the ground state should return). Same tolerance as above.
double refine_return_amplitude(const CoupledSystem& sys, const CoupledConfig& cfg,
                               const Pulse& pulse, double rel_bracket = 0.10);

}  // namespace qline
