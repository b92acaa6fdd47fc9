#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qline/coupler.hpp"
#include "qline/errors.hpp"
#include "qline/qubit.hpp"

namespace qline {

enum class Topology { plain, through, hanger };

struct LineConfig {
  double inductance = 0.7125e-6;   // H/m
  double capacitance = 285e-12;    // F/m
  Topology topology = Topology::plain;
  double length = 10e-3;           // plain-line length, m
  double feed_length = 1.5e-3;     // m
  std::optional<double> resonator_frequency;  // Hz target (length calibrated)
  std::optional<double> resonator_length;     // m, explicit (skips calibration)
  double coupling_cap = 50e-15;    // F
  double source_resistance = 50.0;
  double load_resistance = 50.0;
  double qubit_offset = 1.1e-3;    // m (ell_T; plain topology: absolute position)
  double elements_per_wavelength = 20.0;
  std::optional<double> mesh_f_max;  // Hz; default derived per experiment
};

struct QubitConfig {
  QubitKind kind = QubitKind::transmon;
  std::optional<double> ej_over_ec;  // with c_sigma
  std::optional<double> c_sigma;     // F
  std::optional<double> e_j_hz;      // explicit energies as frequencies
  std::optional<double> e_c_hz;
  std::optional<double> e_l_hz;
  double n_g = 0.0;
  double beta = 0.0;
  double phi_ext = 0.0;  // rad
  int n_phi = 301;       // phase-mesh nodes

  QubitSpec to_spec() const;
};

struct PulseConfig {
  double sigma = 5e-9;                 // s
  std::optional<double> frequency;     // Hz; absent -> qubit f01
  std::optional<double> area;          // rad (e.g. "6 pi")
  std::optional<double> amplitude;     // V; absent -> calibrated from area
  double phase = 0.0;
  bool refine = false;  // re-maximize ground return at the target area
};

struct RunConfig {
  QubitModel model = QubitModel::reduced;
  CouplingMode coupling = CouplingMode::two_way;
  int n_eig = 6;
  double safety = 0.5;
  std::optional<double> time;  // s; default derived per experiment
  int record_every = 8;
  int occupations = 4;
  int initial_state = 0;
};

struct AnalysisConfig {
  std::optional<double> smooth_time;  // s, trackfreq smoothing window
  std::vector<int> states = {0};      // dispersive: qubit states to measure
};

struct SweepConfig {
  std::string parameter;            // e.g. "line.qubit_offset"
  std::vector<double> values;       // SI
  std::string unit_dimension;       // resolved dimension of the parameter
};

struct ExperimentConfig {
  std::string experiment;  // eigen|simulate|rabi|dispersive|trackfreq|stability|sweep
  LineConfig line;
  QubitConfig qubit;
  PulseConfig pulse;
  RunConfig run;
  AnalysisConfig analysis;
  std::optional<SweepConfig> sweep;
  std::string sweep_experiment;  // experiment executed per sweep point
};

/// Parse the key-value configuration text (sections, SI-with-suffix units).
/// Unknown keys, missing required keys and unit mismatches raise ConfigError
/// anchored to line/column.
ExperimentConfig parse_config(const std::string& text);

/// Canonical text form; parse(serialize(cfg)) == cfg field-for-field.
std::string serialize_config(const ExperimentConfig& cfg);

/// Parse "0.7125 uH/m" style quantities; returns the SI value and checks the
/// dimension tag (frequency, time, length, capacitance, resistance, voltage,
/// angle, inductance_per_length, capacitance_per_length, dimensionless).
double parse_quantity(const std::string& text, const std::string& dimension);

/// Apply a sweep value to a named parameter ("line.qubit_offset", ...).
void apply_parameter(ExperimentConfig& cfg, const std::string& path, double value);

/// Dimension tag of a sweep-able parameter path; throws ConfigError if the
/// path does not exist.
std::string parameter_dimension(const std::string& path);

}  // namespace qline
