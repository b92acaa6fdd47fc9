#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qline/errors.hpp"

namespace qline {

/// Single uniform transmission-line segment with resistive terminations,
/// a Norton-equivalent source, and point coupling ports.
struct LineSpec {
  double inductance_per_length = 0.0;   // H/m
  double capacitance_per_length = 0.0;  // F/m
  double length = 0.0;                  // m
  double source_position = 0.0;         // m
  double source_resistance = 0.0;       // ohm
  std::optional<double> load_position;  // m
  std::optional<double> load_resistance;
  std::vector<double> coupling_positions;  // m
  double elements_per_min_wavelength = 20.0;

  double wave_speed() const;  // 1/sqrt(LC)
  double impedance() const;   // sqrt(L/C)
  void validate() const;
};

/// Spatial grid for one contiguous section. Port positions are exact nodes:
/// the mesh is subdivided between breakpoints instead of snapping ports.
struct LineMesh {
  Eigen::VectorXd nodes;  // strictly increasing, nodes(0)=0, nodes(n-1)=length
  int source_node = -1;
  int load_node = -1;
  std::vector<int> coupling_nodes;

  int node_count() const { return static_cast<int>(nodes.size()); }
  double max_element() const;
  /// Index of the node at position x (exact up to rounding); throws if none.
  int node_at(double x) const;
};

/// A network of line sections joined by series lumped capacitors.
/// Sections are electrically independent unless a capacitor connects them.
struct NetSection {
  double length = 0.0;
  std::vector<double> ports;  // positions forced onto mesh nodes
};

struct SeriesCap {
  int section_a = 0;
  double pos_a = 0.0;
  int section_b = 0;
  double pos_b = 0.0;
  double capacitance = 0.0;  // F
};

struct NetPort {
  int section = 0;
  double pos = 0.0;
};

struct LineNetwork {
  double inductance_per_length = 0.0;
  double capacitance_per_length = 0.0;
  std::vector<NetSection> sections;
  std::vector<SeriesCap> caps;
  NetPort source;                      // Norton source (V_S in series with R_S)
  double source_resistance = 0.0;
  std::vector<NetPort> loads;          // resistive terminations
  std::vector<double> load_resistances;
  std::vector<NetPort> couplings;      // qubit coupling ports
  double elements_per_min_wavelength = 20.0;

  double wave_speed() const;
  double impedance() const;
};

/// Mesh for a LineNetwork: per-section meshes packed into one global node array.
struct NetworkMesh {
  std::vector<LineMesh> section_meshes;
  std::vector<int> offsets;  // global index of each section's node 0
  int total_nodes = 0;

  int global_node(int section, double pos) const;
};

/// Assembled FETD system for a line or network:
///   [T] phi'' + [R] phi' + [S] phi = {f}
/// with T = LC * mass (+ L*C_k coupler blocks), R the L/R port damping,
/// S the stiffness of the first-order nodal basis.
struct LineSystem {
  using SpMat = Eigen::SparseMatrix<double>;

  SpMat t_step;  // phi'' matrix
  SpMat r;       // phi'  matrix
  SpMat s;       // phi   matrix
  SpMat mass;    // plain FEM mass, for diagnostics
  double l_per_len = 0.0;
  double c_per_len = 0.0;
  int source_node = -1;
  double source_resistance = 0.0;
  std::vector<int> coupling_nodes;

  // stepping state, prepared once per run by set_timestep()
  double dt = 0.0;
  SpMat rhs_b;  // 2T/dt^2 - S
  SpMat rhs_c;  // T/dt^2 - R/(2 dt)
  std::shared_ptr<Eigen::SparseLU<SpMat>> lhs;

  int node_count() const { return static_cast<int>(t_step.rows()); }

  /// Factor the left-hand stepping matrix T/dt^2 + R/(2dt). Must be called
  /// before step_line; the factorization is reused every step.
  void set_timestep(double dt_step);
};

/// Node-flux coefficients at two consecutive integer time levels.
struct LineState {
  Eigen::VectorXd phi_now;   // phi^(j)
  Eigen::VectorXd phi_prev;  // phi^(j-1)
  long step = 0;

  static LineState zero(int n) {
    return LineState{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
  }
};

/// Mesh a single segment so that every port (source, load, couplings) lies on
/// a node and the element size satisfies h <= v / (f_max * elems_per_min_wl).
LineMesh build_line_mesh(const LineSpec& spec, double f_max);

/// Mesh every section of a network with the same sizing rule.
NetworkMesh build_network_mesh(const LineNetwork& net, double f_max);

LineSystem assemble_line(const LineSpec& spec, const LineMesh& mesh);
LineSystem assemble_network(const LineNetwork& net, const NetworkMesh& mesh);

/// Force vector {f}: (L/R_S) N_m(z_S) V_S at the source node plus
/// L 2e beta_k dn_dt_k at each coupling node.
Eigen::VectorXd line_source_vector(const LineSystem& sys, double v_source,
                                   std::span<const double> dn_dt,
                                   std::span<const double> beta);

/// Advance one leapfrog step: solves the prefactored system
/// (T/dt^2 + R/2dt) phi^(j+1) = (2T/dt^2 - S) phi^(j) - (T/dt^2 - R/2dt) phi^(j-1) + f^(j).
void step_line(const LineSystem& sys, LineState& state, const Eigen::VectorXd& f);

/// Port voltage dphi/dt at a node, centred at (j+1/2)dt from the stored levels.
double port_voltage(const LineState& state, const LineSystem& sys, int node);

/// Largest stable time step 2/sqrt(rho(T^{-1} S)), spectral radius by power
/// iteration to 1e-6 relative tolerance.
double line_stability_dt(const LineSystem& sys);

/// Discrete energy of the staggered scheme,
///   1/2 C u^T M u + 1/(2L) phi^(j+1)^T S phi^(j)  with u = (phi^(j+1)-phi^(j))/dt.
/// Exactly conserved by lossless source-free stepping.
double line_discrete_energy(const LineSystem& sys, const LineState& state);

}  // namespace qline
