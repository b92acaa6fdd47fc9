#pragma once

#include <Eigen/Dense>
#include <optional>

#include "qline/banded.hpp"
#include "qline/constants.hpp"
#include "qline/errors.hpp"

namespace qline {

enum class QubitKind { transmon, fluxonium };

/// Physical qubit parameters. Energies in joules, capacitances in farads.
struct QubitSpec {
  QubitKind kind = QubitKind::transmon;
  double e_j = 0.0;
  double e_c = 0.0;
  double c_sigma = 0.0;  // informational when e_c given directly
  double beta = 0.0;     // C_g / C_Sigma voltage divider
  double n_g = 0.0;      // transmon offset charge
  double e_l = 0.0;      // fluxonium inductive energy
  double phi_ext = 0.0;  // fluxonium flux offset, radians

  void validate() const;

  /// E_C = e^2 / (2 C_Sigma), E_J = ratio * E_C.
  static QubitSpec transmon_from_c_sigma(double ej_over_ec, double c_sigma, double n_g,
                                         double beta);
  static QubitSpec fluxonium_from_frequencies(double ej_hz, double ec_hz, double el_hz,
                                              double phi_ext, double beta);
};

/// Uniform grid over the phase coordinate. Periodic (transmon): the first and
/// last node are identified and `nodes` holds the distinct unknowns on
/// [-pi, pi). Dirichlet (fluxonium): boundary nodes are eliminated and `nodes`
/// holds the interior unknowns of [-half_width, half_width].
struct PhaseMesh {
  bool periodic = true;
  double half_width = constants::pi;
  double h = 0.0;
  Eigen::VectorXd nodes;

  int unknowns() const { return static_cast<int>(nodes.size()); }

  static PhaseMesh transmon(int n_nodes);
  static PhaseMesh fluxonium(int n_nodes, double half_width = 6.0 * constants::pi);
};

/// Assembled phase-basis FETD operators. All stencils are (wrap-)tridiagonal
/// for first-order elements.
struct QubitOperators {
  QubitSpec spec;
  PhaseMesh mesh;
  WrapTridiag e_mass;     // [E]
  WrapTridiag kinetic;    // [N]
  WrapTridiag charge;     // [Q], real antisymmetric
  WrapTridiag potential;  // [V] cosine-weighted (fluxonium: cos(phi + phi_ext))
  WrapTridiag quad;       // [W] phi^2-weighted, fluxonium only
  WrapTridiag h0;         // free Hamiltonian stencil
  WrapTridiagFactor e_factor;

  Eigen::MatrixXcd h0_dense() const { return h0.dense(); }
  Eigen::MatrixXcd e_dense() const { return e_mass.dense(); }
};

/// Complex wavefunction coefficients on the staggered half-integer grid.
struct WavefunctionState {
  Eigen::VectorXcd a_next;  // a^(j+1/2)
  Eigen::VectorXcd a_prev;  // a^(j-1/2)
  long step = 0;
};

/// H0 = 4 E_C [N] + i 8 n_g E_C [Q] + 4 E_C n_g^2 [E] - E_J [V], periodic wrap.
QubitOperators assemble_transmon_operators(const QubitSpec& spec, const PhaseMesh& mesh);

/// H0 = 4 E_C [N] - E_J [V(phi_ext)] + 1/2 E_L [W], boundary rows eliminated.
QubitOperators assemble_fluxonium_operators(const QubitSpec& spec, const PhaseMesh& mesh);

QubitOperators assemble_operators(const QubitSpec& spec, const PhaseMesh& mesh);

/// <n> = Im(a^H [Q] a); the real residue (antisymmetry violation) is discarded.
double charge_expectation(const Eigen::VectorXcd& a, const QubitOperators& ops);

/// Squared E-norm a^H [E] a (monitored, never enforced).
double wavefunction_norm(const Eigen::VectorXcd& a, const QubitOperators& ops);

/// Energy expectation Re(a^H [H0] a) / (a^H [E] a).
double energy_expectation(const Eigen::VectorXcd& a, const QubitOperators& ops);

/// One leapfrog step of the full wavefunction:
/// [E] a^(j+3/2) = [E] a^(j-1/2) + (2 dt / i hbar)[H0] a^(j+1/2)
///                 - (4 e beta dt / hbar) v_port [Q] a^(j+1/2).
void step_schrodinger_full(const QubitOperators& ops, WavefunctionState& state, double v_port,
                           double dt);

/// Stability estimate dt_max = hbar / rho([E]^{-1}([H0] - i 2 e beta V_max [Q])),
/// spectral radius by power iteration on the generalized problem.
double full_stability_dt(const QubitOperators& ops, double v_max);

}  // namespace qline
