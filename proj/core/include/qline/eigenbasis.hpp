#pragma once

#include <Eigen/Dense>

#include "qline/qubit.hpp"

namespace qline {

/// Lowest eigenpairs of the free-qubit pencil ([H0], [E]).
/// Eigenvectors are E-orthonormal; phases fixed so the largest-magnitude
/// component of each vector is real positive.
struct EigenBasis {
  Eigen::VectorXd energies_abs;  // J, ascending
  Eigen::MatrixXcd vectors;      // columns, E-orthonormal
  int n_eig = 0;

  /// Energy of level n relative to the ground level.
  double energy(int n) const { return energies_abs(n) - energies_abs(0); }
  /// Transition frequency (E_m - E_n)/h in hertz.
  double transition_hz(int m, int n) const;
};

/// Reduced eigenstate model: diagonal energies (E0-referenced) and the
/// charge-coupling matrix Q_mn = psi_m^H [Q] psi_n (anti-Hermitian).
struct ReducedModel {
  Eigen::VectorXd energies;  // J, energies(0) == 0
  Eigen::MatrixXcd q;        // N_eig x N_eig
  double beta = 0.0;

  int size() const { return static_cast<int>(energies.size()); }
  /// <m|n_hat|m'> = -i q(m, m')
  std::complex<double> charge_element(int m, int n) const {
    return std::complex<double>(0.0, -1.0) * q(m, n);
  }
};

/// Reduced coefficients on the staggered half-integer grid.
struct ReducedState {
  Eigen::VectorXcd c_next;  // c^(j+1/2)
  Eigen::VectorXcd c_prev;  // c^(j-1/2)
  long step = 0;
};

/// Dense Hermitian-definite solve of [H0]{psi} = E [E]{psi} (Cholesky of [E]
/// then a dense Hermitian eigensolve). Returns the lowest n_eig pairs.
EigenBasis solve_eigenbasis(const QubitOperators& ops, int n_eig);

ReducedModel build_reduced_model(const QubitOperators& ops, const EigenBasis& basis);

/// c^(j+3/2) = c^(j-1/2) + (2 dt / i hbar)[En] c^(j+1/2)
///             - (4 e beta dt / hbar) v_port [Qr] c^(j+1/2).
void step_schrodinger_reduced(const ReducedModel& model, ReducedState& state, double v_port,
                              double dt);

/// dt_max = hbar / rho([En] - i 2 e beta V_max [Qr]), dense eigensolve.
double reduced_stability_dt(const ReducedModel& model, double v_max);

struct TransmonAsymptotics {
  double f01_hz;
  double anharmonicity_hz;  // f12 - f01 ~ -E_C/h
};

/// Loose independent cross-check from the standard large-E_J/E_C expansion;
/// refuses below ratio 20 where the expansion is not meaningful.
TransmonAsymptotics transmon_asymptotic_oracle(const QubitSpec& spec);

}  // namespace qline
