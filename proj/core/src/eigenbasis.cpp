#include "qline/eigenbasis.hpp"

#include <cmath>

namespace qline {

using constants::electron_charge;
using constants::hbar;
using constants::planck;

double EigenBasis::transition_hz(int m, int n) const {
  return (energies_abs(m) - energies_abs(n)) / planck;
}

EigenBasis solve_eigenbasis(const QubitOperators& ops, int n_eig) {
  const int n = ops.mesh.unknowns();
  if (n_eig < 1 || n_eig > n) throw DomainError("n_eig out of range");

  const Eigen::MatrixXcd h0 = ops.h0_dense();
  const Eigen::MatrixXcd e = ops.e_dense();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h0, e);
  if (solver.info() != Eigen::Success)
    throw NumericalError("generalized eigensolve failed (E not SPD?)");

  EigenBasis basis;
  basis.n_eig = n_eig;
  basis.energies_abs = solver.eigenvalues().head(n_eig);
  basis.vectors = solver.eigenvectors().leftCols(n_eig);

  // phase convention: largest-magnitude component real positive
  for (int k = 0; k < n_eig; ++k) {
    Eigen::Index imax;
    basis.vectors.col(k).cwiseAbs().maxCoeff(&imax);
    const std::complex<double> z = basis.vectors(imax, k);
    basis.vectors.col(k) *= std::abs(z) / z;
  }
  return basis;
}

ReducedModel build_reduced_model(const QubitOperators& ops, const EigenBasis& basis) {
  ReducedModel model;
  model.beta = ops.spec.beta;
  model.energies = basis.energies_abs.array() - basis.energies_abs(0);

  const int ne = basis.n_eig;
  model.q.resize(ne, ne);
  Eigen::VectorXcd tmp;
  for (int j = 0; j < ne; ++j) {
    ops.charge.multiply(basis.vectors.col(j), tmp);
    for (int i = 0; i < ne; ++i) model.q(i, j) = basis.vectors.col(i).dot(tmp);
  }
  return model;
}

void step_schrodinger_reduced(const ReducedModel& model, ReducedState& state, double v_port,
                              double dt) {
  const std::complex<double> e_coeff = 2.0 * dt / std::complex<double>(0.0, hbar);
  const double drive = -4.0 * electron_charge * model.beta * dt / hbar * v_port;

  Eigen::VectorXcd next = state.c_prev;
  next.array() += e_coeff * model.energies.array() * state.c_next.array();
  if (drive != 0.0) next.noalias() += drive * (model.q * state.c_next);
  state.c_prev.swap(state.c_next);
  state.c_next.swap(next);
  ++state.step;
}

double reduced_stability_dt(const ReducedModel& model, double v_max) {
  // En - i 2 e beta V_max Q is Hermitian
  Eigen::MatrixXcd m = model.q * std::complex<double>(0.0, -2.0 * electron_charge *
                                                               model.beta * v_max);
  m += model.energies.cast<std::complex<double>>().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  const double rho = solver.eigenvalues().cwiseAbs().maxCoeff();
  if (rho == 0.0) throw NumericalError("reduced system has zero spectral radius");
  return hbar / rho;
}

TransmonAsymptotics transmon_asymptotic_oracle(const QubitSpec& spec) {
  if (spec.kind != QubitKind::transmon) throw DomainError("oracle is transmon-only");
  const double ratio = spec.e_j / spec.e_c;
  if (ratio < 20.0)
    throw DomainError("asymptotic expansion not valid below E_J/E_C = 20 (got " +
                      std::to_string(ratio) + ")");
  TransmonAsymptotics out;
  out.f01_hz = (std::sqrt(8.0 * spec.e_j * spec.e_c) - spec.e_c) / planck;
  out.anharmonicity_hz = -spec.e_c / planck;
  return out;
}

}  // namespace qline
