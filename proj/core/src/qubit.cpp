#include "qline/qubit.hpp"

#include <cmath>

namespace qline {

namespace {

using constants::electron_charge;
using constants::hbar;
using constants::pi;

// 4-point Gauss-Legendre on [0, 1]
constexpr double kGaussX[4] = {0.06943184420297371, 0.33000947820757187, 0.6699905217924281,
                               0.9305681557970263};
constexpr double kGaussW[4] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                               0.1739274225687269};

struct LocalBlock {
  double aa = 0, ab = 0, ba = 0, bb = 0;
};

template <typename Weight>
LocalBlock weighted_mass(double xa, double h, Weight w) {
  LocalBlock blk;
  for (int g = 0; g < 4; ++g) {
    const double x = kGaussX[g];
    const double wq = kGaussW[g] * h * w(xa + h * x);
    const double na = 1.0 - x, nb = x;
    blk.aa += wq * na * na;
    blk.ab += wq * na * nb;
    blk.ba += wq * nb * na;
    blk.bb += wq * nb * nb;
  }
  return blk;
}

// Assemble the four elementary stencils over a chain of elements. `wrap`
// identifies node n-1 -> node 0 through one extra element (periodic case);
// `dirichlet` drops contributions that fall on eliminated boundary nodes.
struct StencilSet {
  WrapTridiag mass, kinetic, charge, weighted;
};

void add_block(WrapTridiag& m, int a, int b, const LocalBlock& blk, int n) {
  auto add = [&](int i, int j, double v) {
    if (i < 0 || j < 0 || i >= n || j >= n) return;
    if (i == j)
      m.diag(i) += v;
    else if (j == i + 1)
      m.upper(i) += v;
    else if (j == i - 1)
      m.lower(j) += v;
    else if (i == 0 && j == n - 1)
      m.corner_upper += v;
    else if (i == n - 1 && j == 0)
      m.corner_lower += v;
    else
      throw DomainError("stencil entry outside tridiagonal+wrap pattern");
  };
  add(a, a, blk.aa);
  add(a, b, blk.ab);
  add(b, a, blk.ba);
  add(b, b, blk.bb);
}

}  // namespace

void QubitSpec::validate() const {
  if (e_j <= 0 || e_c <= 0) throw DomainError("E_J and E_C must be positive");
  if (beta < 0 || beta >= 1) throw DomainError("beta must lie in [0, 1)");
  if (kind == QubitKind::fluxonium && e_l <= 0)
    throw DomainError("fluxonium requires E_L > 0");
}

QubitSpec QubitSpec::transmon_from_c_sigma(double ej_over_ec, double c_sigma, double n_g,
                                           double beta) {
  if (c_sigma <= 0) throw DomainError("C_Sigma must be positive");
  QubitSpec q;
  q.kind = QubitKind::transmon;
  q.c_sigma = c_sigma;
  q.e_c = electron_charge * electron_charge / (2.0 * c_sigma);
  q.e_j = ej_over_ec * q.e_c;
  q.n_g = n_g;
  q.beta = beta;
  q.validate();
  return q;
}

QubitSpec QubitSpec::fluxonium_from_frequencies(double ej_hz, double ec_hz, double el_hz,
                                                double phi_ext, double beta) {
  QubitSpec q;
  q.kind = QubitKind::fluxonium;
  q.e_j = constants::planck * ej_hz;
  q.e_c = constants::planck * ec_hz;
  q.e_l = constants::planck * el_hz;
  q.phi_ext = phi_ext;
  q.beta = beta;
  q.validate();
  return q;
}

PhaseMesh PhaseMesh::transmon(int n_nodes) {
  if (n_nodes < 8) throw DomainError("phase mesh too coarse");
  PhaseMesh m;
  m.periodic = true;
  m.half_width = pi;
  m.h = 2.0 * pi / n_nodes;
  m.nodes = Eigen::VectorXd::LinSpaced(n_nodes, -pi, pi - m.h);
  return m;
}

PhaseMesh PhaseMesh::fluxonium(int n_nodes, double half_width) {
  if (n_nodes < 8) throw DomainError("phase mesh too coarse");
  if (half_width <= 0) throw DomainError("half_width must be positive");
  PhaseMesh m;
  m.periodic = false;
  m.half_width = half_width;
  m.h = 2.0 * half_width / (n_nodes - 1);
  // interior nodes only; the two boundary nodes carry homogeneous Dirichlet
  m.nodes = Eigen::VectorXd::LinSpaced(n_nodes - 2, -half_width + m.h, half_width - m.h);
  return m;
}

namespace {

StencilSet assemble_stencils(const PhaseMesh& mesh, double weight_offset, bool quadratic) {
  const int n = mesh.unknowns();
  const double h = mesh.h;
  StencilSet st;
  for (WrapTridiag* m : {&st.mass, &st.kinetic, &st.charge, &st.weighted}) {
    m->resize(n);
    m->periodic = mesh.periodic;
  }

  auto weight = [&](double phi) {
    return quadratic ? phi * phi : std::cos(phi + weight_offset);
  };

  const LocalBlock mass_blk{h / 3.0, h / 6.0, h / 6.0, h / 3.0};
  const LocalBlock kin_blk{1.0 / h, -1.0 / h, -1.0 / h, 1.0 / h};
  const LocalBlock chg_blk{-0.5, 0.5, -0.5, 0.5};

  const int n_elements = mesh.periodic ? n : n + 1;
  for (int e = 0; e < n_elements; ++e) {
    int a, b;
    double xa;
    if (mesh.periodic) {
      a = e;
      b = (e + 1) % n;
      xa = mesh.nodes(e);
    } else {
      // element e spans [boundary + e*h, ...]; unknown indices shifted by -1
      a = e - 1;
      b = e;
      if (b > n - 1) b = -1;  // last element touches the right boundary node
      xa = -mesh.half_width + e * h;
    }
    add_block(st.mass, a, b, mass_blk, n);
    add_block(st.kinetic, a, b, kin_blk, n);
    add_block(st.charge, a, b, chg_blk, n);
    add_block(st.weighted, a, b, weighted_mass(xa, h, weight), n);
  }
  return st;
}

WrapTridiag combine(const PhaseMesh& mesh,
                    std::initializer_list<std::pair<std::complex<double>, const WrapTridiag*>>
                        terms) {
  WrapTridiag out;
  out.resize(mesh.unknowns());
  out.periodic = mesh.periodic;
  for (const auto& [c, m] : terms) {
    out.diag += c * m->diag;
    out.upper += c * m->upper;
    out.lower += c * m->lower;
    out.corner_upper += c * m->corner_upper;
    out.corner_lower += c * m->corner_lower;
  }
  return out;
}

}  // namespace

QubitOperators assemble_transmon_operators(const QubitSpec& spec, const PhaseMesh& mesh) {
  spec.validate();
  if (spec.kind != QubitKind::transmon) throw DomainError("spec is not a transmon");
  if (!mesh.periodic) throw DomainError("transmon requires a periodic mesh");

  StencilSet st = assemble_stencils(mesh, 0.0, /*quadratic=*/false);
  QubitOperators ops;
  ops.spec = spec;
  ops.mesh = mesh;
  ops.e_mass = st.mass;
  ops.kinetic = st.kinetic;
  ops.charge = st.charge;
  ops.potential = st.weighted;

  const std::complex<double> i8ng(0.0, 8.0 * spec.n_g * spec.e_c);
  ops.h0 = combine(mesh, {{4.0 * spec.e_c, &ops.kinetic},
                          {i8ng, &ops.charge},
                          {4.0 * spec.e_c * spec.n_g * spec.n_g, &ops.e_mass},
                          {-spec.e_j, &ops.potential}});
  ops.e_factor.factor(ops.e_mass);
  return ops;
}

QubitOperators assemble_fluxonium_operators(const QubitSpec& spec, const PhaseMesh& mesh) {
  spec.validate();
  if (spec.kind != QubitKind::fluxonium) throw DomainError("spec is not a fluxonium");
  if (mesh.periodic) throw DomainError("fluxonium requires a Dirichlet mesh");

  StencilSet st = assemble_stencils(mesh, spec.phi_ext, /*quadratic=*/false);
  StencilSet quad = assemble_stencils(mesh, 0.0, /*quadratic=*/true);
  QubitOperators ops;
  ops.spec = spec;
  ops.mesh = mesh;
  ops.e_mass = st.mass;
  ops.kinetic = st.kinetic;
  ops.charge = st.charge;
  ops.potential = st.weighted;
  ops.quad = quad.weighted;

  ops.h0 = combine(mesh, {{4.0 * spec.e_c, &ops.kinetic},
                          {-spec.e_j, &ops.potential},
                          {0.5 * spec.e_l, &ops.quad}});
  ops.e_factor.factor(ops.e_mass);
  return ops;
}

QubitOperators assemble_operators(const QubitSpec& spec, const PhaseMesh& mesh) {
  return spec.kind == QubitKind::transmon ? assemble_transmon_operators(spec, mesh)
                                          : assemble_fluxonium_operators(spec, mesh);
}

double charge_expectation(const Eigen::VectorXcd& a, const QubitOperators& ops) {
  Eigen::VectorXcd qa;
  ops.charge.multiply(a, qa);
  return std::imag(a.dot(qa));  // Eigen's dot conjugates the left argument
}

double wavefunction_norm(const Eigen::VectorXcd& a, const QubitOperators& ops) {
  Eigen::VectorXcd ea;
  ops.e_mass.multiply(a, ea);
  return std::real(a.dot(ea));
}

double energy_expectation(const Eigen::VectorXcd& a, const QubitOperators& ops) {
  Eigen::VectorXcd ha;
  ops.h0.multiply(a, ha);
  return std::real(a.dot(ha)) / wavefunction_norm(a, ops);
}

void step_schrodinger_full(const QubitOperators& ops, WavefunctionState& state, double v_port,
                           double dt) {
  const std::complex<double> h0_coeff = 2.0 * dt / std::complex<double>(0.0, hbar);
  const double drive_coeff = -4.0 * electron_charge * ops.spec.beta * dt / hbar * v_port;

  Eigen::VectorXcd rhs, tmp;
  ops.e_mass.multiply(state.a_prev, rhs);
  ops.h0.multiply(state.a_next, tmp);
  rhs += h0_coeff * tmp;
  if (drive_coeff != 0.0) {
    ops.charge.multiply(state.a_next, tmp);
    rhs += drive_coeff * tmp;
  }
  ops.e_factor.solve_in_place(rhs);
  state.a_prev.swap(state.a_next);
  state.a_next.swap(rhs);
  ++state.step;
}

double full_stability_dt(const QubitOperators& ops, double v_max) {
  const int n = ops.mesh.unknowns();
  // H' = H0 - i 2 e beta V_max Q is Hermitian (Q real antisymmetric)
  const std::complex<double> c(0.0, -2.0 * electron_charge * ops.spec.beta * v_max);
  WrapTridiag hp = combine(ops.mesh, {{1.0, &ops.h0}, {c, &ops.charge}});

  Eigen::VectorXcd x(n);
  for (int i = 0; i < n; ++i)
    x(i) = std::complex<double>(((i % 2) ? -1.0 : 1.0), 0.3 * std::sin(1.3 * i + 0.2));
  x.normalize();

  double lambda = 0.0;
  Eigen::VectorXcd y;
  for (int it = 0; it < 10000; ++it) {
    hp.multiply(x, y);
    ops.e_factor.solve_in_place(y);
    const double norm = y.norm();
    if (norm == 0.0) throw NumericalError("power iteration collapsed");
    y /= norm;
    if (std::abs(norm - lambda) <= 1e-6 * norm) return hbar / norm;
    lambda = norm;
    x.swap(y);
  }
  throw NumericalError("power iteration did not converge within 10000 iterations");
}

}  // namespace qline
