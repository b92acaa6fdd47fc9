#include "qline/txline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qline/constants.hpp"

namespace qline {

namespace {

constexpr double kPosTol = 1e-12;

// Mesh one section: every breakpoint becomes a node, intervals subdivided to
// meet the target element size.
Eigen::VectorXd mesh_section(double length, std::vector<double> breakpoints, double h_target) {
  breakpoints.push_back(0.0);
  breakpoints.push_back(length);
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> uniq;
  for (double b : breakpoints) {
    if (uniq.empty() || b - uniq.back() > kPosTol * std::max(1.0, length)) uniq.push_back(b);
  }
  std::vector<double> nodes{uniq.front()};
  for (std::size_t k = 1; k < uniq.size(); ++k) {
    const double d = uniq[k] - uniq[k - 1];
    const int n = std::max(1, static_cast<int>(std::ceil(d / h_target - 1e-9)));
    for (int i = 1; i <= n; ++i) nodes.push_back(uniq[k - 1] + d * i / n);
  }
  return Eigen::Map<Eigen::VectorXd>(nodes.data(), static_cast<Eigen::Index>(nodes.size()));
}

void add_element_triplets(std::vector<Eigen::Triplet<double>>& mass,
                          std::vector<Eigen::Triplet<double>>& stiff, int a, int b, double h) {
  mass.emplace_back(a, a, h / 3.0);
  mass.emplace_back(b, b, h / 3.0);
  mass.emplace_back(a, b, h / 6.0);
  mass.emplace_back(b, a, h / 6.0);
  stiff.emplace_back(a, a, 1.0 / h);
  stiff.emplace_back(b, b, 1.0 / h);
  stiff.emplace_back(a, b, -1.0 / h);
  stiff.emplace_back(b, a, -1.0 / h);
}

int find_node(const Eigen::VectorXd& nodes, double x) {
  const double span = std::max(1.0, nodes(nodes.size() - 1));
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    if (std::abs(nodes(i) - x) <= 1e-9 * span) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

double LineSpec::wave_speed() const {
  return 1.0 / std::sqrt(inductance_per_length * capacitance_per_length);
}

double LineSpec::impedance() const {
  return std::sqrt(inductance_per_length / capacitance_per_length);
}

void LineSpec::validate() const {
  if (inductance_per_length <= 0 || capacitance_per_length <= 0)
    throw DomainError("per-unit-length L and C must be positive");
  if (length <= 0) throw DomainError("line length must be positive");
  if (source_resistance <= 0) throw DomainError("source resistance must be positive");
  auto in_range = [&](double x) { return x >= -kPosTol && x <= length + kPosTol; };
  if (!in_range(source_position)) throw DomainError("source position outside [0, length]");
  if (load_position && !in_range(*load_position))
    throw DomainError("load position outside [0, length]");
  if (load_position.has_value() != load_resistance.has_value())
    throw DomainError("load position and load resistance must be given together");
  if (load_resistance && *load_resistance <= 0)
    throw DomainError("load resistance must be positive");
  for (double z : coupling_positions)
    if (!in_range(z)) throw DomainError("coupling position outside [0, length]");
  if (elements_per_min_wavelength < 10)
    throw DomainError("elements_per_min_wavelength must be >= 10");
}

double LineMesh::max_element() const {
  double h = 0.0;
  for (Eigen::Index i = 1; i < nodes.size(); ++i) h = std::max(h, nodes(i) - nodes(i - 1));
  return h;
}

int LineMesh::node_at(double x) const {
  const int i = find_node(nodes, x);
  if (i < 0) throw DomainError("position does not coincide with a mesh node");
  return i;
}

double LineNetwork::wave_speed() const {
  return 1.0 / std::sqrt(inductance_per_length * capacitance_per_length);
}

double LineNetwork::impedance() const {
  return std::sqrt(inductance_per_length / capacitance_per_length);
}

int NetworkMesh::global_node(int section, double pos) const {
  return offsets.at(static_cast<std::size_t>(section)) +
         section_meshes.at(static_cast<std::size_t>(section)).node_at(pos);
}

LineMesh build_line_mesh(const LineSpec& spec, double f_max) {
  spec.validate();
  if (f_max <= 0) throw DomainError("f_max must be positive");
  const double h_target = spec.wave_speed() / (f_max * spec.elements_per_min_wavelength);

  std::vector<double> bps{spec.source_position};
  if (spec.load_position) bps.push_back(*spec.load_position);
  bps.insert(bps.end(), spec.coupling_positions.begin(), spec.coupling_positions.end());

  LineMesh mesh;
  mesh.nodes = mesh_section(spec.length, bps, h_target);
  mesh.source_node = find_node(mesh.nodes, spec.source_position);
  if (spec.load_position) mesh.load_node = find_node(mesh.nodes, *spec.load_position);
  for (double z : spec.coupling_positions) mesh.coupling_nodes.push_back(find_node(mesh.nodes, z));
  return mesh;
}

NetworkMesh build_network_mesh(const LineNetwork& net, double f_max) {
  if (f_max <= 0) throw DomainError("f_max must be positive");
  if (net.elements_per_min_wavelength < 10)
    throw DomainError("elements_per_min_wavelength must be >= 10");
  const double h_target = net.wave_speed() / (f_max * net.elements_per_min_wavelength);

  std::vector<std::vector<double>> ports(net.sections.size());
  auto add_port = [&](const NetPort& p) {
    if (p.section < 0 || p.section >= static_cast<int>(net.sections.size()))
      throw DomainError("port references a nonexistent section");
    if (p.pos < -kPosTol || p.pos > net.sections[p.section].length + kPosTol)
      throw DomainError("port outside its section");
    ports[p.section].push_back(p.pos);
  };
  add_port(net.source);
  for (const auto& p : net.loads) add_port(p);
  for (const auto& p : net.couplings) add_port(p);
  for (const auto& c : net.caps) {
    add_port(NetPort{c.section_a, c.pos_a});
    add_port(NetPort{c.section_b, c.pos_b});
  }
  for (std::size_t s = 0; s < net.sections.size(); ++s)
    for (double p : net.sections[s].ports) ports[s].push_back(p);

  NetworkMesh mesh;
  int offset = 0;
  for (std::size_t s = 0; s < net.sections.size(); ++s) {
    LineMesh m;
    m.nodes = mesh_section(net.sections[s].length, ports[s], h_target);
    mesh.offsets.push_back(offset);
    offset += m.node_count();
    mesh.section_meshes.push_back(std::move(m));
  }
  mesh.total_nodes = offset;
  return mesh;
}

namespace {

LineSystem assemble_common(double lpl, double cpl, const NetworkMesh& mesh,
                           const std::vector<SeriesCap>& caps, int source_node, double rs,
                           const std::vector<std::pair<int, double>>& loads,
                           const std::vector<int>& coupling_nodes) {
  const int n = mesh.total_nodes;
  std::vector<Eigen::Triplet<double>> tm, ts;
  for (std::size_t s = 0; s < mesh.section_meshes.size(); ++s) {
    const auto& nodes = mesh.section_meshes[s].nodes;
    const int off = mesh.offsets[s];
    for (Eigen::Index e = 0; e + 1 < nodes.size(); ++e)
      add_element_triplets(tm, ts, off + static_cast<int>(e), off + static_cast<int>(e) + 1,
                           nodes(e + 1) - nodes(e));
  }

  LineSystem sys;
  sys.l_per_len = lpl;
  sys.c_per_len = cpl;
  sys.mass.resize(n, n);
  sys.mass.setFromTriplets(tm.begin(), tm.end());
  sys.s.resize(n, n);
  sys.s.setFromTriplets(ts.begin(), ts.end());

  std::vector<Eigen::Triplet<double>> tt;
  tt.reserve(tm.size() + 4 * caps.size());
  for (const auto& t : tm) tt.emplace_back(t.row(), t.col(), lpl * cpl * t.value());
  for (const auto& c : caps) {
    const int a = mesh.global_node(c.section_a, c.pos_a);
    const int b = mesh.global_node(c.section_b, c.pos_b);
    const double lc = lpl * c.capacitance;
    tt.emplace_back(a, a, lc);
    tt.emplace_back(b, b, lc);
    tt.emplace_back(a, b, -lc);
    tt.emplace_back(b, a, -lc);
  }
  sys.t_step.resize(n, n);
  sys.t_step.setFromTriplets(tt.begin(), tt.end());

  std::vector<Eigen::Triplet<double>> tr;
  tr.emplace_back(source_node, source_node, lpl / rs);
  for (const auto& [node, res] : loads) tr.emplace_back(node, node, lpl / res);
  sys.r.resize(n, n);
  sys.r.setFromTriplets(tr.begin(), tr.end());

  sys.source_node = source_node;
  sys.source_resistance = rs;
  sys.coupling_nodes = coupling_nodes;
  return sys;
}

}  // namespace

LineSystem assemble_line(const LineSpec& spec, const LineMesh& mesh) {
  NetworkMesh nm;
  nm.section_meshes = {mesh};
  nm.offsets = {0};
  nm.total_nodes = mesh.node_count();
  std::vector<std::pair<int, double>> loads;
  if (mesh.load_node >= 0) loads.emplace_back(mesh.load_node, *spec.load_resistance);
  return assemble_common(spec.inductance_per_length, spec.capacitance_per_length, nm, {},
                         mesh.source_node, spec.source_resistance, loads, mesh.coupling_nodes);
}

LineSystem assemble_network(const LineNetwork& net, const NetworkMesh& mesh) {
  if (net.loads.size() != net.load_resistances.size())
    throw DomainError("loads and load_resistances size mismatch");
  if (net.source_resistance <= 0) throw DomainError("source resistance must be positive");
  std::vector<std::pair<int, double>> loads;
  for (std::size_t i = 0; i < net.loads.size(); ++i) {
    if (net.load_resistances[i] <= 0) throw DomainError("load resistance must be positive");
    loads.emplace_back(mesh.global_node(net.loads[i].section, net.loads[i].pos),
                       net.load_resistances[i]);
  }
  std::vector<int> couplings;
  for (const auto& p : net.couplings) couplings.push_back(mesh.global_node(p.section, p.pos));
  return assemble_common(net.inductance_per_length, net.capacitance_per_length, mesh, net.caps,
                         mesh.global_node(net.source.section, net.source.pos),
                         net.source_resistance, loads, couplings);
}

void LineSystem::set_timestep(double dt_step) {
  if (dt_step <= 0) throw DomainError("dt must be positive");
  dt = dt_step;
  const double idt2 = 1.0 / (dt * dt);
  SpMat lhs_mat = t_step * idt2 + r * (0.5 / dt);
  rhs_b = t_step * (2.0 * idt2) - s;
  rhs_c = t_step * idt2 - r * (0.5 / dt);
  lhs = std::make_shared<Eigen::SparseLU<SpMat>>();
  lhs->compute(lhs_mat);
  if (lhs->info() != Eigen::Success)
    throw NumericalError("stepping matrix factorization failed (singular system)");
}

Eigen::VectorXd line_source_vector(const LineSystem& sys, double v_source,
                                   std::span<const double> dn_dt, std::span<const double> beta) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(sys.node_count());
  f(sys.source_node) = sys.l_per_len / sys.source_resistance * v_source;
  for (std::size_t k = 0; k < sys.coupling_nodes.size(); ++k) {
    const double b = k < beta.size() ? beta[k] : 0.0;
    const double dn = k < dn_dt.size() ? dn_dt[k] : 0.0;
    f(sys.coupling_nodes[k]) += sys.l_per_len * 2.0 * constants::electron_charge * b * dn;
  }
  return f;
}

void step_line(const LineSystem& sys, LineState& state, const Eigen::VectorXd& f) {
  if (!sys.lhs) throw NumericalError("set_timestep must be called before step_line");
  Eigen::VectorXd rhs = sys.rhs_b * state.phi_now - sys.rhs_c * state.phi_prev + f;
  state.phi_prev.swap(state.phi_now);
  state.phi_now = sys.lhs->solve(rhs);
  ++state.step;
}

double port_voltage(const LineState& state, const LineSystem& sys, int node) {
  return (state.phi_now(node) - state.phi_prev(node)) / sys.dt;
}

double line_stability_dt(const LineSystem& sys) {
  const int n = sys.node_count();
  Eigen::SparseLU<LineSystem::SpMat> t_factor;
  t_factor.compute(sys.t_step);
  if (t_factor.info() != Eigen::Success) throw NumericalError("T factorization failed");

  // deterministic start close to the highest (sawtooth) mode
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = ((i % 2) ? -1.0 : 1.0) * (1.0 + 0.01 * std::sin(0.7 * i));
  x.normalize();

  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd y = t_factor.solve(sys.s * x);
    const double norm = y.norm();
    if (norm == 0.0) throw NumericalError("power iteration collapsed to the null space");
    y /= norm;
    if (std::abs(norm - lambda) <= 1e-6 * norm) {
      return 2.0 / std::sqrt(norm);
    }
    lambda = norm;
    x.swap(y);
  }
  throw NumericalError("power iteration did not converge within 10000 iterations");
}

double line_discrete_energy(const LineSystem& sys, const LineState& state) {
  const Eigen::VectorXd u = (state.phi_now - state.phi_prev) / sys.dt;
  const double kinetic = 0.5 * sys.c_per_len * u.dot(sys.mass * u);
  const double potential =
      0.5 / sys.l_per_len * state.phi_now.dot(sys.s * state.phi_prev);
  return kinetic + potential;
}

}  // namespace qline
