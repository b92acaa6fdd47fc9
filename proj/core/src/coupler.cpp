#include "qline/coupler.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace qline {

using constants::electron_charge;
using constants::hbar;
using constants::two_pi;

double Pulse::value(double t) const {
  const double u = (t - t0) / sigma;
  if (std::abs(u) > 8.0) return 0.0;
  return amplitude * std::exp(-0.5 * u * u) * std::cos(two_pi * f_d * (t - t0) + phase);
}

void Pulse::validate() const {
  if (sigma <= 0) throw DomainError("pulse sigma must be positive");
  if (t0 < 5.0 * sigma) throw DomainError("pulse must start quiescent: t0 >= 5 sigma");
  if (f_d < 0) throw DomainError("drive frequency must be nonnegative");
}

const RecorderChannel& Recorder::channel(const std::string& name) const {
  for (const auto& c : channels)
    if (c.name == name) return c;
  throw DomainError("no recorder channel named '" + name + "'");
}

bool Recorder::has_channel(const std::string& name) const {
  for (const auto& c : channels)
    if (c.name == name) return true;
  return false;
}

void Recorder::write_csv(std::ostream& os) const {
  os << "# dt_sample = " << dt_sample << " s; sample time of channel k = row_time + offset_k*dt\n";
  os << "time [s]";
  for (const auto& c : channels)
    os << "," << c.name << " [" << c.unit << "] (offset " << c.sample_offset << ")";
  os << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < rows(); ++i) {
    os << i * dt_sample;
    for (const auto& c : channels) os << "," << c.samples[i];
    os << "\n";
  }
}

void CoupledConfig::validate() const {
  if (safety <= 0 || safety >= 1) throw DomainError("safety factor must lie in (0, 1)");
  if (t_total <= 0) throw DomainError("simulated time must be positive");
  if (record_every < 1) throw DomainError("record_every must be >= 1");
  if (n_eig < 1) throw DomainError("n_eig must be >= 1");
}

CoupledSystem CoupledSystem::build(LineSystem line_sys, QubitOperators qubit_ops, int n_eig) {
  if (line_sys.coupling_nodes.empty())
    throw DomainError("line system has no qubit coupling port");
  CoupledSystem sys;
  sys.qubit_node = line_sys.coupling_nodes.front();
  sys.line = std::move(line_sys);
  sys.basis = solve_eigenbasis(qubit_ops, n_eig);
  sys.reduced = build_reduced_model(qubit_ops, sys.basis);
  sys.ops = std::move(qubit_ops);
  return sys;
}

double estimate_v_max(const LineSystem& line, int qubit_node, const Pulse& pulse,
                      double t_total, double safety) {
  LineSystem pre = line;  // shares factorizations only after set_timestep
  pre.set_timestep(safety * line_stability_dt(line));
  LineState state = LineState::zero(pre.node_count());
  Eigen::VectorXd f = Eigen::VectorXd::Zero(pre.node_count());
  const double src_coeff = pre.l_per_len / pre.source_resistance;
  const long steps = static_cast<long>(t_total / pre.dt);
  double v_max = 0.0;
  for (long j = 0; j < steps; ++j) {
    f(pre.source_node) = src_coeff * pulse.value(j * pre.dt);
    step_line(pre, state, f);
    v_max = std::max(v_max, std::abs(port_voltage(state, pre, qubit_node)));
  }
  return 2.0 * v_max;
}

TimestepInfo choose_timestep(const CoupledSystem& sys, const CoupledConfig& cfg,
                             const Pulse& pulse) {
  TimestepInfo info;
  info.line_bound = line_stability_dt(sys.line);
  info.v_max = estimate_v_max(sys.line, sys.qubit_node, pulse, cfg.t_total, cfg.safety);
  info.full_bound = full_stability_dt(sys.ops, info.v_max);
  info.reduced_bound = reduced_stability_dt(sys.reduced, info.v_max);
  const double qubit_bound =
      cfg.model == QubitModel::full ? info.full_bound : info.reduced_bound;
  info.dt = cfg.safety * std::min(info.line_bound, qubit_bound);
  if (cfg.dt_override) info.dt = *cfg.dt_override;
  return info;
}

namespace {

// RK4 half-step of the semi-discrete system with v_port = 0 (leapfrog startup).
template <typename Deriv>
Eigen::VectorXcd rk4_half_step(const Eigen::VectorXcd& y0, double h, Deriv deriv) {
  Eigen::VectorXcd k1 = deriv(y0);
  Eigen::VectorXcd k2 = deriv(y0 + 0.5 * h * k1);
  Eigen::VectorXcd k3 = deriv(y0 + 0.5 * h * k2);
  Eigen::VectorXcd k4 = deriv(y0 + h * k3);
  return y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct ReducedEngine {
  const ReducedModel& model;
  ReducedState state;

  ReducedEngine(const CoupledSystem& sys, int initial, int n_eig, double dt) : model(sys.reduced) {
    if (initial >= n_eig) throw DomainError("initial state outside reduced basis");
    Eigen::VectorXcd c0 = Eigen::VectorXcd::Zero(n_eig);
    c0(initial) = 1.0;
    auto deriv = [&](const Eigen::VectorXcd& c) -> Eigen::VectorXcd {
      return (model.energies.cast<std::complex<double>>().array() /
              std::complex<double>(0.0, hbar) * c.array())
          .matrix();
    };
    state.c_next = rk4_half_step(c0, 0.5 * dt, deriv);
    state.c_prev = rk4_half_step(c0, -0.5 * dt, deriv);
  }

  void step(double v_port, double dt) { step_schrodinger_reduced(model, state, v_port, dt); }

  double charge(const Eigen::VectorXcd& c) const {
    return std::imag(c.dot(model.q * c));
  }
  double charge_next() const { return charge(state.c_next); }
  double charge_prev() const { return charge(state.c_prev); }

  double norm() const { return state.c_next.squaredNorm(); }
  double occupation(int n) const { return std::norm(state.c_next(n)); }
  std::complex<double> c0() const { return state.c_next(0); }
  bool finite() const { return state.c_next.allFinite(); }
};

struct FullEngine {
  const QubitOperators& ops;
  WavefunctionState state;
  const EigenBasis& basis;
  Eigen::VectorXcd ea;  // scratch

  FullEngine(const CoupledSystem& sys, int initial, int /*n_eig*/, double dt)
      : ops(sys.ops), basis(sys.basis) {
    if (initial >= basis.n_eig) throw DomainError("initial state outside solved basis");
    const Eigen::VectorXcd a0 = basis.vectors.col(initial);
    auto deriv = [&](const Eigen::VectorXcd& a) -> Eigen::VectorXcd {
      Eigen::VectorXcd ha;
      ops.h0.multiply(a, ha);
      ha /= std::complex<double>(0.0, hbar);
      ops.e_factor.solve_in_place(ha);
      return ha;
    };
    state.a_next = rk4_half_step(a0, 0.5 * dt, deriv);
    state.a_prev = rk4_half_step(a0, -0.5 * dt, deriv);
  }

  void step(double v_port, double dt) { step_schrodinger_full(ops, state, v_port, dt); }

  double charge_next() const { return charge_expectation(state.a_next, ops); }
  double charge_prev() const { return charge_expectation(state.a_prev, ops); }

  double norm() const { return wavefunction_norm(state.a_next, ops); }
  double occupation(int n) {
    ops.e_mass.multiply(state.a_next, ea);
    return std::norm(basis.vectors.col(n).dot(ea));
  }
  std::complex<double> c0() {
    ops.e_mass.multiply(state.a_next, ea);
    return basis.vectors.col(0).dot(ea);
  }
  bool finite() const { return state.a_next.allFinite(); }
};

template <typename Engine>
CoupledRun run_loop(const CoupledSystem& sys, const CoupledConfig& cfg, const Pulse& pulse,
                    const TimestepInfo& ts) {
  const double dt = ts.dt;
  const long steps = static_cast<long>(cfg.t_total / dt);
  const int engine_levels =
      cfg.model == QubitModel::reduced ? cfg.n_eig : sys.basis.n_eig;
  const int n_occ = std::min(cfg.record_occupations, engine_levels);

  LineSystem line = sys.line;
  line.set_timestep(dt);
  LineState lstate = LineState::zero(line.node_count());
  Engine qubit(sys, cfg.initial_state, engine_levels, dt);

  CoupledRun out;
  out.timestep = ts;
  Recorder& rec = out.recorder;
  rec.dt_sample = dt * cfg.record_every;
  rec.channels.push_back({"v_src", "V", -0.5, {}});
  rec.channels.push_back({"v_qubit", "V", -0.5, {}});
  for (std::size_t p = 0; p < cfg.probe_nodes.size(); ++p)
    rec.channels.push_back({"v_probe" + std::to_string(p), "V", -0.5, {}});
  rec.channels.push_back({"n_expect", "1", 0.5, {}});
  for (int n = 0; n < n_occ; ++n)
    rec.channels.push_back({"p" + std::to_string(n), "1", 0.5, {}});
  rec.channels.push_back({"norm", "1", 0.5, {}});
  rec.channels.push_back({"c0_phase", "rad", 0.5, {}});

  Eigen::VectorXd f = Eigen::VectorXd::Zero(line.node_count());
  const double src_coeff = line.l_per_len / line.source_resistance;
  const double beta = sys.ops.spec.beta;
  const bool sourced = cfg.mode == CouplingMode::two_way && beta != 0.0;
  const double source_coeff = line.l_per_len * 2.0 * electron_charge * beta / dt;

  double n_next = qubit.charge_next();
  double n_prev = qubit.charge_prev();

  for (long j = 0; j < steps; ++j) {
    if (j % cfg.record_every == 0) {
      std::size_t ch = 0;
      auto push = [&](double v) { rec.channels[ch++].samples.push_back(v); };
      push(j == 0 ? 0.0 : port_voltage(lstate, line, line.source_node));
      push(j == 0 ? 0.0 : port_voltage(lstate, line, sys.qubit_node));
      for (int node : cfg.probe_nodes) push(j == 0 ? 0.0 : port_voltage(lstate, line, node));
      push(n_next);
      for (int n = 0; n < n_occ; ++n) push(qubit.occupation(n));
      push(qubit.norm());
      push(std::arg(qubit.c0()));
    }

    f(line.source_node) = src_coeff * pulse.value(j * dt);
    if (sourced) f(sys.qubit_node) = source_coeff * (n_next - n_prev);
    step_line(line, lstate, f);

    const double v_port = port_voltage(lstate, line, sys.qubit_node);
    out.max_port_voltage = std::max(out.max_port_voltage, std::abs(v_port));
    qubit.step(v_port, dt);
    n_prev = n_next;
    n_next = qubit.charge_next();

    if ((j & 1023) == 0 && (!qubit.finite() || !lstate.phi_now.allFinite()))
      throw NumericalError("state diverged at step " + std::to_string(j) +
                           " (stability violation?)");
  }
  if (!qubit.finite() || !lstate.phi_now.allFinite())
    throw NumericalError("state diverged at step " + std::to_string(steps) +
                         " (stability violation?)");

  out.final_norm = qubit.norm();
  out.final_occupations = Eigen::VectorXd::Zero(sys.basis.n_eig);
  for (int n = 0; n < engine_levels; ++n) out.final_occupations(n) = qubit.occupation(n);
  return out;
}

}  // namespace

CoupledRun run_coupled(const CoupledSystem& sys, const CoupledConfig& cfg, const Pulse& pulse) {
  cfg.validate();
  pulse.validate();
  const TimestepInfo ts = choose_timestep(sys, cfg, pulse);
  if (cfg.model == QubitModel::reduced) {
    if (cfg.n_eig > sys.basis.n_eig)
      throw DomainError("requested n_eig exceeds the solved basis");
    CoupledSystem view = sys;  // shallow matrices are shared via Eigen's COW-free copies
    if (cfg.n_eig < sys.basis.n_eig) {
      view.reduced.energies = sys.reduced.energies.head(cfg.n_eig);
      view.reduced.q = sys.reduced.q.topLeftCorner(cfg.n_eig, cfg.n_eig);
    }
    return run_loop<ReducedEngine>(view, cfg, pulse, ts);
  }
  return run_loop<FullEngine>(sys, cfg, pulse, ts);
}

CalibrationResult calibrate_pulse_area(const CoupledSystem& sys, const CoupledConfig& cfg,
                                       double target_area_rad, double sigma, double f_d,
                                       double a_start, double a_max) {
  CalibrationResult result;
  Pulse pulse;
  pulse.sigma = sigma;
  pulse.f_d = f_d;
  pulse.t0 = 5.0 * sigma;

  CoupledConfig ccfg = cfg;
  ccfg.record_every = 1 << 20;  // calibration needs only final occupations

  auto p0_final = [&](double amp) {
    pulse.amplitude = amp;
    const CoupledRun run = run_coupled(sys, ccfg, pulse);
    result.scan.emplace_back(amp, run.final_occupations(0));
    return run.final_occupations(0);
  };

  auto trace = [&]() {
    std::ostringstream os;
    for (const auto& [a, p] : result.scan) os << "  A=" << a << " V -> P0=" << p << "\n";
    return os.str();
  };

  // geometric scan: first local minimum below 0.5, then the following maximum
  std::vector<std::pair<double, double>> grid;
  double a = a_start;
  int i_min = -1;
  while (a <= a_max) {
    grid.emplace_back(a, p0_final(a));
    const int k = static_cast<int>(grid.size()) - 1;
    if (i_min < 0 && k >= 2 && grid[k - 1].second < 0.5 &&
        grid[k - 1].second <= grid[k - 2].second && grid[k - 1].second <= grid[k].second)
      i_min = k - 1;
    if (i_min >= 0 && k >= i_min + 2 && grid[k - 1].second >= grid[k - 2].second &&
        grid[k - 1].second >= grid[k].second)
      break;  // bracketed the post-minimum maximum at k-1
    a *= 1.25;
  }
  if (i_min < 0)
    throw CalibrationError("no Rabi minimum found in amplitude scan:\n" + trace());
  const int k_last = static_cast<int>(grid.size()) - 1;
  if (!(grid[k_last - 1].second >= grid[k_last - 2].second &&
        grid[k_last - 1].second >= grid[k_last].second))
    throw CalibrationError("no post-minimum maximum bracketed in amplitude scan:\n" + trace());

  // golden-section maximization of final P0 on [A_{k-2}, A_k]
  double lo = grid[k_last - 2].first, hi = grid[k_last].first;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = p0_final(x1), f2 = p0_final(x2);
  while (hi - lo > 1e-4 * hi) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = p0_final(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = p0_final(x2);
    }
  }
  result.amplitude_2pi = 0.5 * (lo + hi);
  result.p0_at_2pi = p0_final(result.amplitude_2pi);
  result.amplitude = result.amplitude_2pi * target_area_rad / (2.0 * constants::pi);
  return result;
}

double refine_return_amplitude(const CoupledSystem& sys, const CoupledConfig& cfg,
                               const Pulse& pulse, double rel_bracket) {
  CoupledConfig ccfg = cfg;
  ccfg.record_every = 1 << 20;
  Pulse p = pulse;
  auto p0_final = [&](double amp) {
    p.amplitude = amp;
    return run_coupled(sys, ccfg, p).final_occupations(0);
  };
  double lo = pulse.amplitude * (1.0 - rel_bracket), hi = pulse.amplitude * (1.0 + rel_bracket);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = p0_final(x1), f2 = p0_final(x2);
  while (hi - lo > 1e-4 * hi) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = p0_final(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = p0_final(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace qline
