#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "dobs/control.hpp"
#include "dobs/graph.hpp"
#include "dobs/plant.hpp"
#include "dobs/rng.hpp"
#include "dobs/synthesis.hpp"
#include "dobs/weights.hpp"

namespace dobs {

// Bounded i.i.d. uniform noise on the state and measurement channels.
struct NoiseOptions {
  double process_amplitude = 0.0;
  double measurement_amplitude = 0.0;

  bool any() const { return process_amplitude > 0 || measurement_amplitude > 0; }
};

struct ObserverNetworkState {
  Vector x;
  std::vector<Vector> xhat;
  std::vector<Vector> z;
  long k = 0;
};

inline ObserverNetworkState initial_state(const Plant& p, const GainSet& g, const Vector& x0,
                                          const std::vector<Vector>& xhat0,
                                          const std::vector<Vector>& z0) {
  if (x0.size() != p.n()) throw std::invalid_argument("simulate: x0 dimension mismatch");
  if (static_cast<int>(xhat0.size()) != p.m() || static_cast<int>(z0.size()) != p.m())
    throw std::invalid_argument("simulate: initial estimate count mismatch");
  for (int i = 0; i < p.m(); ++i) {
    if (xhat0[static_cast<std::size_t>(i)].size() != p.n())
      throw std::invalid_argument("simulate: xhat0 dimension mismatch");
    if (z0[static_cast<std::size_t>(i)].size() != g.mu[static_cast<std::size_t>(i)])
      throw std::invalid_argument("simulate: z0 dimension mismatch");
  }
  return ObserverNetworkState{x0, xhat0, z0, 0};
}

// One update of the plant and every observer. Observer i reads only its own
// measurement and the estimates of its in-neighbors: the consensus sum runs
// over the neighborhood list, not over all vertices.
inline ObserverNetworkState step(const ObserverNetworkState& state, const Plant& p,
                                 const WeightMatrix& W, const std::vector<std::set<int>>& nbhd,
                                 const GainSet& g, const NoiseOptions& noise, Rng* rng) {
  const Eigen::Index n = p.n();
  const int m = p.m();
  ObserverNetworkState next;
  next.k = state.k + 1;
  next.xhat.resize(static_cast<std::size_t>(m));
  next.z.resize(static_cast<std::size_t>(m));

  for (int i = 0; i < m; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    Vector consensus = Vector::Zero(n);
    for (int j : nbhd[idx]) consensus += W.W(i, j - 1) * state.xhat[static_cast<std::size_t>(j - 1)];

    Vector y = p.H_blocks[idx] * state.x;
    if (noise.measurement_amplitude > 0 && rng)
      for (Eigen::Index r = 0; r < y.size(); ++r)
        y[r] += noise.measurement_amplitude * rng->uniform(-1.0, 1.0);

    const Vector innovation = y - p.H_blocks[idx] * state.xhat[idx];
    next.xhat[idx] = p.A * consensus + g.K[idx] * innovation + g.P[idx] * state.z[idx];
    next.z[idx] = g.Q[idx] * innovation + g.S[idx] * state.z[idx];
  }

  next.x = p.A * state.x;
  if (noise.process_amplitude > 0 && rng)
    for (Eigen::Index r = 0; r < next.x.size(); ++r)
      next.x[r] += noise.process_amplitude * rng->uniform(-1.0, 1.0);
  return next;
}

struct TraceRecord {
  long k = 0;
  Vector x;
  std::vector<Vector> xhat;
  Vector err;  // per-observer estimation error norms
};

struct SimulationTrace {
  std::vector<TraceRecord> records;
  std::uint64_t seed = 0;
  long horizon = 0;
  NoiseOptions noise;
  long overflow_step = -1;  // set when the run was truncated by divergence

  double max_error(std::size_t record_index) const {
    const Vector& e = records[record_index].err;
    return e.size() ? e.maxCoeff() : 0.0;
  }
};

inline SimulationTrace run(const Plant& p, const DirectedGraph& graph, const WeightMatrix& W,
                           const GainSet& g, const Vector& x0, const std::vector<Vector>& xhat0,
                           const std::vector<Vector>& z0, long horizon, const NoiseOptions& noise,
                           std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");
  validate_gains(p, g);
  check_weight_consistency(W.W, graph);
  const auto nbhd = neighborhoods(graph);

  SimulationTrace trace;
  trace.seed = seed;
  trace.horizon = horizon;
  trace.noise = noise;
  Rng rng(seed);

  ObserverNetworkState state = initial_state(p, g, x0, xhat0, z0);
  auto record = [&](const ObserverNetworkState& s) {
    TraceRecord rec;
    rec.k = s.k;
    rec.x = s.x;
    rec.xhat = s.xhat;
    rec.err = Vector(p.m());
    for (int i = 0; i < p.m(); ++i)
      rec.err[i] = (s.xhat[static_cast<std::size_t>(i)] - s.x).norm();
    trace.records.push_back(std::move(rec));
  };
  record(state);

  for (long k = 0; k < horizon; ++k) {
    state = step(state, p, W, nbhd, g, noise, noise.any() ? &rng : nullptr);
    double magnitude = state.x.cwiseAbs().maxCoeff();
    for (const Vector& xh : state.xhat)
      magnitude = std::max(magnitude, xh.size() ? xh.cwiseAbs().maxCoeff() : 0.0);
    if (!std::isfinite(magnitude) || magnitude > 1e30) {
      trace.overflow_step = state.k;
      record(state);
      return trace;
    }
    record(state);
  }
  return trace;
}

struct ControlledTrace {
  std::vector<double> state_norms;  // |x(k)|
  std::vector<Vector> states;
  long overflow_step = -1;
};

// Closed-loop run of the plant with the composed distributed controller,
// again with neighborhood-masked estimate exchange.
inline ControlledTrace run_controlled(const Plant& p, const DirectedGraph& graph,
                                      const DistributedController& dc, const Vector& x0,
                                      long horizon) {
  if (horizon < 1) throw std::invalid_argument("run_controlled: horizon must be >= 1");
  if (!p.B_blocks) throw std::invalid_argument("run_controlled: plant has no input blocks");
  check_weight_consistency(dc.W.W, graph);
  const auto nbhd = neighborhoods(graph);
  const Eigen::Index n = p.n();
  const int m = p.m();
  const GainSet& g = dc.observer;
  const DecoupledControllerSet& d = dc.decoupled;

  Vector x = x0;
  std::vector<Vector> xhat(static_cast<std::size_t>(m), Vector::Zero(n));
  std::vector<Vector> z, w;
  for (int i = 0; i < m; ++i) {
    z.push_back(Vector::Zero(g.mu[static_cast<std::size_t>(i)]));
    w.push_back(Vector::Zero(d.nu[static_cast<std::size_t>(i)]));
  }

  ControlledTrace trace;
  trace.state_norms.push_back(x.norm());
  trace.states.push_back(x);
  for (long k = 0; k < horizon; ++k) {
    std::vector<Vector> u(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      u[idx] = d.Kd[idx] * xhat[idx] + d.Pd[idx] * w[idx];
    }

    Vector x_next = p.A * x;
    for (int i = 0; i < m; ++i)
      x_next += (*p.B_blocks)[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];

    std::vector<Vector> xhat_next(static_cast<std::size_t>(m));
    std::vector<Vector> z_next(static_cast<std::size_t>(m));
    std::vector<Vector> w_next(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      Vector consensus = Vector::Zero(n);
      for (int j : nbhd[idx]) consensus += dc.W.W(i, j - 1) * xhat[static_cast<std::size_t>(j - 1)];
      const Vector innovation = p.H_blocks[idx] * x - p.H_blocks[idx] * xhat[idx];
      xhat_next[idx] =
          p.A * consensus - dc.innovation_K(i + 1) * innovation + g.P[idx] * z[idx];
      z_next[idx] = -(dc.innovation_Q(i + 1) * innovation) + g.S[idx] * z[idx];
      w_next[idx] = d.Qd[idx] * xhat[idx] + d.Sd[idx] * w[idx];
    }

    x = std::move(x_next);
    xhat = std::move(xhat_next);
    z = std::move(z_next);
    w = std::move(w_next);
    trace.state_norms.push_back(x.norm());
    trace.states.push_back(x);
    if (!std::isfinite(x.norm()) || x.norm() > 1e30) {
      trace.overflow_step = k + 1;
      return trace;
    }
  }
  return trace;
}

// Header: k, x_1..x_n, xhat_{i}_{1..n} per observer, err_1..err_m.
// 17 significant digits keep round-trips bit-faithful.
inline void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
  if (trace.records.empty()) return;
  const Eigen::Index n = trace.records.front().x.size();
  const std::size_t m = trace.records.front().xhat.size();
  out << "k";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (std::size_t i = 1; i <= m; ++i)
    for (Eigen::Index j = 1; j <= n; ++j) out << ",xhat_" << i << "_" << j;
  for (std::size_t i = 1; i <= m; ++i) out << ",err_" << i;
  out << "\n";

  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ',' << buf;
  };
  for (const TraceRecord& rec : trace.records) {
    out << rec.k;
    for (Eigen::Index i = 0; i < n; ++i) emit(rec.x[i]);
    for (const Vector& xh : rec.xhat)
      for (Eigen::Index i = 0; i < n; ++i) emit(xh[i]);
    for (Eigen::Index i = 0; i < rec.err.size(); ++i) emit(rec.err[i]);
    out << "\n";
  }
}

// Least-squares geometric decay rate of the worst-observer error, after a
// burn-in and above the arithmetic floor.
inline double fit_decay_rate(const std::vector<double>& errors, long burn_in = 10,
                             double floor = 1e-14) {
  auto collect = [&](long from) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = static_cast<std::size_t>(from); k < errors.size(); ++k)
      if (errors[k] > floor) pts.push_back({static_cast<double>(k), std::log(errors[k])});
    return pts;
  };
  auto pts = collect(burn_in);
  if (pts.size() < 3) pts = collect(1);
  if (pts.size() < 2) return 0.0;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double count = static_cast<double>(pts.size());
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return std::exp(slope);
}

}  // namespace dobs
