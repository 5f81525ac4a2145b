#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dobs/numerics.hpp"
#include "dobs/plant.hpp"
#include "dobs/synthesis.hpp"
#include "dobs/weights.hpp"

namespace dobs {

// Plant and observer network seen as one LTI system with state (x, xhat, z),
// inputs entering the plant rows only, and per-vertex outputs xhat_i.
struct PlantObserverSystem {
  Matrix A_sys;
  Matrix B_sys;
  Eigen::Index n = 0;
  int m = 0;
  std::vector<int> mu;

  Eigen::Index dim() const { return A_sys.rows(); }
  Eigen::Index xhat_offset() const { return n; }
  // Selector of xhat_i as a system output.
  Matrix estimate_selector(int i) const {
    Matrix c = Matrix::Zero(n, dim());
    c.middleCols(n + (i - 1) * n, n) = Matrix::Identity(n, n);
    return c;
  }
};

namespace detail {

inline Matrix stacked_KH(const Plant& p, const GainSet& g) {
  // Column block applied to the physical state: block i is K_i H_i.
  Matrix out(static_cast<Eigen::Index>(p.m()) * p.n(), p.n());
  for (int i = 0; i < p.m(); ++i)
    out.middleRows(i * p.n(), p.n()) =
        g.K[static_cast<std::size_t>(i)] * p.H_blocks[static_cast<std::size_t>(i)];
  return out;
}

inline Matrix stacked_QH(const Plant& p, const GainSet& g) {
  Matrix out(g.total_mu(), p.n());
  Eigen::Index at = 0;
  for (int i = 0; i < p.m(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out.middleRows(at, g.mu[idx]) = g.Q[idx] * p.H_blocks[idx];
    at += g.mu[idx];
  }
  return out;
}

}  // namespace detail

inline PlantObserverSystem build_plant_observer(const Plant& p, const WeightMatrix& W,
                                                const GainSet& g, const Tolerances& tol) {
  validate_gains(p, g);
  if (!p.B_blocks) throw std::invalid_argument("build_plant_observer: plant has no input blocks");
  const Certificate cert = verify_omniscience_certificate(W, p, g, tol);
  if (!cert.pass)
    throw Error("build_plant_observer: observer gains are not certified (radius >= 1)");

  const Eigen::Index n = p.n();
  const int m = p.m();
  const Eigen::Index mn = m * n;
  const Eigen::Index mu_total = g.total_mu();
  const Eigen::Index dim = n + mn + mu_total;

  PlantObserverSystem sys;
  sys.n = n;
  sys.m = m;
  sys.mu = g.mu;
  sys.A_sys = Matrix::Zero(dim, dim);
  sys.A_sys.topLeftCorner(n, n) = p.A;
  sys.A_sys.block(n, 0, mn, n) = detail::stacked_KH(p, g);
  sys.A_sys.block(n, n, mn, mn) = kron(W.W, p.A);
  Eigen::Index mu_at = n + mn;
  for (int i = 0; i < m; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Matrix& Hi = p.H_blocks[idx];
    sys.A_sys.block(n + i * n, n + i * n, n, n) -= g.K[idx] * Hi;
    sys.A_sys.block(n + i * n, mu_at, n, g.mu[idx]) = g.P[idx];
    sys.A_sys.block(mu_at, n + i * n, g.mu[idx], n) = -(g.Q[idx] * Hi);
    sys.A_sys.block(mu_at, mu_at, g.mu[idx], g.mu[idx]) = g.S[idx];
    mu_at += g.mu[idx];
  }
  sys.A_sys.block(n + mn, 0, mu_total, n) = detail::stacked_QH(p, g);

  std::vector<int> all;
  for (int v = 1; v <= m; ++v) all.push_back(v);
  const Matrix B = stack_B(p, make_selection(all, m));
  sys.B_sys = Matrix::Zero(dim, B.cols());
  sys.B_sys.topRows(n) = B;

  // In (x, xtilde, z) coordinates the autonomous part is block diagonal:
  // plant spectrum plus error-dynamics spectrum. The involution T maps
  // (x, xhat, z) to those coordinates.
  Matrix T = Matrix::Identity(dim, dim);
  for (int i = 0; i < m; ++i) {
    T.block(n + i * n, 0, n, n) = Matrix::Identity(n, n);
    T.block(n + i * n, n + i * n, n, n) = -Matrix::Identity(n, n);
  }
  const Matrix transformed = T * sys.A_sys * T;
  Matrix expected = Matrix::Zero(dim, dim);
  expected.topLeftCorner(n, n) = p.A;
  expected.bottomRightCorner(mn + mu_total, mn + mu_total) = error_matrix(W, p, g);
  const double scale = std::max(1.0, sys.A_sys.cwiseAbs().maxCoeff());
  if (((transformed - expected).cwiseAbs().maxCoeff()) > 1e-9 * scale)
    throw Error("build_plant_observer: interconnection does not decouple into plant and error parts");

  return sys;
}

// Fully decoupled controllers w_i(k+1) = S^d_i w_i + Q^d_i xhat_i,
// u_i = P^d_i w_i + K^d_i xhat_i.
struct DecoupledControllerSet {
  std::vector<Matrix> Kd;  // p_i x n
  std::vector<Matrix> Pd;  // p_i x nu_i
  std::vector<Matrix> Qd;  // nu_i x n
  std::vector<Matrix> Sd;  // nu_i x nu_i
  std::vector<int> nu;

  Eigen::Index total_nu() const {
    Eigen::Index sum = 0;
    for (int v : nu) sum += v;
    return sum;
  }
};

inline DecoupledControllerSet zero_controllers(const Plant& p, const std::vector<int>& nu) {
  if (static_cast<int>(nu.size()) != p.m())
    throw std::invalid_argument("controllers: nu list must have one entry per vertex");
  DecoupledControllerSet d;
  d.nu = nu;
  for (int i = 1; i <= p.m(); ++i) {
    const Eigen::Index ni = nu[static_cast<std::size_t>(i - 1)];
    if (ni < 0) throw std::invalid_argument("controllers: nu must be nonnegative");
    d.Kd.push_back(Matrix::Zero(p.p(i), p.n()));
    d.Pd.push_back(Matrix::Zero(p.p(i), ni));
    d.Qd.push_back(Matrix::Zero(ni, p.n()));
    d.Sd.push_back(Matrix::Zero(ni, ni));
  }
  return d;
}

// Closed loop of the plant/observer system with the decoupled controllers:
// [[A_sys + B_sys Kd C, B_sys Pd], [Qd C, Sd]] where C extracts xhat.
inline Matrix closed_loop_interconnection(const PlantObserverSystem& sys,
                                          const DecoupledControllerSet& d) {
  const Eigen::Index dim = sys.dim();
  const Eigen::Index mn = static_cast<Eigen::Index>(sys.m) * sys.n;
  const Eigen::Index nu_total = d.total_nu();
  Eigen::Index p_total = 0;
  for (const Matrix& k : d.Kd) p_total += k.rows();

  Matrix C = Matrix::Zero(mn, dim);
  C.middleCols(sys.n, mn) = Matrix::Identity(mn, mn);

  Matrix Kd = Matrix::Zero(p_total, mn);
  Matrix Pd = Matrix::Zero(p_total, nu_total);
  Matrix Qd = Matrix::Zero(nu_total, mn);
  Matrix Sd = Matrix::Zero(nu_total, nu_total);
  Eigen::Index p_at = 0, nu_at = 0;
  for (int i = 0; i < sys.m; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    Kd.block(p_at, i * sys.n, d.Kd[idx].rows(), sys.n) = d.Kd[idx];
    Pd.block(p_at, nu_at, d.Pd[idx].rows(), d.Pd[idx].cols()) = d.Pd[idx];
    Qd.block(nu_at, i * sys.n, d.Qd[idx].rows(), sys.n) = d.Qd[idx];
    Sd.block(nu_at, nu_at, d.Sd[idx].rows(), d.Sd[idx].cols()) = d.Sd[idx];
    p_at += d.Kd[idx].rows();
    nu_at += d.Qd[idx].rows();
  }

  Matrix cl = Matrix::Zero(dim + nu_total, dim + nu_total);
  cl.topLeftCorner(dim, dim) = sys.A_sys + sys.B_sys * Kd * C;
  cl.topRightCorner(dim, nu_total) = sys.B_sys * Pd;
  cl.bottomLeftCorner(nu_total, dim) = Qd * C;
  cl.bottomRightCorner(nu_total, nu_total) = Sd;
  return cl;
}

struct DecoupledSynthesisResult {
  DecoupledControllerSet controllers;
  double closed_loop_radius = 0;
  long iterations = 0;
  bool converged = false;
};

namespace detail {

struct ControllerPacker {
  Eigen::Index total = 0;

  explicit ControllerPacker(const DecoupledControllerSet& d) {
    for (const auto* blocks : {&d.Kd, &d.Pd, &d.Qd, &d.Sd})
      for (const Matrix& b : *blocks) total += b.size();
  }

  Eigen::VectorXd pack(const DecoupledControllerSet& d) const {
    Eigen::VectorXd theta(total);
    Eigen::Index at = 0;
    for (const auto* blocks : {&d.Kd, &d.Pd, &d.Qd, &d.Sd})
      for (const Matrix& b : *blocks)
        for (Eigen::Index c = 0; c < b.cols(); ++c)
          for (Eigen::Index r = 0; r < b.rows(); ++r) theta[at++] = b(r, c);
    return theta;
  }

  void unpack(const Eigen::VectorXd& theta, DecoupledControllerSet& d) const {
    Eigen::Index at = 0;
    for (auto* blocks : {&d.Kd, &d.Pd, &d.Qd, &d.Sd})
      for (Matrix& b : *blocks)
        for (Eigen::Index c = 0; c < b.cols(); ++c)
          for (Eigen::Index r = 0; r < b.rows(); ++r) b(r, c) = theta[at++];
  }
};

}  // namespace detail

// Pattern-search stabilization of the plant/observer system through the
// decoupled controllers, warm-started with a least-squares state feedback on
// the plant modes (the estimates converge to the state, so u = Kd x is the
// natural first guess).
inline DecoupledSynthesisResult synthesize_decoupled(const PlantObserverSystem& sys,
                                                     const Plant& p, const std::vector<int>& nu,
                                                     const SynthesisOptions& opts,
                                                     const Tolerances& tol) {
  tol.validate();
  {
    const PbhResult st = is_stabilizable(sys.A_sys, sys.B_sys, tol);
    if (!st.ok)
      throw Error("synthesize_decoupled: plant/observer system is not stabilizable");
  }

  std::vector<int> all;
  for (int v = 1; v <= p.m(); ++v) all.push_back(v);
  const Matrix B = stack_B(p, make_selection(all, p.m()));

  // Static starts: shrink the plant's unstable modes in least squares, and a
  // Riccati state feedback split across the channels (the estimates stand in
  // for the state).
  DecoupledControllerSet warm_shrink = zero_controllers(p, nu);
  DecoupledControllerSet warm_lqr = zero_controllers(p, nu);
  const Matrix F = detail::lqr_state_feedback(p.A, B);
  {
    const Matrix delta = detail::mode_shrinking_injection(p.A, tol);
    const Matrix k_stack = -detail::pinv(B) * delta;
    Eigen::Index row_at = 0;
    for (int i = 0; i < p.m(); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      warm_shrink.Kd[idx] = k_stack.middleRows(row_at, p.p(i + 1));
      warm_lqr.Kd[idx] = F.middleRows(row_at, p.p(i + 1));
      row_at += p.p(i + 1);
    }
  }

  // Dynamic start: each vertex runs an input-aware copy of the plant that
  // deadbeats onto the incoming estimate (w <- x through Qd = A), and feeds
  // back u = F w. The observer class carries no input feedthrough, so this
  // compensator is what restores a separation-like cascade.
  std::vector<DecoupledControllerSet> candidates{warm_lqr, warm_shrink, zero_controllers(p, nu)};
  {
    bool full_order = true;
    for (int v : nu) full_order = full_order && v == p.n();
    if (full_order) {
      DecoupledControllerSet tracker = zero_controllers(p, nu);
      const Matrix BF = B * F;
      Eigen::Index row_at = 0;
      for (int i = 0; i < p.m(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        tracker.Qd[idx] = p.A;
        tracker.Sd[idx] = BF;
        tracker.Pd[idx] = F.middleRows(row_at, p.p(i + 1));
        row_at += p.p(i + 1);
      }
      candidates.push_back(std::move(tracker));
    }
  }

  const detail::ControllerPacker packer(candidates.front());
  DecoupledControllerSet work = candidates.front();
  auto objective = [&](const Eigen::VectorXd& theta) {
    packer.unpack(theta, work);
    return spectral_radius(closed_loop_interconnection(sys, work));
  };

  std::vector<std::pair<double, Eigen::VectorXd>> ranked;
  for (const DecoupledControllerSet& candidate : candidates) {
    const Eigen::VectorXd theta = packer.pack(candidate);
    ranked.push_back({objective(theta), theta});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Eigen::VectorXd> starts;
  for (auto& [value, theta] : ranked) starts.push_back(std::move(theta));

  const detail::MultiStartResult run =
      detail::multi_start_search(objective, starts, opts, 1.0 - tol.stability_margin, 0xc71);

  DecoupledSynthesisResult best;
  best.iterations = run.evals + static_cast<long>(starts.size());
  packer.unpack(run.point, work);
  best.controllers = work;
  best.closed_loop_radius = run.value;
  best.converged = best.closed_loop_radius < 1.0 - tol.stability_margin;
  return best;
}

// Distributed controller ready to run at the vertices: internal state
// (xhat_i, z_i, w_i), inputs y_i and neighbors' xhat_j, output u_i. The
// realization carries the innovation gains negated, which makes its
// interconnection with the plant match the plant/observer + decoupled
// assembly entry for entry.
struct DistributedController {
  WeightMatrix W;
  GainSet observer;
  DecoupledControllerSet decoupled;

  Matrix innovation_K(int i) const { return -observer.K[static_cast<std::size_t>(i - 1)]; }
  Matrix innovation_Q(int i) const { return -observer.Q[static_cast<std::size_t>(i - 1)]; }
};

inline DistributedController compose_distributed_controller(const GainSet& g,
                                                            const DecoupledControllerSet& d,
                                                            const WeightMatrix& W) {
  if (g.K.size() != d.Kd.size())
    throw std::invalid_argument("compose: observer and controller vertex counts differ");
  return DistributedController{W, g, d};
}

// State index permutation between the per-vertex grouping (x, then
// (xhat_i, z_i, w_i) per vertex) and the stacked grouping (x, xhat, z, w).
inline std::vector<Eigen::Index> interconnection_permutation(Eigen::Index n, int m,
                                                             const std::vector<int>& mu,
                                                             const std::vector<int>& nu) {
  std::vector<Eigen::Index> perm;
  Eigen::Index mu_total = 0, nu_total = 0;
  for (int v : mu) mu_total += v;
  for (int v : nu) nu_total += v;
  (void)nu_total;
  for (Eigen::Index i = 0; i < n; ++i) perm.push_back(i);
  Eigen::Index mu_off = 0, nu_off = 0;
  for (int i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) perm.push_back(n + i * n + k);
    for (Eigen::Index k = 0; k < mu[static_cast<std::size_t>(i)]; ++k)
      perm.push_back(n + static_cast<Eigen::Index>(m) * n + mu_off + k);
    for (Eigen::Index k = 0; k < nu[static_cast<std::size_t>(i)]; ++k)
      perm.push_back(n + static_cast<Eigen::Index>(m) * n + mu_total + nu_off + k);
    mu_off += mu[static_cast<std::size_t>(i)];
    nu_off += nu[static_cast<std::size_t>(i)];
  }
  return perm;
}

// Closed loop of the plant with the distributed controller, assembled from
// the per-vertex realization in per-vertex state order.
inline Matrix closed_loop_distributed(const Plant& p, const DistributedController& dc) {
  if (!p.B_blocks) throw std::invalid_argument("closed_loop_distributed: plant has no inputs");
  const Eigen::Index n = p.n();
  const int m = p.m();
  const GainSet& g = dc.observer;
  const DecoupledControllerSet& d = dc.decoupled;

  Eigen::Index dim = n;
  std::vector<Eigen::Index> base(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    base[static_cast<std::size_t>(i)] = dim;
    dim += n + g.mu[static_cast<std::size_t>(i)] + d.nu[static_cast<std::size_t>(i)];
  }

  Matrix cl = Matrix::Zero(dim, dim);
  cl.topLeftCorner(n, n) = p.A;
  for (int i = 0; i < m; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Eigen::Index bx = base[idx];           // xhat_i rows
    const Eigen::Index bz = bx + n;              // z_i rows
    const Eigen::Index bw = bz + g.mu[idx];      // w_i rows
    const Matrix& Bi = (*p.B_blocks)[idx];
    const Matrix& Hi = p.H_blocks[idx];
    const Matrix K10 = dc.innovation_K(i + 1);
    const Matrix Q10 = dc.innovation_Q(i + 1);

    // u_i = Kd_i xhat_i + Pd_i w_i enters the plant rows.
    cl.block(0, bx, n, n) += Bi * d.Kd[idx];
    cl.block(0, bw, n, d.nu[idx]) += Bi * d.Pd[idx];

    // xhat_i update: consensus over neighbors, negated innovation, augmentation.
    for (int j = 0; j < m; ++j) {
      const double w = dc.W.W(i, j);
      if (w != 0.0)
        cl.block(bx, base[static_cast<std::size_t>(j)], n, n) += w * p.A;
    }
    cl.block(bx, 0, n, n) -= K10 * Hi;
    cl.block(bx, bx, n, n) += K10 * Hi;
    cl.block(bx, bz, n, g.mu[idx]) = g.P[idx];

    // z_i update.
    cl.block(bz, 0, g.mu[idx], n) = -(Q10 * Hi);
    cl.block(bz, bx, g.mu[idx], n) = Q10 * Hi;
    cl.block(bz, bz, g.mu[idx], g.mu[idx]) = g.S[idx];

    // w_i update.
    cl.block(bw, bx, d.nu[idx], n) = d.Qd[idx];
    cl.block(bw, bw, d.nu[idx], d.nu[idx]) = d.Sd[idx];
  }
  return cl;
}

// End-to-end distributed stabilization: assumption checks, observer design,
// controller design, and composition with certificates at each stage.
struct ControlPipelineOptions {
  std::uint64_t seed = 0;
  SynthesisOptions observer;
  SynthesisOptions controller;
  std::optional<std::vector<int>> mu;
  std::optional<std::vector<int>> nu;
};

struct ControlPipelineResult {
  bool assumptions_hold = false;
  std::string assumption_detail;
  OmniscienceConditionReport condition;
  PbhResult stabilizable;
  std::optional<WeightMatrix> W;
  std::optional<SynthesisResult> observer;
  bool mu_escalated = false;
  bool nu_escalated = false;
  std::optional<DecoupledSynthesisResult> controller;
  std::optional<DistributedController> composed;
  bool converged = false;
  double closed_loop_radius = 0;
};

inline ControlPipelineResult control_pipeline(const Plant& p, const DirectedGraph& g,
                                              const ControlPipelineOptions& opts,
                                              const Tolerances& tol) {
  if (!p.B_blocks) throw std::invalid_argument("control_pipeline: plant has no input blocks");
  ControlPipelineResult out;

  std::vector<int> all;
  for (int v = 1; v <= p.m(); ++v) all.push_back(v);
  out.stabilizable = is_stabilizable(p.A, stack_B(p, make_selection(all, p.m())), tol);
  out.condition = omniscience_condition(p, g, tol);
  if (!out.stabilizable.ok || !out.condition.holds) {
    out.assumptions_hold = false;
    if (!out.stabilizable.ok) out.assumption_detail = "plant is not stabilizable";
    if (!out.condition.holds) {
      if (!out.assumption_detail.empty()) out.assumption_detail += "; ";
      out.assumption_detail += "a source component subsystem is not detectable";
    }
    return out;
  }
  out.assumptions_hold = true;

  SynthesisOptions obs_opts = opts.observer;
  obs_opts.seed = Rng::derive_seed(opts.seed, 1);
  out.W = build_weight_matrix(g, p.A, tol, Rng::derive_seed(opts.seed, 2));
  const EscalatedSynthesis obs = synthesize_gains_escalating(*out.W, p, obs_opts, tol, opts.mu);
  out.observer = obs.result;
  out.mu_escalated = obs.escalated;
  if (!obs.result.converged) {
    out.closed_loop_radius = obs.result.closed_loop_radius;
    return out;
  }

  const PlantObserverSystem sys = build_plant_observer(p, *out.W, obs.result.gains, tol);
  SynthesisOptions ctrl_opts = opts.controller;
  ctrl_opts.seed = Rng::derive_seed(opts.seed, 3);
  std::vector<int> nu =
      opts.nu ? *opts.nu : std::vector<int>(static_cast<std::size_t>(p.m()), static_cast<int>(p.n()));
  DecoupledSynthesisResult ctrl = synthesize_decoupled(sys, p, nu, ctrl_opts, tol);
  if (!ctrl.converged && !opts.nu) {
    std::vector<int> doubled(static_cast<std::size_t>(p.m()), static_cast<int>(2 * p.n()));
    DecoupledSynthesisResult second = synthesize_decoupled(sys, p, doubled, ctrl_opts, tol);
    if (second.closed_loop_radius < ctrl.closed_loop_radius) {
      ctrl = std::move(second);
      out.nu_escalated = true;
    }
  }
  out.controller = ctrl;
  out.closed_loop_radius = ctrl.closed_loop_radius;
  out.converged = ctrl.converged;
  out.composed = compose_distributed_controller(obs.result.gains, ctrl.controllers, *out.W);
  return out;
}

}  // namespace dobs
