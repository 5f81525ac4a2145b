#include <catch_amalgamated.hpp>

#include "dobs/control.hpp"
#include "support/helpers.hpp"

using namespace dobs;

namespace {
const Tolerances tol;

WeightMatrix plain(const Matrix& W) { return WeightMatrix{W, std::nullopt, std::nullopt}; }

struct CertifiedInstance {
  DirectedGraph graph;
  Plant plant;
  WeightMatrix W;
  GainSet gains;
};

// Two-vertex instance with inputs and a certified observer.
CertifiedInstance certified_two_vertex(std::uint64_t seed) {
  const DirectedGraph g = make_graph(2, {{1, 2}, {2, 1}});
  Matrix A(2, 2);
  A << 1.3, 0.2, 0, 0.7;
  Matrix H1(1, 2), H2(1, 2);
  H1 << 1, 0;
  H2 << 0, 1;
  std::vector<Matrix> B{Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
  B[0] << 1, 0;
  B[1] << 0, 1;
  Plant p = make_plant(A, {H1, H2}, B);
  WeightMatrix W = build_weight_matrix(g, A, tol, seed);
  SynthesisOptions opts;
  opts.seed = seed;
  const SynthesisResult res = synthesize_gains(W, p, {2, 2}, opts, tol);
  REQUIRE(res.converged);
  return {g, std::move(p), std::move(W), res.gains};
}

DecoupledControllerSet random_controllers(const Plant& p, const std::vector<int>& nu, Rng& rng) {
  DecoupledControllerSet d = zero_controllers(p, nu);
  auto fill = [&](Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.gaussian();
  };
  for (int i = 0; i < p.m(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    fill(d.Kd[idx]);
    fill(d.Pd[idx]);
    fill(d.Qd[idx]);
    fill(d.Sd[idx]);
  }
  return d;
}

}  // namespace

TEST_CASE("plant/observer system, single-vertex reduction") {
  Matrix A(2, 2);
  A << 1.4, 1, 0, 0.5;
  Matrix H(1, 2);
  H << 1, 0;
  std::vector<Matrix> B{Matrix::Zero(2, 1)};
  B[0] << 0, 1;
  const Plant p = make_plant(A, {H}, B);
  Matrix W1(1, 1);
  W1 << 1;
  SynthesisOptions opts;
  opts.seed = 3;
  const SynthesisResult res = synthesize_gains(plain(W1), p, {0}, opts, tol);
  REQUIRE(res.converged);
  const PlantObserverSystem sys = build_plant_observer(p, plain(W1), res.gains, tol);

  // Classic observer-augmented plant: [[A, 0], [KH, A - KH]].
  Matrix expected(4, 4);
  expected.setZero();
  expected.topLeftCorner(2, 2) = A;
  expected.block(2, 0, 2, 2) = res.gains.K[0] * H;
  expected.block(2, 2, 2, 2) = A - res.gains.K[0] * H;
  CHECK(sys.A_sys.isApprox(expected));
  CHECK(sys.B_sys.topRows(2).isApprox(B[0]));
  CHECK(sys.B_sys.bottomRows(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("plant/observer system rejects uncertified gains") {
  const DirectedGraph g = make_graph(2, {{1, 2}, {2, 1}});
  Matrix A(1, 1);
  A << 2;
  std::vector<Matrix> B{Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  const Plant p = make_plant(A, {Matrix::Identity(1, 1), Matrix::Identity(1, 1)}, B);
  Matrix W(2, 2);
  W << 0.5, 0.5, 0.5, 0.5;
  const GainSet zero = zero_gains(p, {0, 0});  // open loop, radius 2
  CHECK_THROWS_AS(build_plant_observer(p, plain(W), zero, tol), Error);
}

TEST_CASE("plant/observer spectrum is the union of plant and error spectra") {
  const CertifiedInstance inst = certified_two_vertex(41);
  const PlantObserverSystem sys = build_plant_observer(inst.plant, inst.W, inst.gains, tol);
  const Spectrum ssys = spectrum(sys.A_sys, tol);

  std::vector<Complex> expected;
  const Spectrum sa = spectrum(inst.plant.A, tol);
  for (Eigen::Index i = 0; i < sa.values.size(); ++i) expected.push_back(sa.values[i]);
  const Spectrum se = spectrum(error_matrix(inst.W, inst.plant, inst.gains), tol);
  for (Eigen::Index i = 0; i < se.values.size(); ++i) expected.push_back(se.values[i]);

  REQUIRE(static_cast<std::size_t>(ssys.values.size()) == expected.size());
  std::vector<bool> used(expected.size(), false);
  for (Eigen::Index i = 0; i < ssys.values.size(); ++i) {
    bool matched = false;
    for (std::size_t j = 0; j < expected.size(); ++j) {
      if (!used[j] && std::abs(ssys.values[i] - expected[j]) < 1e-6) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    CHECK(matched);
  }
}

TEST_CASE("plant/observer trajectories converge to the plant with no input") {
  const CertifiedInstance inst = certified_two_vertex(43);
  const PlantObserverSystem sys = build_plant_observer(inst.plant, inst.W, inst.gains, tol);

  Rng rng(47);
  Vector state(sys.dim());
  for (Eigen::Index i = 0; i < state.size(); ++i) state[i] = rng.gaussian();
  double initial_error = 0;
  for (int i = 1; i <= 2; ++i)
    initial_error = std::max(initial_error, (sys.estimate_selector(i) * state - state.head(2)).norm());
  for (int k = 0; k < 120; ++k) state = sys.A_sys * state;

  // The state grows with the unstable plant; the estimates track it in
  // relative terms, down to the floating-point floor of the simulation.
  const Vector x = state.head(2);
  for (int i = 1; i <= 2; ++i) {
    const Vector xhat = sys.estimate_selector(i) * state;
    CHECK((xhat - x).norm() <= std::max(1e-10 * x.norm(), 0.2 * initial_error));
  }
  const Vector z = state.tail(sys.A_sys.rows() - 2 - 4);
  CHECK(z.norm() <= std::max(1e-10 * x.norm(), 0.2 * initial_error));
}

TEST_CASE("decoupled synthesis stabilizes an already stable plant immediately") {
  const DirectedGraph g = make_graph(2, {{1, 2}, {2, 1}});
  Matrix A = 0.5 * Matrix::Identity(2, 2);
  std::vector<Matrix> H{Matrix::Identity(2, 2).topRows(1), Matrix::Identity(2, 2).bottomRows(1)};
  std::vector<Matrix> B{Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
  B[0] << 1, 0;
  B[1] << 0, 1;
  const Plant p = make_plant(A, H, B);
  const WeightMatrix W = build_weight_matrix(g, A, tol, 53);
  SynthesisOptions opts;
  opts.seed = 53;
  const SynthesisResult obs = synthesize_gains(W, p, {0, 0}, opts, tol);
  REQUIRE(obs.converged);
  const PlantObserverSystem sys = build_plant_observer(p, W, obs.gains, tol);
  const DecoupledSynthesisResult ctrl = synthesize_decoupled(sys, p, {0, 0}, opts, tol);
  CHECK(ctrl.converged);
  CHECK(ctrl.closed_loop_radius < 1 - tol.stability_margin);
}

TEST_CASE("scalar plant with one vertex is stabilized") {
  const DirectedGraph g = make_graph(1, {});
  Matrix A(1, 1), H(1, 1), B(1, 1);
  A << 1.5;
  H << 1;
  B << 1;
  const Plant p = make_plant(A, {H}, {{B}});
  ControlPipelineOptions opts;
  opts.seed = 59;
  const ControlPipelineResult res = control_pipeline(p, g, opts, tol);
  CHECK(res.assumptions_hold);
  CHECK(res.converged);
  CHECK(res.closed_loop_radius < 1 - tol.stability_margin);
}

TEST_CASE("separation: controller stage succeeds exactly when the plant is stabilizable") {
  Rng rng(61);
  Matrix W1(1, 1);
  W1 << 1;
  for (int trial = 0; trial < 12; ++trial) {
    const int n = rng.uniform_int(1, 2);
    Matrix A = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) A(i, i) = rng.uniform(1.1, 1.8);
    const Matrix H = Matrix::Identity(n, n);  // fully observable
    Matrix B = Matrix::Zero(n, 1);
    const bool expect_ok = rng.bernoulli(0.5);
    if (expect_ok)
      for (int i = 0; i < n; ++i) B(i, 0) = rng.uniform(0.5, 1.5);
    // else: B stays zero and every unstable mode is uncontrollable

    const Plant p = make_plant(A, {H}, {{B}});
    SynthesisOptions opts;
    opts.seed = rng.next_u64();
    const SynthesisResult obs = synthesize_gains(plain(W1), p, {0}, opts, tol);
    REQUIRE(obs.converged);
    const PlantObserverSystem sys = build_plant_observer(p, plain(W1), obs.gains, tol);
    if (expect_ok) {
      const DecoupledSynthesisResult ctrl = synthesize_decoupled(sys, p, {n}, opts, tol);
      CHECK(ctrl.converged);
    } else {
      CHECK_THROWS_AS(synthesize_decoupled(sys, p, {n}, opts, tol), Error);
    }
  }
}

TEST_CASE("two assembly paths agree entrywise after the permutation") {
  const CertifiedInstance inst = certified_two_vertex(67);
  Rng rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<int> nu{rng.uniform_int(0, 2), rng.uniform_int(0, 2)};
    const DecoupledControllerSet d = random_controllers(inst.plant, nu, rng);
    const DistributedController dc = compose_distributed_controller(inst.gains, d, inst.W);

    const PlantObserverSystem sys = build_plant_observer(inst.plant, inst.W, inst.gains, tol);
    const Matrix path_a = closed_loop_interconnection(sys, d);
    const Matrix path_b = closed_loop_distributed(inst.plant, dc);
    const auto perm = interconnection_permutation(inst.plant.n(), inst.plant.m(), inst.gains.mu, nu);

    REQUIRE(path_a.rows() == path_b.rows());
    double max_diff = 0;
    for (Eigen::Index r = 0; r < path_b.rows(); ++r)
      for (Eigen::Index c = 0; c < path_b.cols(); ++c)
        max_diff = std::max(max_diff, std::abs(path_b(r, c) - path_a(perm[static_cast<std::size_t>(r)],
                                                                     perm[static_cast<std::size_t>(c)])));
    CHECK(max_diff <= 1e-12);
  }
}

TEST_CASE("single-vertex composition is standard observer-based output feedback") {
  Matrix A(1, 1), H(1, 1), B(1, 1);
  A << 1.5;
  H << 1;
  B << 1;
  const Plant p = make_plant(A, {H}, {{B}});
  Matrix W1(1, 1);
  W1 << 1;
  SynthesisOptions opts;
  opts.seed = 73;
  const SynthesisResult obs = synthesize_gains(plain(W1), p, {0}, opts, tol);
  REQUIRE(obs.converged);
  const PlantObserverSystem sys = build_plant_observer(p, plain(W1), obs.gains, tol);
  const DecoupledSynthesisResult ctrl = synthesize_decoupled(sys, p, {1}, opts, tol);
  REQUIRE(ctrl.converged);
  const DistributedController dc =
      compose_distributed_controller(obs.gains, ctrl.controllers, plain(W1));
  const Matrix closed = closed_loop_distributed(p, dc);
  // (x, xhat, w): the estimate has no input feedthrough, so the compensator
  // state carries the input awareness.
  const double k = obs.gains.K[0](0, 0);
  const double kd = ctrl.controllers.Kd[0](0, 0);
  const double pd = ctrl.controllers.Pd[0](0, 0);
  const double qd = ctrl.controllers.Qd[0](0, 0);
  const double sd = ctrl.controllers.Sd[0](0, 0);
  Matrix expected(3, 3);
  expected << 1.5, kd, pd,
              k, 1.5 - k, 0,
              0, qd, sd;
  CHECK((closed - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(spectral_radius(closed) < 1 - tol.stability_margin);
}

TEST_CASE("pipeline reports assumption failures without searching") {
  const DirectedGraph g = make_graph(1, {});
  Matrix A(1, 1), H(1, 1);
  A << 2;
  H << 1;

  // Not stabilizable: zero input map on an unstable mode.
  const Plant p1 = make_plant(A, {H}, {{Matrix::Zero(1, 1)}});
  ControlPipelineOptions opts;
  opts.seed = 79;
  const ControlPipelineResult r1 = control_pipeline(p1, g, opts, tol);
  CHECK(!r1.assumptions_hold);
  CHECK(r1.assumption_detail.find("stabilizable") != std::string::npos);
  CHECK(!r1.observer.has_value());

  // Not detectable: no measurements anywhere.
  const Plant p2 = make_plant(A, {Matrix(0, 1)}, {{Matrix::Identity(1, 1)}});
  const ControlPipelineResult r2 = control_pipeline(p2, g, opts, tol);
  CHECK(!r2.assumptions_hold);
  CHECK(r2.assumption_detail.find("detectable") != std::string::npos);
}
