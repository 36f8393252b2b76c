#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alspg/alspg.hpp"
#include "alspg/rng.hpp"
#include "alspg/sets.hpp"
#include "alspg/spg.hpp"
#include "support/oracles.hpp"

using namespace alspg;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

ObjectiveOracle quadratic_oracle(const Matrix& Q, const Vector& target) {
  return {[Q, target](const Vector& x) { return 0.5 * (x - target).dot(Q * (x - target)); },
          [Q, target](const Vector& x) { return Vector(Q * (x - target)); }};
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("line search accepts the full step on a quadratic") {
  const ObjectiveOracle f{[](const Vector& x) { return 0.5 * x.squaredNorm(); },
                          [](const Vector& x) { return x; }};
  const Vector x = vec({1.0});
  const Vector d = vec({-1.0});
  ObjectiveHistory hist(10);
  hist.push(f.value(x));
  const auto res = nonmonotone_line_search(f, x, d, f.gradient(x).dot(d), hist, {});
  CHECK(res.ok);
  CHECK(res.alpha == 1.0);
  CHECK(res.x_next[0] == doctest::Approx(0.0));
}

TEST_CASE("memory one reduces to a monotone Armijo search") {
  // f increases at the full step; an older high value in the window lets the
  // non-monotone search take it, while M = 1 must backtrack.
  const auto scalar_f = [](double z) { return 0.5 - 0.1 * z + 0.3 * z * z; };
  const ObjectiveOracle f{[&](const Vector& x) { return scalar_f(x[0]); },
                          [&](const Vector& x) { return vec({-0.1 + 0.6 * x[0]}); }};
  const Vector x = vec({0.0});
  const Vector d = vec({1.0});
  const double c = f.gradient(x).dot(d);
  REQUIRE(c < 0.0);

  ObjectiveHistory wide(10);
  wide.push(5.0);  // older accepted iterate
  wide.push(scalar_f(0.0));
  const auto nonmono = nonmonotone_line_search(f, x, d, c, wide, {});
  CHECK(nonmono.ok);
  CHECK(nonmono.alpha == 1.0);  // temporary increase tolerated

  ObjectiveHistory narrow(1);
  narrow.push(5.0);  // evicted by the next push
  narrow.push(scalar_f(0.0));
  LineSearchConfig mono_cfg;
  mono_cfg.memory = 1;
  const auto mono = nonmonotone_line_search(f, x, d, c, narrow, mono_cfg);
  CHECK(mono.ok);
  CHECK(mono.alpha < 1.0);
  CHECK(scalar_f(mono.alpha) <= scalar_f(0.0) + mono.alpha * mono_cfg.beta * c);
}

TEST_CASE("line search replays an independent backtracking sequence on x^4") {
  const ObjectiveOracle f{[](const Vector& x) { return std::pow(x[0], 4); },
                          [](const Vector& x) { return vec({4.0 * std::pow(x[0], 3)}); }};
  const double x0 = 2.0;
  const Vector x = vec({x0});
  const Vector d = vec({-32.0});  // -f'(2)
  const double c = f.gradient(x).dot(d);
  ObjectiveHistory hist(10);
  hist.push(f.value(x));

  LineSearchConfig cfg;
  const auto res = nonmonotone_line_search(f, x, d, c, hist, cfg);
  REQUIRE(res.ok);

  // Independent scalar replay of the same acceptance rule.
  const auto phi = [&](double a) { return std::pow(x0 - 32.0 * a, 4); };
  const double fmax = phi(0.0);
  double alpha = 1.0;
  for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
    if (phi(alpha) <= fmax + alpha * cfg.beta * c) break;
    const double bar = -0.5 * alpha * alpha * c / (phi(alpha) - phi(0.0) - alpha * c);
    alpha = (bar >= 0.1 * alpha && bar <= 0.9 * alpha) ? bar : 0.5 * alpha;
  }
  CHECK(res.alpha == doctest::Approx(alpha).epsilon(1e-12));
}

TEST_CASE("line search error paths") {
  const ObjectiveOracle f{[](const Vector&) { return 2.0; },
                          [](const Vector& x) { return Vector::Zero(x.size()); }};
  ObjectiveHistory hist(10);
  hist.push(1.0);  // history says the current value is 1, trials all return 2
  CHECK_THROWS_AS(nonmonotone_line_search(f, vec({0.0}), vec({1.0}), 0.5, hist, {}),
                  std::invalid_argument);
  // No step can satisfy the decrease test, so the backtracks run out.
  LineSearchConfig cfg;
  const auto res = nonmonotone_line_search(f, vec({0.0}), vec({1.0}), -1.0, hist, cfg);
  CHECK_FALSE(res.ok);
  CHECK(res.backtracks == cfg.max_backtracks);
}

TEST_CASE("spectral stepsize follows the two-proposal rule") {
  SpgConfig cfg;
  // Identity curvature.
  CHECK(spectral_stepsize(vec({1.0, 2.0}), vec({1.0, 2.0}), cfg) == doctest::Approx(1.0));
  // Orthogonal s and y: the safeguard returns gamma_max.
  CHECK(spectral_stepsize(vec({1.0, 0.0}), vec({0.0, 1.0}), cfg) == cfg.gamma_max);
  CHECK(spectral_stepsize(vec({1.0}), vec({-1.0}), cfg) == cfg.gamma_max);

  // On a quadratic with Q = diag(1, 4) both proposals live between the
  // reciprocal extreme eigenvalues.
  Rng rng(3);
  const Matrix Q = vec({1.0, 4.0}).asDiagonal();
  for (int i = 0; i < 100; ++i) {
    const Vector s = rng.normal_vector(2);
    const Vector y = Q * s;
    const double sy = s.dot(y);
    const double g1 = s.dot(s) / sy;
    const double g2 = sy / y.dot(y);
    CHECK(g1 >= 0.25 - 1e-12);
    CHECK(g1 <= 1.0 + 1e-12);
    CHECK(g2 >= 0.25 - 1e-12);
    CHECK(g2 <= 1.0 + 1e-12);
    const double expected = g1 < 2.0 * g2 ? g2 : g1 - 0.5 * g2;
    CHECK(spectral_stepsize(s, y, cfg) == doctest::Approx(expected));
  }
}

TEST_CASE("spg solves box-constrained quadratics") {
  const BoxSet corner(vec({1.0, 1.0}), vec({kInf, kInf}));
  const ObjectiveOracle f{[](const Vector& x) { return 0.5 * x.squaredNorm(); },
                          [](const Vector& x) { return x; }};
  const SpgResult res = spg_minimize(f, corner, vec({3.0, 2.0}), {});
  CHECK(res.status == SpgStatus::converged);
  CHECK(res.x_star.isApprox(vec({1.0, 1.0}), 1e-6));
  CHECK(res.f_star == doctest::Approx(1.0));

  // Stationarity certificate, recomputed independently of the solver.
  const Vector residual = corner.project(res.x_star - f.gradient(res.x_star)) - res.x_star;
  CHECK(residual.lpNorm<Eigen::Infinity>() <= 1e-5);
}

TEST_CASE("spg over a disk lands on the analytic projection") {
  const QuadricAnnulusSet disk(Vector::Zero(2), 0.0, 2.0);  // radius 2
  const ObjectiveOracle f = quadratic_oracle(Matrix::Identity(2, 2), vec({3.0, 4.0}));
  const SpgResult res = spg_minimize(f, disk, vec({0.1, 0.0}), {});
  CHECK(res.status == SpgStatus::converged);
  CHECK(res.x_star.isApprox(vec({1.2, 1.6}), 1e-5));
}

TEST_CASE("spg matches a coordinate-descent oracle on random box QPs") {
  Rng rng(9);
  const Index n = 10;
  for (int trial = 0; trial < 5; ++trial) {
    Matrix A(n, n);
    for (Index i = 0; i < n; ++i) A.row(i) = rng.normal_vector(n).transpose();
    const Matrix H = A.transpose() * A + Matrix::Identity(n, n);
    const Vector c = rng.normal_vector(n) * 2.0;
    const Vector lo = Vector::Constant(n, -1.0), hi = Vector::Constant(n, 1.0);

    const ObjectiveOracle f{[&H, c](const Vector& x) { return 0.5 * x.dot(H * x) + c.dot(x); },
                            [&H, c](const Vector& x) { return Vector(H * x + c); }};
    SpgConfig cfg;
    cfg.tol = 1e-10;
    cfg.max_iter = 5000;
    const BoxSet box(lo, hi);
    const SpgResult res = spg_minimize(f, box, Vector::Zero(n), cfg);
    REQUIRE(res.status == SpgStatus::converged);

    const Vector ref = oracles::box_qp_coordinate_descent(H, c, lo, hi);
    CHECK((res.x_star - ref).norm() <= 1e-6);
  }
}

TEST_CASE("spg iterates stay feasible and respect the non-monotone envelope") {
  const BoxSet box(vec({-0.5, -0.5}), vec({0.5, 0.5}));
  const ObjectiveOracle f = quadratic_oracle(
      (Matrix(2, 2) << 10.0, 3.0, 3.0, 2.0).finished(), vec({2.0, -3.0}));
  SpgConfig cfg;
  std::vector<Vector> iterates;
  cfg.iterate_callback = [&iterates](const Vector& x) { iterates.push_back(x); };
  const SpgResult res = spg_minimize(f, box, vec({5.0, 5.0}), cfg);
  CHECK(res.status == SpgStatus::converged);
  REQUIRE(iterates.size() >= 2);
  for (const auto& x : iterates) CHECK(box.contains(x, 1e-9));

  const int M = cfg.line_search.memory;
  const auto& h = res.history;
  for (size_t k = 0; k + 1 < h.size(); ++k) {
    double fmax = -kInf;
    for (size_t j = k < static_cast<size_t>(M - 1) ? 0 : k - (M - 1); j <= k; ++j) {
      fmax = std::max(fmax, h[j].f);
    }
    CHECK(h[k + 1].f <= fmax + h[k].alpha * cfg.line_search.beta * h[k].dir_deriv + 1e-12);
  }
}

TEST_CASE("spg drives well-conditioned quadratics to tight stationarity") {
  Rng rng(31);
  const FreeSet free;
  for (double cond : {10.0, 100.0, 1000.0}) {
    const Index n = 8;
    Vector diag(n);
    for (Index i = 0; i < n; ++i) {
      diag[i] = std::pow(cond, static_cast<double>(i) / static_cast<double>(n - 1));
    }
    const Matrix Q = diag.asDiagonal();
    const ObjectiveOracle f = quadratic_oracle(Q, rng.normal_vector(n));
    SpgConfig cfg;
    cfg.tol = 1e-9;
    cfg.max_iter = 500;
    const SpgResult res = spg_minimize(f, free, rng.normal_vector(n) * 3.0, cfg);
    CHECK(res.status == SpgStatus::converged);
    CHECK(f.gradient(res.x_star).norm() <= 1e-8);
  }
}

TEST_CASE("warm-started gamma skips the probe gradient") {
  const FreeSet free;
  const ObjectiveOracle f = quadratic_oracle(Matrix::Identity(2, 2), Vector::Zero(2));
  SpgConfig warm;
  warm.initial_gamma = 1.0;
  const SpgResult res = spg_minimize(f, free, vec({1.0, 1.0}), warm);
  CHECK(res.status == SpgStatus::converged);
  CHECK(res.iterations == 1);  // exact Newton-like step for the identity quadratic
}

// ---------------------------------------------------------------------------
// Augmented Lagrangian

namespace {

ConstraintBlock scalar_singleton_block(double target, double rho, double lambda0 = 0.0) {
  ConstraintBlock b;
  b.name = "pin";
  b.set = std::make_shared<SingletonSet>(vec({target}));
  b.g = [](const Vector& x) { return x; };
  b.jvp_t = [](const Vector&, const Vector& r) { return r; };
  b.lambda = vec({lambda0});
  b.rho = rho;
  return b;
}

}  // namespace

TEST_CASE("augmented lagrangian value and gradient on the scalar pin") {
  const ObjectiveOracle zero{[](const Vector&) { return 0.0; },
                             [](const Vector& x) { return Vector::Zero(x.size()); }};
  const ObjectiveOracle square{[](const Vector& x) { return x.squaredNorm(); },
                               [](const Vector& x) { return Vector(2.0 * x); }};

  CHECK(al_value(vec({3.0}), {}, square) == doctest::Approx(9.0));  // no blocks

  std::vector<ConstraintBlock> blocks{scalar_singleton_block(1.0, 2.0)};
  CHECK(al_value(vec({3.0}), blocks, zero) == doctest::Approx(4.0));
  CHECK(al_gradient(vec({3.0}), blocks, zero)[0] == doctest::Approx(4.0));

  // Feasible point with zero multiplier: penalty and its gradient vanish.
  CHECK(al_value(vec({1.0}), blocks, square) == doctest::Approx(1.0));
  CHECK(al_gradient(vec({1.0}), blocks, square)[0] == doctest::Approx(2.0));
}

TEST_CASE("augmented lagrangian gradient matches finite differences") {
  Rng rng(41);
  // Random smooth map g: R^3 -> R^2 built from sines, plus a 3-D variant for
  // the cone; checked against every primitive set family.
  const auto make_g = [&rng](Index out_dim) {
    const Matrix A = Matrix::NullaryExpr(out_dim, 3, [&rng](Index, Index) { return rng.normal(); });
    const Matrix B = Matrix::NullaryExpr(out_dim, 3, [&rng](Index, Index) { return rng.normal(); });
    const Vector b = rng.normal_vector(out_dim);
    auto g = [A, B, b](const Vector& x) {
      Vector out = A * x + b;
      for (Index i = 0; i < out.size(); ++i) out[i] += std::sin(B.row(i).dot(x));
      return out;
    };
    auto jvp = [A, B](const Vector& x, const Vector& r) {
      Vector out = A.transpose() * r;
      for (Index i = 0; i < r.size(); ++i) {
        out += B.row(i).transpose() * (std::cos(B.row(i).dot(x)) * r[i]);
      }
      return out;
    };
    return std::make_pair(g, jvp);
  };

  std::vector<std::shared_ptr<const ProjectableSet>> sets2 = {
      std::make_shared<BoxSet>(vec({-0.5, -0.2}), vec({0.5, 0.6})),
      std::make_shared<AffineSlabSet>(vec({1.0, -1.0}), -0.3, 0.4),
      std::make_shared<QuadricAnnulusSet>(vec({0.1, 0.2}), 0.1, 0.9),
      std::make_shared<SingletonSet>(vec({0.2, -0.1}))};

  const ObjectiveOracle f{[](const Vector& x) { return 0.5 * x.squaredNorm(); },
                          [](const Vector& x) { return x; }};

  const auto check_block = [&](ConstraintBlock block) {
    std::vector<ConstraintBlock> blocks;
    blocks.push_back(std::move(block));
    for (int i = 0; i < 5; ++i) {
      const Vector x = rng.normal_vector(3);
      const Vector analytic = al_gradient(x, blocks, f);
      const Vector fd = oracles::fd_gradient(
          [&](const Vector& z) { return al_value(z, blocks, f); }, x, 1e-6);
      CHECK((analytic - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
    }
  };

  for (const auto& set : sets2) {
    auto [g, jvp] = make_g(2);
    ConstraintBlock b;
    b.name = "fd2";
    b.set = set;
    b.g = g;
    b.jvp_t = jvp;
    b.lambda = rng.normal_vector(2) * 0.5;
    b.rho = 1.7;
    check_block(std::move(b));
  }
  {
    auto [g, jvp] = make_g(3);
    ConstraintBlock b;
    b.name = "fd_soc";
    b.set = std::make_shared<SecondOrderConeSet>();
    b.g = g;
    b.jvp_t = jvp;
    b.lambda = rng.normal_vector(3) * 0.5;
    b.rho = 0.9;
    check_block(std::move(b));
  }
}

TEST_CASE("alspg solves the scalar pin to its KKT point") {
  const ObjectiveOracle square{[](const Vector& x) { return x.squaredNorm(); },
                               [](const Vector& x) { return Vector(2.0 * x); }};
  const FreeSet free;
  std::vector<ConstraintBlock> blocks{scalar_singleton_block(1.0, 0.0)};
  AlspgConfig cfg;
  const AlspgResult res = alspg_solve(square, free, blocks, vec({0.0}), cfg);
  CHECK(res.status == AlspgStatus::converged);
  CHECK(std::abs(res.x_star[0] - 1.0) <= 1e-4);
  CHECK(std::abs(res.blocks[0].lambda[0] + 2.0) <= 1e-2);
  CHECK(res.outer_iterations <= 50);
  CHECK(res.max_V < cfg.outer_tol);

  // Multiplier update identity, recomputed from the stored solution and the
  // previous multiplier recovered from the update equation.
  const auto& trace = res.outer_trace;
  REQUIRE(!trace.empty());

  // Penalty monotonicity: rho never decreases, and strictly increases only
  // when the block's V failed to decrease sufficiently.
  for (size_t k = 1; k < trace.size(); ++k) {
    CHECK(trace[k].block_rho[0] >= trace[k - 1].block_rho[0]);
    if (trace[k].block_rho[0] > trace[k - 1].block_rho[0]) {
      CHECK(trace[k].block_V[0] > cfg.sufficient_decrease * trace[k - 1].block_V[0] - 1e-15);
    }
  }
}

TEST_CASE("alspg with only a domain reduces to one projected solve") {
  const ObjectiveOracle f = quadratic_oracle(2.0 * Matrix::Identity(2, 2), vec({2.0, 0.0}));
  const QuadricAnnulusSet disk(Vector::Zero(2), 0.0, 0.5);  // unit disk
  const AlspgResult res = alspg_solve(f, disk, {}, vec({0.0, 0.0}), {});
  CHECK(res.status == AlspgStatus::converged);
  CHECK(res.outer_iterations == 1);
  CHECK(res.x_star.isApprox(vec({1.0, 0.0}), 1e-5));
  CHECK(res.max_V == 0.0);
}

TEST_CASE("alspg terminates immediately when blocks hold at the start") {
  const ObjectiveOracle f{[](const Vector& x) { return 0.5 * x.squaredNorm(); },
                          [](const Vector& x) { return x; }};
  const FreeSet free;
  ConstraintBlock box_block;
  box_block.name = "box";
  box_block.set = std::make_shared<BoxSet>(vec({-1.0, -1.0}), vec({1.0, 1.0}));
  box_block.g = [](const Vector& x) { return x; };
  box_block.jvp_t = [](const Vector&, const Vector& r) { return r; };
  const AlspgResult res = alspg_solve(f, free, {box_block}, vec({0.3, -0.2}), {});
  CHECK(res.status == AlspgStatus::converged);
  CHECK(res.outer_iterations == 1);
  CHECK(res.max_V == 0.0);
  CHECK(res.x_star.norm() <= 1e-5);
}

TEST_CASE("multiplier update identity recomputed from the stored iterate") {
  const ObjectiveOracle square{[](const Vector& x) { return x.squaredNorm(); },
                               [](const Vector& x) { return Vector(2.0 * x); }};
  const FreeSet free;
  // One outer iteration from lambda_0 = 0: the reported multiplier must equal
  // rho * (g(x_1) - proj(g(x_1))) recomputed from the stored solution.
  AlspgConfig cfg;
  cfg.max_outer = 1;
  cfg.outer_tol = 1e-16;
  const double rho = 0.1;
  std::vector<ConstraintBlock> blocks{scalar_singleton_block(1.0, rho)};
  const AlspgResult res = alspg_solve(square, free, blocks, vec({0.0}), cfg);
  REQUIRE(res.outer_iterations == 1);
  const SingletonSet pin(vec({1.0}));
  const Vector gx = res.x_star;  // g is the identity map
  const Vector expected = rho * (gx - pin.project(gx));
  CHECK(std::abs(res.blocks[0].lambda[0] - expected[0]) <= 1e-12);
}
