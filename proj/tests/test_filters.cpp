#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <limits>

#include "rkflab/filters.hpp"
#include "rkflab/metrics.hpp"
#include "testutil.hpp"

using namespace rkflab;

namespace {

Matrix iso(int m, double c) {
  Matrix s(m, m, 0.0);
  for (int i = 0; i < m; ++i) s(i, i) = c;
  return s;
}

StateSpaceModel scalar_model(double h = 1.0) {
  StateSpaceModel m;
  m.n = 1;
  m.m = 1;
  m.F = Matrix::identity(1);
  m.H = Matrix(1, 1, h);
  m.Q = Matrix(1, 1, 0.0);
  return m;
}

GaussianBelief paper_init() {
  GaussianBelief init;
  init.mean = Vector{0.0, 0.0, 10.0, 10.0};
  init.cov = Matrix(4, 4, 0.0);
  init.cov(0, 0) = init.cov(1, 1) = 25.0;
  init.cov(2, 2) = init.cov(3, 3) = 2.0;
  return init;
}

std::vector<Trajectory> make_set(const StateSpaceModel& model, const NoiseSpec& noise, int count,
                                 int T, std::uint64_t seed) {
  std::vector<Trajectory> out;
  out.reserve(count);
  for (int j = 0; j < count; ++j) {
    RandomStream rng = RandomStream::derived(seed, {static_cast<std::uint64_t>(j)});
    out.push_back(simulate(model, paper_init(), noise, T, rng));
  }
  return out;
}

double set_armse(const std::function<std::vector<GaussianBelief>(const Trajectory&)>& filter,
                 const std::vector<Trajectory>& set) {
  std::vector<std::vector<GaussianBelief>> estimates;
  estimates.reserve(set.size());
  for (const Trajectory& t : set) estimates.push_back(filter(t));
  return armse(estimates, set);
}

}  // namespace

TEST_CASE("kf_update scalar closed form") {
  const StateSpaceModel m = scalar_model();
  GaussianBelief pred;
  pred.mean = Vector{0.0};
  pred.cov = Matrix(1, 1, 1.0);
  const KfUpdateResult r = kf_update(pred, Vector{2.0}, iso(1, 1.0), m);
  CHECK(r.gain(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.posterior.mean[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.posterior.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.innovation[0] == doctest::Approx(2.0));
  CHECK(r.innovation_cov(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("kf_update zero innovation keeps the prior mean") {
  const StateSpaceModel m = cv_model(1.0);
  GaussianBelief pred = paper_init();
  const Vector z = affine_map(m.H, pred.mean, nullptr);
  const KfUpdateResult r = kf_update(pred, z, iso(2, 10.0), m);
  for (int i = 0; i < 4; ++i) CHECK(r.posterior.mean[i] == doctest::Approx(pred.mean[i]));
}

TEST_CASE("kf_update with an uninformative measurement keeps the prior") {
  const StateSpaceModel m = cv_model(1.0);
  GaussianBelief pred = paper_init();
  const KfUpdateResult r = kf_update(pred, Vector{50.0, -30.0}, iso(2, 1e12), m);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(r.posterior.mean[i] - pred.mean[i]) <=
          1e-6 * (std::abs(pred.mean[i]) + 1.0));
  for (int i = 0; i < 4; ++i)
    CHECK(r.posterior.cov(i, i) == doctest::Approx(pred.cov(i, i)).epsilon(1e-6));
}

TEST_CASE("kf_update matches the grid-quadrature Bayesian posterior") {
  RandomStream rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const double p = 0.2 + 3.0 * rng.u01();
    const double r = 0.2 + 3.0 * rng.u01();
    const double h = 0.5 + rng.u01();
    const double mu = rng.normal();
    const double z = mu + 2.0 * rng.normal();
    const StateSpaceModel m = scalar_model(h);
    GaussianBelief pred;
    pred.mean = Vector{mu};
    pred.cov = Matrix(1, 1, p);
    const KfUpdateResult res = kf_update(pred, Vector{z}, Matrix(1, 1, r), m);
    const auto oracle = testutil::scalar_grid_posterior(mu, p, h, r, z);
    CHECK(std::abs(res.posterior.mean[0] - oracle.mean) < 1e-8);
    CHECK(std::abs(res.posterior.cov(0, 0) - oracle.var) < 1e-8);
  }
}

TEST_CASE("kf_update posterior stays PSD over random PD inputs") {
  RandomStream rng(9);
  const StateSpaceModel m = cv_model(1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    GaussianBelief pred;
    pred.mean = Vector{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    pred.cov = testutil::random_spd(4, rng, 0.1);
    const Matrix r_eff = testutil::random_spd(2, rng, 0.1);
    const Vector z{10.0 * rng.normal(), 10.0 * rng.normal()};
    const KfUpdateResult r = kf_update(pred, z, r_eff, m);
    double tr = 0.0;
    for (int i = 0; i < 4; ++i) tr += r.posterior.cov(i, i);
    CHECK(min_eigen_sym(r.posterior.cov) >= -1e-9 * std::max(tr, 1.0));
  }
}

TEST_CASE("kf_update signals a hopeless innovation covariance") {
  StateSpaceModel m = scalar_model();
  m.H = Matrix(1, 1, 0.0);
  GaussianBelief pred;
  pred.mean = Vector{0.0};
  pred.cov = Matrix(1, 1, 1.0);
  CHECK_THROWS_AS(kf_update(pred, Vector{1.0}, Matrix(1, 1, 0.0), m), SingularInnovation);
}

TEST_CASE("scale-product invariance: only R/E[1/lambda] matters") {
  const StateSpaceModel m = cv_model(1.0);
  GaussianBelief pred = paper_init();
  const Vector z{3.0, -2.0};
  const double e_inv = 0.37;
  const KfUpdateResult a = kf_update(pred, z, mat_scale(iso(2, 10.0), 1.0 / e_inv), m);
  for (const double psi : {0.1, 7.0, 1234.5}) {
    const KfUpdateResult b =
        kf_update(pred, z, mat_scale(iso(2, 10.0 * psi), 1.0 / (psi * e_inv)), m);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(a.posterior.mean[i] - b.posterior.mean[i]) < 1e-12 * 20.0);
      for (int j = 0; j < 4; ++j)
        CHECK(std::abs(a.posterior.cov(i, j) - b.posterior.cov(i, j)) < 1e-12 * 30.0);
    }
  }
}

TEST_CASE("kftncm equals plain KF under Gaussian noise and uses the total covariance under GM") {
  const StateSpaceModel m = cv_model(1.0);
  const NoiseSpec gaussian = NoiseSpec::gaussian(iso(2, 10.0));
  const auto set = make_set(m, gaussian, 5, 40, 101);
  for (const Trajectory& traj : set) {
    const auto a = kftncm_filter(m, gaussian, traj, paper_init());
    const auto b = kf_filter(m, iso(2, 10.0), traj, paper_init());
    for (std::size_t k = 0; k < a.size(); ++k)
      for (int i = 0; i < 4; ++i) CHECK(a[k].mean[i] == b[k].mean[i]);
  }
  const NoiseSpec gm = NoiseSpec::gaussian_mixture(iso(2, 10.0), 100.0, 0.1);
  const auto gm_set = make_set(m, gm, 3, 30, 102);
  for (const Trajectory& traj : gm_set) {
    const auto a = kftncm_filter(m, gm, traj, paper_init());
    const auto b = kf_filter(m, iso(2, 109.0), traj, paper_init());
    for (std::size_t k = 0; k < a.size(); ++k)
      for (int i = 0; i < 4; ++i) CHECK(a[k].mean[i] == doctest::Approx(b[k].mean[i]));
  }
  const NoiseSpec sgas = NoiseSpec::sg_alpha_s(iso(2, 10.0), 0.7);
  CHECK_THROWS_AS(kftncm_filter(m, sgas, gm_set[0], paper_init()), InfiniteVariance);
}

TEST_CASE("vb_rkf_step reduces to the KF in the Gaussian limit") {
  const StateSpaceModel m = cv_model(1.0);
  GaussianBelief pred = paper_init();
  const Vector z{12.0, -7.0};
  const FixedPointControl ctrl;
  const KfUpdateResult vb = vb_rkf_step(pred, z, iso(2, 10.0), 1e8, ctrl, m);
  const KfUpdateResult kf = kf_update(pred, z, iso(2, 10.0), m);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(vb.posterior.mean[i] - kf.posterior.mean[i]) <
          1e-6 * (std::abs(kf.posterior.mean[i]) + 1.0));
}

TEST_CASE("vb_rkf_step scalar fixed point, cross-checked two ways") {
  StateSpaceModel m = scalar_model();
  GaussianBelief pred;
  pred.mean = Vector{0.0};
  pred.cov = Matrix(1, 1, 1e-6);
  const double v = 3.0;
  const double z = 5.0;
  FixedPointControl ctrl;
  ctrl.max_iters = 200;
  ctrl.tol = 1e-14;
  const KfUpdateResult res = vb_rkf_step(pred, Vector{z}, Matrix(1, 1, 1.0), v, ctrl, m);

  // Independent direct iteration of the same scalar map.
  double c = 1.0;
  double mean = 0.0;
  for (int it = 0; it < 400; ++it) {
    const double r_eff = 1.0 / c;
    const double s = 1e-6 + r_eff;
    const double gain = 1e-6 / s;
    mean = gain * z;
    const double cov = (1.0 - gain) * 1e-6;
    const double d = (z - mean) * (z - mean) + cov;
    c = (v + 1.0) / (v + d);
  }
  CHECK(res.posterior.mean[0] == doctest::Approx(mean).epsilon(1e-12));

  // Quadrature with a nearly-zero prior projection agrees with the conjugate
  // value the fixed point approaches.
  const double oracle =
      oracle_e_inv_lambda(Vector{z}, Matrix(1, 1, 1e-6), Matrix(1, 1, 1.0),
                          MixingSpec::inverse_gamma(0.5 * v, 0.5 * v));
  CHECK(c == doctest::Approx(oracle).epsilon(1e-5));
}

TEST_CASE("vb_rkf_step up-weights an inlier (zero residual)") {
  const StateSpaceModel m = cv_model(1.0);
  GaussianBelief pred = paper_init();
  pred.cov = Matrix(4, 4, 0.0);
  const Vector z = affine_map(m.H, pred.mean, nullptr);
  const double v = 3.0;
  FixedPointControl ctrl;
  const KfUpdateResult r = vb_rkf_step(pred, z, iso(2, 10.0), v, ctrl, m);
  // D = 0 so E[1/lambda] = (v+m)/v and the effective covariance shrinks.
  const double expected = 10.0 * v / (v + 2.0);
  CHECK(r.innovation_cov(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.innovation_cov(0, 0) < 10.0);
}

TEST_CASE("vb fixed point is monotone in the residual norm") {
  const StateSpaceModel m = cv_model(1.0);
  const GaussianBelief pred = predict(paper_init(), m);
  const Matrix s0 = congruence_const(m.H, pred.cov, nullptr);
  FixedPointControl ctrl;
  ctrl.max_iters = 200;
  ctrl.tol = 1e-12;
  double last_e_inv = std::numeric_limits<double>::infinity();
  for (const double offset : {0.0, 1.0, 3.0, 10.0, 30.0, 100.0}) {
    const Vector z{pred.mean[0] + offset, pred.mean[1]};
    const KfUpdateResult r = vb_rkf_step(pred, z, iso(2, 10.0), 3.0, ctrl, m);
    // Recover E[1/lambda] from S = HPH^T + R / E[1/lambda].
    const double e_inv = 10.0 / (r.innovation_cov(0, 0) - s0(0, 0));
    CHECK(e_inv <= last_e_inv + 1e-12);
    last_e_inv = e_inv;
  }
}

TEST_CASE("vb_rkf_filter tracks the plain KF on Gaussian data") {
  const StateSpaceModel m = cv_model(1.0);
  const NoiseSpec noise = NoiseSpec::gaussian(iso(2, 10.0));
  const auto set = make_set(m, noise, 200, 40, 103);
  const FixedPointControl ctrl;
  const double vb = set_armse(
      [&](const Trajectory& t) {
        return vb_rkf_filter(m, iso(2, 10.0), 1e8, ctrl, t, paper_init());
      },
      set);
  const double kf =
      set_armse([&](const Trajectory& t) { return kf_filter(m, iso(2, 10.0), t, paper_init()); },
                set);
  CHECK(vb == doctest::Approx(kf).epsilon(0.02));
}

TEST_CASE("vb_rkf_filter beats the nominal KF under extreme GM outliers") {
  const StateSpaceModel m = cv_model(1.0);
  const NoiseSpec noise = NoiseSpec::gaussian_mixture(iso(2, 10.0), 1e4, 0.1);
  const auto set = make_set(m, noise, 200, 40, 104);
  const FixedPointControl ctrl;
  const double vb = set_armse(
      [&](const Trajectory& t) {
        return vb_rkf_filter(m, iso(2, 10.0), 3.0, ctrl, t, paper_init());
      },
      set);
  const double kf =
      set_armse([&](const Trajectory& t) { return kf_filter(m, iso(2, 10.0), t, paper_init()); },
                set);
  CHECK(vb < kf);
}

TEST_CASE("vb_rkf_filter reruns bit-identically") {
  const StateSpaceModel m = cv_model(1.0);
  const NoiseSpec noise = NoiseSpec::student_t(iso(2, 10.0), 3.0);
  const auto set = make_set(m, noise, 2, 50, 105);
  const FixedPointControl ctrl;
  const auto a = vb_rkf_filter(m, iso(2, 10.0), 3.0, ctrl, set[0], paper_init());
  const auto b = vb_rkf_filter(m, iso(2, 10.0), 3.0, ctrl, set[0], paper_init());
  for (std::size_t k = 0; k < a.size(); ++k)
    for (int i = 0; i < 4; ++i) CHECK(a[k].mean[i] == b[k].mean[i]);
}

TEST_CASE("oracle_e_inv_lambda: point mass, discrete sum, conjugate closed form") {
  CHECK(oracle_e_inv_lambda(Vector{0.0, 0.0}, Matrix(2, 2, 0.0), iso(2, 10.0),
                            MixingSpec::point_mass(1.0)) == 1.0);

  // Discrete GM mixing at zero innovation: compare the exact finite sum with
  // importance sampling from the prior mixture.
  const Matrix r = iso(2, 10.0);
  const Matrix s0(2, 2, 0.0);
  const Vector dz{0.0, 0.0};
  const MixingSpec gm = MixingSpec::discrete({1.0, 100.0}, {0.9, 0.1});
  const double exact = oracle_e_inv_lambda(dz, s0, r, gm);
  RandomStream rng(7);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 10000000; ++i) {
    const double lambda = rng.u01() < 0.1 ? 100.0 : 1.0;
    // N(0; 0, lambda R) with R = 10 I has density proportional to 1/lambda.
    const double w = 1.0 / lambda;
    num += w / lambda;
    den += w;
  }
  CHECK(exact == doctest::Approx(num / den).epsilon(0.005));

  // Inverse-gamma mixing with S0 = 0 is conjugate.
  const double v = 3.0;
  const MixingSpec st = MixingSpec::inverse_gamma(0.5 * v, 0.5 * v);
  for (const Vector& probe : {Vector{0.0, 0.0}, Vector{3.0, 0.0}, Vector{10.0, 10.0}}) {
    const double got = oracle_e_inv_lambda(probe, s0, r, st);
    const double q = (probe[0] * probe[0] + probe[1] * probe[1]) / 10.0;
    const double want = (v + 2.0) / (v + q);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("oracle_filter equals the plain KF under Gaussian noise") {
  const StateSpaceModel m = cv_model(1.0);
  const NoiseSpec noise = NoiseSpec::gaussian(iso(2, 10.0));
  const auto set = make_set(m, noise, 3, 40, 106);
  for (const Trajectory& traj : set) {
    const auto a = oracle_filter(m, noise, traj, paper_init(), iso(2, 10.0));
    const auto b = kf_filter(m, iso(2, 10.0), traj, paper_init());
    for (std::size_t k = 0; k < a.size(); ++k)
      for (int i = 0; i < 4; ++i) CHECK(a[k].mean[i] == doctest::Approx(b[k].mean[i]));
  }
}

TEST_CASE("oracle_filter dominates the nominal KF under GM outliers") {
  const StateSpaceModel m = cv_model(1.0);
  const NoiseSpec noise = NoiseSpec::gaussian_mixture(iso(2, 10.0), 1000.0, 0.1);
  const auto set = make_set(m, noise, 100, 40, 107);
  const double orc = set_armse(
      [&](const Trajectory& t) { return oracle_filter(m, noise, t, paper_init(), iso(2, 10.0)); },
      set);
  const double kf =
      set_armse([&](const Trajectory& t) { return kf_filter(m, iso(2, 10.0), t, paper_init()); },
                set);
  CHECK(orc < kf);
}

TEST_CASE("oracle_filter survives a very heavy Student-t stress run") {
  const StateSpaceModel m = cv_model(1.0);
  const NoiseSpec noise = NoiseSpec::student_t(iso(2, 10.0), 0.5);
  const auto set = make_set(m, noise, 20, 100, 108);
  for (const Trajectory& traj : set) {
    const auto beliefs = oracle_filter(m, noise, traj, paper_init(), iso(2, 10.0));
    for (const GaussianBelief& b : beliefs) CHECK(all_finite(b.mean));
  }
  const NoiseSpec sgas = NoiseSpec::sg_alpha_s(iso(2, 10.0), 1.5);
  CHECK_THROWS_AS(oracle_filter(m, sgas, set[0], paper_init(), iso(2, 10.0)), DomainError);
}

TEST_CASE("fixed point control validation") {
  FixedPointControl bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = FixedPointControl{};
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = FixedPointControl{};
  bad.window = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}
