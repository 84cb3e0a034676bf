/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "straq/gp.hpp"
#include "straq/rng.hpp"
#include "support/oracles.hpp"

using straq::GPHyperparams;
using straq::GPState;
using straq::Interval;
using straq::Region;
using straq::RegionObservation;

namespace {

Region seg(double lo, double hi) { return Region(std::vector<Interval>{{lo, hi}}); }

std::vector<RegionObservation> random_1d_observations(int n, straq::Rng& rng,
                                                      double domain_hi = 100.0) {
  std::vector<RegionObservation> obs;
  for (int i = 0; i < n; ++i) {
    const double lo = straq::uniform_real(rng, 0.0, domain_hi - 10.0);
    const double w = straq::uniform_real(rng, 2.0, 30.0);
    obs.push_back(RegionObservation{seg(lo, std::min(lo + w, domain_hi)),
                                    straq::uniform_real(rng, -2.0, 2.0),
                                    straq::uniform_real(rng, 0.0, 0.5)});
  }
  return obs;
}

}  // namespace

TEST_CASE("gram_matrix basics") {
  const GPHyperparams hp = GPHyperparams::isotropic(2.0, 15.0, 1);
  const Region r = seg(10, 30);

  const auto k1 = straq::gram_matrix({RegionObservation{r, 0.0, 0.0}}, hp);
  REQUIRE(k1.rows() == 1);
  CHECK(k1(0, 0) == Catch::Approx(straq::avg_kernel(r, r, hp)));

  const auto k2 = straq::gram_matrix(
      {RegionObservation{r, 0.0, 0.0}, RegionObservation{r, 1.0, 0.0}}, hp);
  CHECK(k2(0, 0) == Catch::Approx(k2(0, 1)));
  CHECK(k2(1, 0) == Catch::Approx(k2(1, 1)));
}

TEST_CASE("gram matrix is PSD on random region sets") {
  straq::Rng rng = straq::make_rng(11);
  const GPHyperparams hp = GPHyperparams::isotropic(3.0, 20.0, 1);
  const auto obs = random_1d_observations(10, rng);
  const auto k = straq::gram_matrix(obs, hp);
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);
}

TEST_CASE("posterior: prior case and noiseless interpolation") {
  const GPHyperparams hp = GPHyperparams::isotropic(1.0, 10.0, 1);
  const GPState empty(hp);
  const Region q = seg(20, 25);
  const auto prior = empty.posterior(q);
  CHECK(prior.mean == 0.0);
  CHECK(prior.variance == Catch::Approx(straq::avg_kernel(q, q, hp)));

  const Region r = seg(40, 41);  // narrow, so the prior variance is close to amplitude
  const GPState one = empty.condition(RegionObservation{r, 0.7, 0.0});
  const auto post = one.posterior(r);
  CHECK(post.mean == Catch::Approx(0.7).margin(1e-8));
  CHECK(post.variance == Catch::Approx(0.0).margin(1e-8));
}

TEST_CASE("posterior matches the dense-grid oracle") {
  straq::Rng rng = straq::make_rng(23);
  const double alpha = 2.0, ell = 18.0;
  const GPHyperparams hp = GPHyperparams::isotropic(alpha, ell, 1);
  const oracles::DenseGridGP grid(0.0, 100.0, 2000, alpha, ell);

  for (int scenario = 0; scenario < 5; ++scenario) {
    const auto obs = random_1d_observations(5, rng);
    GPState state(hp, obs);
    std::vector<Eigen::VectorXd> w;
    std::vector<double> y, nv;
    for (const auto& o : obs) {
      w.push_back(grid.region_weights(o.region.lo(0), o.region.hi(0)));
      y.push_back(o.value);
      nv.push_back(o.noise_sd * o.noise_sd);
    }
    for (int probe = 0; probe < 4; ++probe) {
      const double lo = straq::uniform_real(rng, 0.0, 80.0);
      const double hi = lo + straq::uniform_real(rng, 3.0, 20.0);
      const auto got = state.posterior(seg(lo, hi));
      const auto want = grid.posterior(w, y, nv, grid.region_weights(lo, hi));
      CHECK(got.mean == Catch::Approx(want.mean).margin(1e-3));
      CHECK(got.variance == Catch::Approx(want.variance).margin(1e-3));
    }
  }
}

TEST_CASE("conditioning is exchangeable and matches batch") {
  straq::Rng rng = straq::make_rng(5);
  const GPHyperparams hp = GPHyperparams::isotropic(2.0, 12.0, 1);
  const auto obs = random_1d_observations(10, rng);

  GPState inc(hp);
  for (const auto& o : obs) inc = inc.condition(o);
  const GPState batch(hp, obs);

  auto reversed = obs;
  std::reverse(reversed.begin(), reversed.end());
  const GPState rev(hp, reversed);

  for (int probe = 0; probe < 6; ++probe) {
    const double lo = straq::uniform_real(rng, 0.0, 90.0);
    const Region q = seg(lo, lo + 8.0);
    const auto a = inc.posterior(q);
    const auto b = batch.posterior(q);
    const auto c = rev.posterior(q);
    CHECK(a.mean == Catch::Approx(b.mean).margin(1e-8));
    CHECK(a.variance == Catch::Approx(b.variance).margin(1e-8));
    CHECK(a.mean == Catch::Approx(c.mean).margin(1e-8));
  }
}

TEST_CASE("conditioning never increases variance") {
  straq::Rng rng = straq::make_rng(31);
  const GPHyperparams hp = GPHyperparams::isotropic(4.0, 15.0, 1);
  GPState state(hp);
  std::vector<Region> probes;
  for (int i = 0; i < 8; ++i) {
    const double lo = straq::uniform_real(rng, 0.0, 85.0);
    probes.push_back(seg(lo, lo + straq::uniform_real(rng, 2.0, 15.0)));
  }
  std::vector<double> last_var;
  for (const auto& p : probes) last_var.push_back(state.posterior(p).variance);

  for (const auto& o : random_1d_observations(6, rng)) {
    state = state.condition(o);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double v = state.posterior(probes[i]).variance;
      CHECK(v <= last_var[i] + 1e-9);
      CHECK(v <= straq::avg_kernel(probes[i], probes[i], hp) + 1e-9);
      last_var[i] = v;
    }
  }
}

TEST_CASE("point-limit consistency of shrinking query regions") {
  straq::Rng rng = straq::make_rng(77);
  const GPHyperparams hp = GPHyperparams::isotropic(2.0, 10.0, 1);
  const GPState state(hp, random_1d_observations(5, rng));
  const double center = 47.3;
  auto at_eps = [&](double eps) { return state.posterior(seg(center, center + eps)); };
  const auto coarse = at_eps(1e-3);
  const auto fine = at_eps(1e-4);
  CHECK(std::abs(coarse.mean - fine.mean) < 1e-3);
  CHECK(std::abs(coarse.variance - fine.variance) < 1e-3);
}

TEST_CASE("log marginal likelihood closed forms") {
  // One observation with total variance (prior + noise) = 1.
  const double alpha = 0.5;
  const GPHyperparams hp(alpha, {1.0}, 0.0);
  const Region tiny = seg(5.0, 5.0 + 1e-4);  // prior variance ~= alpha
  const double prior_var = straq::avg_kernel(tiny, tiny, hp);
  const double noise_sd = std::sqrt(1.0 - prior_var);

  const double lml0 =
      straq::log_marginal_likelihood({RegionObservation{tiny, 0.0, noise_sd}}, hp);
  CHECK(lml0 == Catch::Approx(-0.9189385).margin(1e-6));

  const double lml1 =
      straq::log_marginal_likelihood({RegionObservation{tiny, 1.0, noise_sd}}, hp);
  CHECK(lml1 == Catch::Approx(-1.4189385).margin(1e-6));
}

TEST_CASE("log marginal likelihood matches a dense MVN density") {
  straq::Rng rng = straq::make_rng(13);
  const GPHyperparams hp = GPHyperparams::isotropic(1.5, 22.0, 1);
  const auto obs = random_1d_observations(5, rng);

  Eigen::MatrixXd cov = straq::gram_matrix(obs, hp);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    cov(i, i) += obs[static_cast<std::size_t>(i)].noise_sd *
                     obs[static_cast<std::size_t>(i)].noise_sd +
                 1e-8 * hp.amplitude_sq;
    y(i) = obs[static_cast<std::size_t>(i)].value;
  }
  CHECK(straq::log_marginal_likelihood(obs, hp) ==
        Catch::Approx(oracles::mvn_log_density(y, cov)).margin(1e-8));
  CHECK_THROWS(straq::log_marginal_likelihood({}, hp));
}
