/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "straq/kernels.hpp"
#include "straq/rng.hpp"
#include "support/oracles.hpp"

using straq::GPHyperparams;
using straq::Interval;
using straq::Region;

TEST_CASE("g_fn values and symmetry") {
  CHECK(straq::g_fn(0.0) == Catch::Approx(1.0).margin(1e-15));
  // sqrt(pi)*erf(1) + exp(-1), frozen from a long-double evaluation.
  CHECK(straq::g_fn(1.0) == Catch::Approx(1.8615277).margin(1e-6));
  CHECK(straq::g_fn(-1.0) == Catch::Approx(straq::g_fn(1.0)).margin(1e-15));
  for (double x : {0.0, 0.3, 1.7, 4.0, 25.0}) {
    CHECK(straq::g_fn(x) >= 1.0);
    CHECK(straq::g_fn(-x) == Catch::Approx(straq::g_fn(x)).margin(1e-12));
  }
}

TEST_CASE("se_kernel") {
  const GPHyperparams iso4 = GPHyperparams::isotropic(4.0, 1.0, 2);
  const std::vector<double> x{0.7, -0.2};
  CHECK(straq::se_kernel(x, x, iso4) == Catch::Approx(4.0));

  const GPHyperparams iso1 = GPHyperparams::isotropic(1.0, 1.0, 1);
  const std::vector<double> a{0.0}, b{1.0};
  CHECK(straq::se_kernel(a, b, iso1) == Catch::Approx(std::exp(-1.0)));

  const GPHyperparams aniso(1.0, {1.0, 2.0});
  const std::vector<double> p{0.0, 0.0}, q{1.0, 2.0};
  CHECK(straq::se_kernel(p, q, aniso) == Catch::Approx(std::exp(-2.0)));

  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(straq::se_kernel(p, bad, aniso), std::invalid_argument);
}

TEST_CASE("avg_kernel_1d closed form vs quadrature") {
  // Unit ranges, alpha = l = 1: g(1) - g(0).
  const double v = straq::avg_kernel_1d(0, 1, 0, 1, 1.0, 1.0);
  CHECK(v == Catch::Approx(0.8615277).margin(1e-6));
  CHECK(v == Catch::Approx(oracles::avg_kernel_1d_quadrature(0, 1, 0, 1, 1.0, 1.0))
                 .epsilon(1e-8));

  // Point limit: a shrinking identical range approaches alpha.
  CHECK(straq::avg_kernel_1d(2.0, 2.0 + 1e-3, 2.0, 2.0 + 1e-3, 1.0, 1.0) ==
        Catch::Approx(1.0).margin(1e-3));

  // Symmetry under swapping the ranges.
  CHECK(straq::avg_kernel_1d(0.2, 1.7, -0.4, 0.9, 2.5, 0.8) ==
        Catch::Approx(straq::avg_kernel_1d(-0.4, 0.9, 0.2, 1.7, 2.5, 0.8)).epsilon(1e-14));

  CHECK_THROWS_AS(straq::avg_kernel_1d(1.0, 1.0, 0.0, 1.0, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("avg_kernel_1d matches adaptive quadrature on random pairs") {
  straq::Rng rng = straq::make_rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const double l = std::exp(straq::uniform_real(rng, std::log(2.0), std::log(50.0)));
    const double alpha = std::exp(straq::uniform_real(rng, std::log(0.1), std::log(10.0)));
    const double c1 = straq::uniform_real(rng, 0.0, 100.0);
    const double c2 = c1 + straq::uniform_real(rng, -3.0 * l, 3.0 * l);
    const double w1 = straq::uniform_real(rng, 0.05 * l, 2.0 * l);
    const double w2 = straq::uniform_real(rng, 0.05 * l, 2.0 * l);
    const double got =
        straq::avg_kernel_1d(c1 - w1 / 2, c1 + w1 / 2, c2 - w2 / 2, c2 + w2 / 2, alpha, l);
    const double want = oracles::avg_kernel_1d_quadrature(c1 - w1 / 2, c1 + w1 / 2,
                                                          c2 - w2 / 2, c2 + w2 / 2, alpha, l);
    CHECK(got == Catch::Approx(want).epsilon(1e-5));
  }
}

TEST_CASE("avg_kernel product form") {
  // Identical shrunken 3-D regions approach the amplitude.
  const GPHyperparams hp5 = GPHyperparams::isotropic(5.0, 1.0, 3);
  std::vector<Interval> tiny(3, Interval{0.4, 0.4 + 1e-3});
  const Region r_tiny(tiny);
  CHECK(straq::avg_kernel(r_tiny, r_tiny, hp5) == Catch::Approx(5.0).margin(0.01));

  // Two coinciding unit squares: the 1-D value squared.
  const GPHyperparams hp1 = GPHyperparams::isotropic(1.0, 1.0, 2);
  const Region sq(std::vector<Interval>{{0, 1}, {0, 1}});
  CHECK(straq::avg_kernel(sq, sq, hp1) == Catch::Approx(0.7422300).margin(1e-5));

  // Far-separated regions decay to numerical zero.
  const GPHyperparams hp1d = GPHyperparams::isotropic(1.0, 1.0, 1);
  const Region left(std::vector<Interval>{{0, 1}});
  const Region right(std::vector<Interval>{{21, 22}});
  CHECK(std::abs(straq::avg_kernel(left, right, hp1d)) < 1e-10);

  const Region degenerate(std::vector<Interval>{{3, 3}});
  CHECK_THROWS_AS(straq::avg_kernel(degenerate, left, hp1d), std::invalid_argument);
}

TEST_CASE("avg_kernel matches Monte-Carlo quadrature in 3-D") {
  straq::Rng rng = straq::make_rng(9);
  const GPHyperparams hp(2.0, {10.0, 25.0, 40.0});
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Interval> s1(3), s2(3);
    for (std::size_t d = 0; d < 3; ++d) {
      const double a = straq::uniform_real(rng, 0.0, 60.0);
      const double b = straq::uniform_real(rng, 0.0, 60.0);
      s1[d] = Interval{a, a + straq::uniform_real(rng, 5.0, 40.0)};
      s2[d] = Interval{b, b + straq::uniform_real(rng, 5.0, 40.0)};
    }
    const Region r1(s1), r2(s2);
    const double got = straq::avg_kernel(r1, r2, hp);
    const auto mc = oracles::avg_kernel_mc(r1, r2, hp, 200000, 1234 + trial);
    CHECK(std::abs(got - mc.mean) <= 3.5 * mc.standard_error + 1e-12);
  }
}
