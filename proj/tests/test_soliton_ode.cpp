#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "yamabe/soliton_ode.hpp"

using namespace yamabe;

TEST_CASE("params validation") {
  CHECK_THROWS_AS(SolitonParams(2, -1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SolitonParams(3, 1.0, 0.0), std::invalid_argument);
  CHECK_NOTHROW(SolitonParams(3, -1.0, 5.0));
  // permissive admits any sign of lambda but still checks the dimension
  CHECK_NOTHROW(SolitonParams::permissive(4, 0.5, -1.0));
  CHECK_THROWS_AS(SolitonParams::permissive(2, 0.5, -1.0), std::invalid_argument);
}

TEST_CASE("rho_second closed form") {
  // constant-warp state: rho = sqrt(rbar/lambda) = 1 is an equilibrium
  CHECK(rho_second(SolitonParams(3, -1.0, -1.0), 1.0, 0.0) == 0.0);
  // direct substitution
  CHECK(rho_second(SolitonParams(3, -1.0, 0.0), 1.0, 0.0) == Catch::Approx(0.25).epsilon(1e-15));
  // hand-evaluated with exact rationals: (-3 - 6/4 + 6) / 12 = 1/8
  CHECK(rho_second(SolitonParams(4, -2.0, -3.0), 2.0, 0.5) ==
        Catch::Approx(0.125).epsilon(1e-15));
  CHECK_THROWS_AS(rho_second(SolitonParams(3, -1.0, 0.0), 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(rho_second(SolitonParams(3, -1.0, 0.0), -1.0, 1.0), std::domain_error);
}

TEST_CASE("rho_third closed form and reduction identity") {
  const SolitonParams p(3, -1.0, 0.0);
  CHECK(rho_third(p, 1.0, 0.5, 0.0) == Catch::Approx(0.125).epsilon(1e-15));
  CHECK(rho_third(p, 1.0, 0.0, 0.0) == 0.0);

  // rho_third(..., ddrho = 0) == -drho (drho + lambda) / (n-1) exactly
  std::mt19937 rng(7u);
  std::uniform_real_distribution<double> rho_d(0.1, 5.0), drho_d(-3.0, 3.0),
      lam_d(-3.0, -0.1);
  for (int n : {3, 4, 5, 7}) {
    for (int i = 0; i < 100; ++i) {
      const SolitonParams q(n, lam_d(rng), 0.0);
      const double rho = rho_d(rng), drho = drho_d(rng);
      const double expect = -drho * (drho + q.lambda) / (n - 1.0);
      CHECK(rho_third(q, rho, drho, 0.0) == Catch::Approx(expect).margin(1e-15));
    }
  }
}

TEST_CASE("eq1 residual") {
  SECTION("constant example state is an exact zero") {
    const auto r = eq1_residual(SolitonParams(3, -1.0, -1.0), 1.0, 0.0, 0.0);
    CHECK(r.eq1_res == 0.0);
    CHECK(r.scale > 0.0);
  }
  SECTION("signed value by direct substitution") {
    const auto r = eq1_residual(SolitonParams(3, -1.0, 0.0), 1.0, 0.0, 0.0);
    CHECK(r.eq1_res == Catch::Approx(-1.0).epsilon(1e-15));
    CHECK(std::fabs(r.eq1_res) == Catch::Approx(1.0).epsilon(1e-15));
  }
  SECTION("linear in ddrho: a delta moves the residual by 2(n-1) rho delta") {
    std::mt19937 rng(11u);
    std::uniform_real_distribution<double> d(0.2, 2.0);
    for (int i = 0; i < 50; ++i) {
      const SolitonParams p(4, -1.5, -0.7);
      const double rho = d(rng), drho = d(rng) - 1.0, dd = d(rng) - 1.0;
      const double delta = d(rng);
      const double r0 = eq1_residual(p, rho, drho, dd).eq1_res;
      const double r1 = eq1_residual(p, rho, drho, dd + delta).eq1_res;
      CHECK(r1 - r0 == Catch::Approx(2.0 * (p.n - 1) * rho * delta).epsilon(1e-12));
    }
  }
}

TEST_CASE("residual closure: derived jets satisfy both equations") {
  std::mt19937 rng(13u);
  std::uniform_real_distribution<double> rho_d(0.05, 10.0), drho_d(-5.0, 5.0),
      lam_d(-4.0, -0.05), rbar_d(-5.0, 5.0);
  std::uniform_int_distribution<int> n_d(3, 8);
  for (int i = 0; i < 500; ++i) {
    const SolitonParams p = SolitonParams::permissive(n_d(rng), lam_d(rng), rbar_d(rng));
    const double rho = rho_d(rng), drho = drho_d(rng);
    const double dd = rho_second(p, rho, drho);
    const auto r1 = eq1_residual(p, rho, drho, dd);
    CHECK(std::fabs(r1.eq1_res) <= 1e-14 * r1.scale);

    const double ddd = rho_third(p, rho, drho, dd);
    const auto r2 = eq2_residual(p, rho, drho, dd, ddd);
    CHECK(std::fabs(r2.eq2_res) <= 1e-14 * r2.scale);
  }
}

TEST_CASE("scale transform") {
  const SolitonParams p(3, -1.0, -1.0);
  const SolitonState s{0.5, 1.0, 0.0};

  SECTION("b = 1 is the identity") {
    const auto [q, t] = scale_transform(p, s, 1.0);
    CHECK(q.lambda == p.lambda);
    CHECK(q.rbar == p.rbar);
    CHECK(t.r == s.r);
    CHECK(t.rho == s.rho);
    CHECK(t.drho == s.drho);
  }
  SECTION("constant example maps to the constant example") {
    const auto [q, t] = scale_transform(p, s, 2.0);
    CHECK(q.lambda == -4.0);
    CHECK(q.rbar == -16.0);
    CHECK(t.rho == 2.0);
    CHECK(t.drho == 0.0);
    CHECK(t.rho == Catch::Approx(std::sqrt(q.rbar / q.lambda)));
  }
  SECTION("residual scales by b^4") {
    std::mt19937 rng(17u);
    std::uniform_real_distribution<double> d(0.2, 2.0);
    for (double b : {0.5, 2.0, 10.0}) {
      for (int i = 0; i < 50; ++i) {
        const SolitonParams pp = SolitonParams::permissive(4, -d(rng), d(rng) - 1.0);
        const SolitonState ss{0.0, d(rng), d(rng) - 1.0};
        const double dd = d(rng) - 1.0; // deliberately off-shell
        const double src = eq1_residual(pp, ss.rho, ss.drho, dd).eq1_res;
        const auto [qq, tt] = scale_transform(pp, ss, b);
        const double img = eq1_residual(qq, tt.rho, tt.drho, b * b * b * dd).eq1_res;
        CHECK(img == Catch::Approx(b * b * b * b * src).epsilon(1e-12));
      }
    }
  }
  SECTION("b <= 0 rejected") {
    CHECK_THROWS_AS(scale_transform(p, s, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(scale_transform(p, s, -2.0), std::invalid_argument);
  }
}
