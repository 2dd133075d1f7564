#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "parseval/arith_core.hpp"
#include "parseval/closed_forms.hpp"

namespace {

using namespace parseval;
using std::numbers::pi;

TEST(Zeta, BaselValues) {
  EXPECT_NEAR(zeta_real(2.0), pi * pi / 6.0, 1e-9 * pi * pi / 6.0);
  EXPECT_NEAR(zeta_real(4.0), std::pow(pi, 4) / 90.0, 1e-12);
  EXPECT_NEAR(zeta_real(2.0) * zeta_real(2.0) / zeta_real(4.0), 2.5, 1e-9);
}

TEST(Zeta, MatchesDirectOracle) {
  for (double z : {1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 5.0}) {
    const double expected = oracle::zeta(z);
    EXPECT_NEAR(zeta_real(z), expected, 1e-12 * expected) << z;
    EXPECT_LE(zeta_relative_error(z), 1e-12) << z;
  }
  EXPECT_NEAR(zeta_real(1.01), oracle::zeta(1.01, 2'000'000), 1e-9 * zeta_real(1.01));
}

TEST(Zeta, Domain) {
  EXPECT_THROW(zeta_real(1.0), DomainError);
  EXPECT_THROW(zeta_real(0.5), DomainError);
}

TEST(SigmaNeg, Values) {
  EXPECT_EQ(sigma_neg(1, 2.0), 1.0);
  EXPECT_NEAR(sigma_neg(6, 3.0), 1.0 + 1.0 / 8 + 1.0 / 27 + 1.0 / 216, 1e-15);
  EXPECT_NEAR(sigma_neg(4, 1.0), 1.75, 1e-15);
  EXPECT_THROW(sigma_neg(0, 1.0), DomainError);
}

TEST(ClosedSigma, Values) {
  EXPECT_NEAR(cor1_constant(1, 1, 1).value, 2.5, 1e-9);
  EXPECT_NEAR(cor1_constant(1, 1, 2).value, 2.8125, 1e-9);
  EXPECT_EQ(cor1_constant(1, 1, 1).route, Route::closed_cor1);
  EXPECT_THROW(cor1_constant(0.5, 1, 1), DomainError);
  EXPECT_THROW(cor1_constant(1, 1, 0), DomainError);
}

TEST(EulerProduct, TendsToOneForLargeExponents) {
  EXPECT_NEAR(euler_delta(40, 40, 1, 1'000).value, 1.0, 1e-10);
}

TEST(EulerProduct, DirectEvaluation) {
  const auto pred = euler_delta(1, 1, 1, 100'000);
  double product = 1.0;
  for (auto p : primes_up_to(100'000)) {
    const double q = static_cast<double>(p);
    product *= std::pow(1.0 - 1.0 / (q * q), 2) - 1.0 / (q * q * q * q);
  }
  EXPECT_NEAR(pred.value, product, 1e-12);
  EXPECT_GT(pred.value, 0.0);
  EXPECT_LT(pred.value, 1.0);
  EXPECT_GE(pred.tail_estimate, 0.0);
  EXPECT_LE(pred.tail_estimate, 1e-5);
  EXPECT_THROW(euler_delta(0.5, 1, 1), DomainError);
  EXPECT_THROW(euler_delta(1, 1, 1, 50), DomainError);
}

TEST(EulerProduct, SecondFactorUsesT) {
  // An exponent mix-up between s and t would make these differ.
  EXPECT_NEAR(euler_delta(0.75, 2, 6).value, euler_delta(2, 0.75, 6).value, 1e-14);
  const auto phi_s = CoefficientFamily::phi(0.75);
  const auto phi_t = CoefficientFamily::phi(2.0);
  const auto series = main_term_series(phi_s, phi_t, 6);
  const auto closed = euler_delta(0.75, 2, 6);
  EXPECT_LE(std::abs(series.value - closed.value),
            series.tail_estimate + closed.tail_estimate);
}

TEST(Series, TrivialFamily) {
  const auto delta = CoefficientFamily::custom(
      "unit", [](std::uint64_t r) { return r == 1 ? 1.0 : 0.0; }, 1.0, 1.0);
  for (std::uint64_t h : {0u, 1u, 7u}) {
    EXPECT_NEAR(main_term_series(delta, delta, h, 100).value, 1.0, 1e-15);
  }
}

TEST(Series, DiagonalSigma) {
  const auto f = CoefficientFamily::sigma(1.0);
  const auto pred = main_term_series(f, f, 0, 100'000);
  EXPECT_EQ(pred.route, Route::series_thm1);
  const double target = 2.5 * zeta_real(3.0);
  EXPECT_LE(std::abs(pred.value - target), pred.tail_estimate);
  EXPECT_NEAR(pred.value, target, 1e-8);
}

TEST(Series, ShiftedSigmaMatchesClosedForm) {
  const auto f = CoefficientFamily::sigma(1.0);
  const auto pred = main_term_series(f, f, 1, 100'000);
  EXPECT_EQ(pred.route, Route::series_thm2);
  EXPECT_NEAR(pred.value, 2.5, 1e-8);
}

TEST(Series, Domain) {
  const auto low = CoefficientFamily::sigma(0.5);
  const auto ok = CoefficientFamily::sigma(1.0);
  EXPECT_THROW(main_term_series(low, ok, 1), DomainError);
  EXPECT_THROW(main_term_series(ok, ok, 1, 5), DomainError);
}

TEST(RouteAgreement, AllFamiliesAndShifts) {
  for (double s : {0.75, 1.0, 2.0}) {
    for (double t : {0.75, 1.0, 2.0}) {
      for (std::uint64_t h : {1u, 2u, 3u, 4u, 5u, 6u}) {
        const auto ss = main_term_series(CoefficientFamily::sigma(s),
                                         CoefficientFamily::sigma(t), h);
        const auto cs = cor1_constant(s, t, h);
        EXPECT_LE(std::abs(ss.value - cs.value), ss.tail_estimate + cs.tail_estimate)
            << s << " " << t << " " << h;
        const auto sp = main_term_series(CoefficientFamily::phi(s),
                                         CoefficientFamily::phi(t), h);
        const auto ep = euler_delta(s, t, h);
        EXPECT_LE(std::abs(sp.value - ep.value), sp.tail_estimate + ep.tail_estimate)
            << s << " " << t << " " << h;
      }
    }
  }
}

TEST(Truncation, MonotoneWithinTail) {
  const auto f = CoefficientFamily::sigma(0.75);
  const auto g = CoefficientFamily::phi(1.0);
  for (std::uint64_t h : {0u, 1u, 6u}) {
    auto previous = main_term_series(f, g, h, 100);
    for (std::uint64_t R : {1'000u, 10'000u, 100'000u}) {
      const auto next = main_term_series(f, g, h, R);
      EXPECT_LE(std::abs(next.value - previous.value), previous.tail_estimate);
      previous = next;
    }
  }
  auto previous = euler_delta(1, 0.75, 6, 100);
  for (std::uint64_t P : {1'000u, 100'000u}) {
    const auto next = euler_delta(1, 0.75, 6, P);
    EXPECT_LE(std::abs(next.value - previous.value), previous.tail_estimate);
    previous = next;
  }
}

TEST(Prediction, PicksRoutes) {
  const auto sigma = CoefficientFamily::sigma(1.0);
  const auto phi = CoefficientFamily::phi(1.0);
  EXPECT_EQ(predict_main_term(sigma, sigma, 1).route, Route::closed_cor1);
  EXPECT_EQ(predict_main_term(sigma, sigma, 0).route, Route::series_thm1);
  EXPECT_EQ(predict_main_term(phi, phi, 2).route, Route::euler_cor2);
  EXPECT_EQ(predict_main_term(sigma, phi, 2).route, Route::series_thm2);
  const auto j = predict_main_term(phi, phi, 2).to_json();
  for (const char* key : {"h", "value", "route", "truncation", "tail_estimate", "params"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.at("route"), "euler_cor2");
}

}  // namespace
