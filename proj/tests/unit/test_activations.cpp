#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lmlab/activations.hpp"
#include "lmlab/error.hpp"
#include "lmlab/rng.hpp"
#include "oracles.hpp"

using namespace lmlab;

TEST_SUITE("activations") {
  TEST_CASE("logit") {
    CHECK(logit(0.5) == 0.0);
    CHECK(logit(0.9) == doctest::Approx(std::log(9.0)).epsilon(1e-15));
    CHECK(std::abs(logit(sigmoid(3.7)) - 3.7) <= 1e-12);
    CHECK_THROWS_AS(logit(0.0), DomainError);
    CHECK_THROWS_AS(logit(1.0), DomainError);
    CHECK_THROWS_AS(logit(-0.1), DomainError);
  }

  TEST_CASE("sigmoid") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(std::abs(sigmoid(2.0) - 0.8807970779778823) <= 1e-16);
    for (double z : {0.3, 1.7, 5.0, 30.0}) CHECK(sigmoid(z) + sigmoid(-z) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
  }

  TEST_CASE("sigmoid derivative against central differences") {
    CHECK(sigmoid_prime(0.0) == 0.25);
    CHECK(sigmoid_prime(40.0) < 1e-15);
    const double h = 1e-5;
    for (double z = -6.0; z <= 6.0; z += 0.25) {
      const double fd = (sigmoid(z + h) - sigmoid(z - h)) / (2 * h);
      CHECK(std::abs(sigmoid_prime(z) - fd) <= 1e-8);
    }
  }

  TEST_CASE("softmax examples") {
    const auto p = softmax(RealVector{0.0, 0.0});
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
    const auto q = softmax(RealVector{0.0, std::log(3.0)});
    CHECK(std::abs(q[0] - 0.25) <= 1e-15);
    CHECK(std::abs(q[1] - 0.75) <= 1e-15);
    const auto a = softmax(RealVector{1.0, 2.0, 3.0});
    const auto b = softmax(RealVector{101.0, 102.0, 103.0});
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
    CHECK_THROWS_AS(softmax(RealVector{}), ShapeError);
  }

  TEST_CASE("softmax matches the definition and its simplex properties") {
    Rng rng(11);
    for (int t = 0; t < 500; ++t) {
      const auto n = 1 + rng.below(12);
      RealVector z(n);
      std::vector<double> zs(n);
      for (std::size_t i = 0; i < n; ++i) zs[i] = z[i] = rng.uniform(-10, 10);
      const auto p = softmax(z);
      const auto ref = oracle::softmax(zs);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(p[i] > 0.0);
        CHECK(std::abs(p[i] - ref[i]) <= 1e-15);
        sum += p[i];
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
      const double shift = rng.uniform(-100, 100);
      RealVector zs2(n);
      for (std::size_t i = 0; i < n; ++i) zs2[i] = z[i] + shift;
      const auto p2 = softmax(zs2);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(p[i] - p2[i]) <= 1e-12);
    }
  }

  TEST_CASE("temperature") {
    Rng rng(12);
    RealVector z{0.3, -1.2, 2.2, 0.7};
    CHECK(softmax_temperature(z, 1.0).values().size() == 4);
    const auto a = softmax_temperature(z, 1.0), b = softmax(z);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] == b[i]);
    CHECK(softmax_temperature(RealVector{0.0, 1.0}, 0.001)[1] >= 1 - 1e-9);
    const auto c = softmax_temperature(RealVector{0.0, 2.0}, 2.0);
    const auto d = softmax(RealVector{0.0, 1.0});
    CHECK(std::abs(c[0] - d[0]) <= 1e-15);
    CHECK(std::abs(c[1] - d[1]) <= 1e-15);
    for (double T : {0.01, 0.5, 3.0, 100.0}) CHECK(softmax_temperature(z, T).argmax() == 2);
    CHECK_THROWS_AS(softmax_temperature(z, 0.0), DomainError);
    CHECK_THROWS_AS(softmax_temperature(z, -1.0), DomainError);
  }

  TEST_CASE("argmax ties and sampling") {
    const std::vector<double> v{1.0, 3.0, 3.0};
    CHECK(argmax(v) == 1);
    const auto p = softmax(RealVector{0.0, std::log(3.0)});
    CHECK(p.sample(0.0) == 0);
    CHECK(p.sample(0.2499) == 0);
    CHECK(p.sample(0.2501) == 1);
    CHECK(p.sample(0.9999999) == 1);
    CHECK_THROWS_AS(ProbabilityVector::validated({0.5, 0.6}), ValidationError);
    CHECK_THROWS_AS(ProbabilityVector::validated({1.5, -0.5}), ValidationError);
  }

  TEST_CASE("amplitudes reproduce the temperature softmax") {
    const auto a = amplitudes_from_logits(RealVector{0.0, 0.0}, 1.0, RealVector{0.0, 0.0});
    CHECK(std::abs(a[0] - cplx(1 / std::numbers::sqrt2, 0)) <= 1e-15);
    CHECK(std::abs(a[1] - cplx(1 / std::numbers::sqrt2, 0)) <= 1e-15);
    const auto b = amplitudes_from_logits(RealVector{0.0, 2 * std::log(3.0)}, 1.0, RealVector{0.4, -2.0});
    CHECK(std::abs(std::norm(b[0]) - 0.1) <= 1e-15);
    CHECK(std::abs(std::norm(b[1]) - 0.9) <= 1e-15);
    CHECK_THROWS_AS(amplitudes_from_logits(RealVector{0.0}, 0.0, RealVector{0.0}), DomainError);
    CHECK_THROWS_AS(amplitudes_from_logits(RealVector{0.0, 1.0}, 1.0, RealVector{0.0}), ShapeError);

    Rng rng(13);
    for (int t = 0; t < 200; ++t) {
      const auto n = 1 + rng.below(10);
      RealVector z(n), ph(n), zero(n);
      for (std::size_t i = 0; i < n; ++i) {
        z[i] = rng.uniform(-5, 5);
        ph[i] = rng.uniform(-4, 4);
      }
      const double T = rng.uniform(0.1, 4.0);
      const auto p = softmax_temperature(z, T);
      const auto x = amplitudes_from_logits(z, T, ph), y = amplitudes_from_logits(z, T, zero);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(std::norm(x[i]) - p[i]) <= 1e-12);
        CHECK(std::abs(std::norm(x[i]) - std::norm(y[i])) <= 1e-15);
      }
    }
  }
}
