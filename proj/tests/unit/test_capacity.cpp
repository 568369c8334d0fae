#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "lmlab/capacity.hpp"
#include "lmlab/error.hpp"
#include "lmlab/rng.hpp"

using namespace lmlab;
using namespace lmlab::capacity;

namespace {

// Largest set of lines through the origin in R^2 with pairwise |cos| <= eps,
// searched exhaustively over a grid of directions in [0, pi).
std::size_t grid_packing_2d(double eps, std::size_t grid) {
  std::vector<double> theta(grid);
  for (std::size_t i = 0; i < grid; ++i) theta[i] = std::numbers::pi * static_cast<double>(i) / grid;
  const auto ok = [&](std::size_t a, std::size_t b) {
    return std::abs(std::cos(theta[a] - theta[b])) <= eps;
  };
  std::size_t best = 1;
  for (std::size_t a = 0; a < grid; ++a)
    for (std::size_t b = a + 1; b < grid; ++b) {
      if (!ok(a, b)) continue;
      best = std::max<std::size_t>(best, 2);
      for (std::size_t c = b + 1; c < grid; ++c)
        if (ok(a, c) && ok(b, c)) return 3;
    }
  return best;
}

// Least squares written out from the normal equations.
double reference_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Synthetic embeddings: base words plus shared gender and royalty offsets.
// Rows: 0 man, 1 woman, 2 king, 3 queen, then distractors.
RealMatrix analogy_table(Rng& rng, std::size_t d, std::size_t distractors, double noise) {
  const auto base = random_gaussian(rng, 1, d), gender = random_gaussian(rng, 1, d),
             royal = random_gaussian(rng, 1, d);
  RealMatrix E(4 + distractors, d);
  for (std::size_t c = 0; c < d; ++c) {
    E(0, c) = base(0, c);
    E(1, c) = base(0, c) + gender(0, c);
    E(2, c) = base(0, c) + royal(0, c);
    E(3, c) = E(2, c) - E(0, c) + E(1, c);
  }
  const auto rest = random_gaussian(rng, distractors, d);
  for (std::size_t r = 0; r < distractors; ++r)
    for (std::size_t c = 0; c < d; ++c) E(4 + r, c) = rest(r, c);
  if (noise > 0)
    for (auto& x : E.data()) x += noise / std::sqrt(static_cast<double>(d)) * rng.normal();
  return E;
}

}  // namespace

TEST_SUITE("capacity") {
  TEST_CASE("orthonormal baseline has no violations") {
    Rng rng(1);
    for (std::size_t d : {2, 8, 32, 64}) {
      const auto Q = orthonormalize_rows(random_gaussian(rng, d, d));
      for (double eps : {1e-6, 0.1, 0.5}) {
        const auto r = measure_packing_of(Q, eps);
        CHECK(r.violating_pairs == 0);
        CHECK(r.max_abs_dot <= 1e-12);
      }
    }
  }

  TEST_CASE("one dimension only has plus and minus one") {
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
      const auto r = measure_packing(rng, 2, 1, 0.5);
      CHECK(r.max_abs_dot == 1.0);
      CHECK(r.violating_pairs == 1);
      CHECK(r.fraction_violating == 1.0);
    }
  }

  TEST_CASE("violation rate follows the Gaussian tail") {
    // Pooled over 20 draws of n = 1000 in d = 256 at eps = 0.3.
    Rng rng(3);
    const std::size_t n = 1000, d = 256;
    const double eps = 0.3;
    double pairs = 0, violating = 0;
    for (int t = 0; t < 20; ++t) {
      const auto r = measure_packing(rng, n, d, eps);
      CHECK(r.fraction_violating >= 0.0);
      CHECK(r.fraction_violating <= 1.0);
      CHECK(r.max_abs_dot < 1.0);
      pairs += n * (n - 1) / 2.0;
      violating += static_cast<double>(r.violating_pairs);
    }
    const double tail = std::erfc(eps * std::sqrt(static_cast<double>(d)) / std::numbers::sqrt2);
    const double observed = violating / pairs;
    CHECK(observed >= tail / 3);
    CHECK(observed <= tail * 3);
  }

  TEST_CASE("greedy packing in the plane") {
    const auto bound = grid_packing_2d(0.05, 720);
    CHECK(bound == 2);
    Rng rng(4);
    for (int t = 0; t < 20; ++t) CHECK(greedy_pack(rng, 2, 0.05, 500) <= bound);
    // Lines 0.14 rad apart are allowed at eps = 0.99, so many more than d fit.
    CHECK(greedy_pack(rng, 2, 0.99, 500) >= 8);
  }

  TEST_CASE("greedy result details") {
    Rng rng(5);
    const auto r = greedy_pack_detailed(rng, 16, 0.3, {50, false});
    CHECK(r.max_attempts == 50);
    CHECK(r.candidates >= r.accepted + 50);
    Rng a(6), b(6);
    CHECK(greedy_pack(a, 16, 0.3, 100) == greedy_pack(b, 16, 0.3, 100));
    Rng c(7);
    const auto s = greedy_pack_detailed(c, 8, 0.2, {50, true});
    CHECK(s.accepted >= 8);
  }

  TEST_CASE("greedy count does not shrink as epsilon grows") {
    std::size_t violations = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::size_t prev = 0;
      for (double eps : {0.1, 0.2, 0.3, 0.5, 0.7}) {
        Rng rng(seed);
        const auto n = greedy_pack(rng, 12, eps, 200);
        violations += n < prev;
        prev = n;
      }
    }
    CHECK(violations == 0);
  }

  TEST_CASE("ln N grows with d") {
    const std::vector<std::size_t> dims{32, 64, 128};
    std::vector<double> mean_ln(dims.size(), 0.0);
    const int seeds = 6;
    for (int s = 0; s < seeds; ++s) {
      Rng rng(100 + s);
      const auto curve = capacity_curve(rng, 0.25, dims, {5, false});
      for (std::size_t i = 0; i < dims.size(); ++i) {
        CHECK(curve.points[i].achieved_n >= dims[i]);
        mean_ln[i] += std::log(static_cast<double>(curve.points[i].achieved_n)) / seeds;
      }
    }
    CHECK(mean_ln[1] > mean_ln[0]);
    CHECK(mean_ln[2] > mean_ln[1]);
    Rng rng(9);
    CHECK_THROWS(capacity_curve(rng, 0.25, {32}));
  }

  TEST_CASE("line fit") {
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    const auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-14));
    Rng rng(10);
    std::vector<double> xs, ys;
    for (int i = 0; i < 30; ++i) {
      xs.push_back(rng.uniform(0, 10));
      ys.push_back(0.7 * xs.back() + rng.normal());
    }
    CHECK(std::abs(fit_line(xs, ys).slope - reference_slope(xs, ys)) <= 1e-12);
  }

  TEST_CASE("curve csv") {
    Rng rng(11);
    const std::vector<CapacityCurve> curves{capacity_curve(rng, 0.5, {4, 8}, {20, false})};
    const std::vector<std::uint64_t> seeds{11};
    std::ostringstream os;
    write_curve_csv(os, seeds, curves);
    const auto text = os.str();
    CHECK(text.rfind("seed,d,epsilon,max_attempts,greedy_n,achieved_n,ln_n,curve_slope,curve_r_squared\n", 0) ==
          0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  }

  TEST_CASE("random projection") {
    Rng rng(12);
    const auto X = random_gaussian(rng, 10, 16);
    const auto same = project_with(X, RealMatrix::identity(16));
    CHECK(distortion(X, same, 0.01).max_distortion == 0.0);
    CHECK_THROWS(jl_project(rng, X, 0));
    CHECK_THROWS(jl_project(rng, X, 17));

    // At k = ceil(8 ln n / eps^2) nearly every pair is within (1 +- eps); a whole
    // trial with all 1225 pairs inside needs about twice that k.
    const std::size_t n = 50, d = 512;
    const double eps = 0.5;
    const auto k = jl_target_dim(n, eps);
    CHECK(k == static_cast<std::size_t>(std::ceil(8 * std::log(50.0) / 0.25)));
    std::size_t pairs = 0, within = 0;
    int good = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
      const auto P = random_gaussian(rng, n, d);
      const auto Y = jl_project(rng, P, k);
      const auto rep = distortion(P, Y, eps);
      CHECK(rep.pairs == n * (n - 1) / 2);
      pairs += rep.pairs;
      within += rep.within;
      good += distortion(P, jl_project(rng, P, 2 * k), eps).all_within;
      if (t == 0) {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j) {
            const auto u = Y.row_vector(i), v = Y.row_vector(j);
            worst = std::max(worst, std::abs(polarization_inner(u, v) - inner(u, v)));
          }
        CHECK(worst <= 1e-10);
      }
    }
    CHECK(static_cast<double>(within) >= 0.999 * static_cast<double>(pairs));
    CHECK(good >= 0.95 * trials);
  }

  TEST_CASE("analogy arithmetic") {
    Rng rng(13);
    const auto E = analogy_table(rng, 32, 20, 0.0);
    CHECK(analogy(E, 2, 0, 1) == 3);
    CHECK(cosine_similarity(E.row(3), E.row(3)) == doctest::Approx(1.0).epsilon(1e-15));

    int hits = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) hits += analogy(analogy_table(rng, 32, 20, 0.05), 2, 0, 1) == 3;
    CHECK(hits >= 0.99 * trials);

    // a - b + c = 0 when a == b and c is zero.
    RealMatrix Z(4, 3);
    Z(0, 0) = 1.0;
    Z(2, 1) = 1.0;
    CHECK_THROWS_AS(analogy(Z, 0, 0, 1), DomainError);
    CHECK_THROWS(analogy(E, 0, 1, 99));
  }
}
