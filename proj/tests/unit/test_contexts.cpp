#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lmlab/contexts.hpp"
#include "lmlab/error.hpp"
#include "lmlab/rng.hpp"
#include "oracles.hpp"

using namespace lmlab;
using namespace lmlab::contexts;

namespace {

const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// The two observables written out entry by entry.
RealMatrix a1_matrix(double l1, double l2, double l3) {
  return RealMatrix{{l1, 0, 0}, {0, l2, 0}, {0, 0, l3}};
}

RealMatrix a2_matrix(double m1, double m2, double m3) {
  return RealMatrix{{(m1 + m2) / 2, (m2 - m1) / 2, 0}, {(m2 - m1) / 2, (m1 + m2) / 2, 0}, {0, 0, m3}};
}

double commutator_oracle(const RealMatrix& a, const RealMatrix& b) {
  const auto ab = oracle::naive_matmul(a, b), ba = oracle::naive_matmul(b, a);
  double s = 0.0;
  for (std::size_t i = 0; i < ab.rows(); ++i)
    for (std::size_t j = 0; j < ab.cols(); ++j) s += (ab(i, j) - ba(i, j)) * (ab(i, j) - ba(i, j));
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("contexts") {
  TEST_CASE("rotated basis coordinates") {
    const auto f = rotated_about_z(std::numbers::pi / 4);
    const RealVector f1{kInvSqrt2, -kInvSqrt2, 0.0}, f2{kInvSqrt2, kInvSqrt2, 0.0}, f3{0.0, 0.0, 1.0};
    CHECK(max_abs_diff(f.vector(0), f1) <= 1e-15);
    CHECK(max_abs_diff(f.vector(1), f2) <= 1e-15);
    CHECK(f.vector(2) == f3);
    CHECK(max_abs_diff(f.completeness(), RealMatrix::identity(3)) <= 1e-12);
  }

  TEST_CASE("basis validation and repair") {
    CHECK_THROWS_AS(ContextBasis("x", {RealVector{1, 0}, RealVector{1, 1}}, {"a", "b"}), ValidationError);
    CHECK_THROWS_AS(ContextBasis("x", {RealVector{1, 0, 0}, RealVector{0, 1, 0}}, {"a", "b"}), ValidationError);
    CHECK_THROWS_AS(ContextBasis("x", {RealVector{1, 0}, RealVector{0, 1}}, {"a"}), ValidationError);
    std::string note;
    const auto b = ContextBasis::repaired("x", {RealVector{1, 1e-6}, RealVector{0, 1}}, {"a", "b"}, note);
    CHECK_FALSE(note.empty());
    CHECK(max_abs_diff(b.completeness(), RealMatrix::identity(2)) <= 1e-12);
    std::string none;
    ContextBasis::repaired("y", {RealVector{1, 0}, RealVector{0, 1}}, {"a", "b"}, none);
    CHECK(none.empty());
    CHECK(ContextBasis::standard(3).word(2) == "e3");
  }

  TEST_CASE("observables") {
    const auto e = ContextBasis::standard(3);
    const auto f = rotated_about_z(std::numbers::pi / 4);
    CHECK(make_observable(e, {1, 2, 3}).matrix == a1_matrix(1, 2, 3));
    CHECK(max_abs_diff(make_observable(f, {4, 5, 6}).matrix, a2_matrix(4, 5, 6)) <= 1e-15);
    CHECK(max_abs_diff(make_observable(f, {7, 7, 7}).matrix, 7.0 * RealMatrix::identity(3)) <= 1e-15);
    CHECK_THROWS(make_observable(e, {1, 2}));
    const auto m = make_observable(f, {0.3, -1.1, 2.0}).matrix;
    CHECK(m == transpose(m));
  }

  TEST_CASE("commutators vanish exactly on degenerate spectra") {
    const auto e = ContextBasis::standard(3);
    const auto f = rotated_about_z(std::numbers::pi / 4);
    const std::vector<double> grid{1.0, 2.0};
    for (double l1 : grid)
      for (double l2 : grid)
        for (double m1 : grid)
          for (double m2 : grid) {
            const auto A = make_observable(e, {l1, l2, 3.0});
            const auto B = make_observable(f, {m1, m2, 5.0});
            const double c = commutator_norm(A, B);
            CHECK(std::abs(c - commutator_oracle(A.matrix, B.matrix)) <= 1e-12);
            if (l1 == l2 || m1 == m2) {
              CHECK(c <= 1e-12);
            } else {
              CHECK(c > 1e-3);
            }
          }
    const auto A = make_observable(e, {1, 2, 3});
    const auto B = make_observable(f, {4, 5, 6});
    CHECK(commutator_norm(A, A) == 0.0);
    CHECK(commutator_norm(A, B) > 0.1);
    CHECK(std::abs(commutator_norm(A, B) - commutator_oracle(a1_matrix(1, 2, 3), a2_matrix(4, 5, 6))) <= 1e-12);
    CHECK_THROWS(commutator_norm(A, make_observable(ContextBasis::standard(2), {1, 2})));
  }

  TEST_CASE("born probabilities") {
    const auto e = ContextBasis::standard(3);
    const auto f = rotated_about_z(std::numbers::pi / 4);
    const auto e1 = RealVector::basis(3, 0), e3 = RealVector::basis(3, 2);
    const auto pe = born_probabilities(e1, e);
    CHECK(pe[0] == 1.0);
    CHECK(pe[1] == 0.0);
    // <f1, e1> = <f2, e1> = 1/sqrt 2.
    const auto pf = born_probabilities(e1, f);
    CHECK(std::abs(pf[0] - 0.5) <= 1e-15);
    CHECK(std::abs(pf[1] - 0.5) <= 1e-15);
    CHECK(pf[2] == 0.0);
    CHECK(born_probabilities(e3, e)[2] == 1.0);
    CHECK(born_probabilities(e3, f)[2] == 1.0);
    CHECK_THROWS(born_probabilities(RealVector{1.0, 1.0, 0.0}, e));

    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
      const auto psi = random_unit_vectors(rng, 1, 3).row_vector(0);
      const auto probs = born_probabilities(psi, f);
      double s = 0.0;
      for (double p : probs.values()) s += p;
      CHECK(std::abs(s - 1.0) <= 1e-10);
    }
  }

  TEST_CASE("intertwining") {
    const auto e = ContextBasis::standard(3, "e");
    const auto f = rotated_about_z(std::numbers::pi / 4);
    const auto ef = make_graph({e, f});
    REQUIRE(ef.shared.size() == 1);
    CHECK(ef.shared[0].members.size() == 2);
    CHECK(ef.shared[0].members[0].position == 2);
    CHECK(ef.shared[0].members[1].position == 2);
    const auto r = intertwine_check(ef);
    CHECK(r.nontrivial);
    CHECK(r.dimension_ok);

    Rng rng(2);
    const auto bank = bank_graph(rng);
    const auto br = intertwine_check(bank);
    CHECK(br.shared_count == 1);
    CHECK(br.max_multiplicity == 3);
    CHECK(br.dimension == 3);
    for (const auto& b : bank.bases) CHECK(b.find("bank").has_value());

    const auto g = ContextBasis("g", {RealVector{1, 0}, RealVector{0, 1}}, {"a", "b"});
    const auto h = ContextBasis("h", {RealVector{kInvSqrt2, kInvSqrt2}, RealVector{kInvSqrt2, -kInvSqrt2}},
                                {"c", "d"});
    CHECK(make_graph({g, h}).shared.empty());

    auto broken = ef;
    broken.shared[0].members[1].position = 0;
    CHECK_THROWS_AS(intertwine_check(broken), ValidationError);
  }

  TEST_CASE("disambiguation") {
    Rng rng(3);
    const auto graph = bank_graph(rng);
    const auto bank = normalized(RealVector{1.0, 1.0, 1.0});
    for (const auto& b : graph.bases) {
      const auto d = disambiguate(bank, graph, b.label());
      CHECK(d.word == "bank");
      CHECK(std::abs(d.probabilities[d.index] - 1.0) <= 1e-12);
    }
    CHECK_THROWS(disambiguate(bank, graph, "nowhere"));

    int stable = 0, differ = 0;
    for (int t = 0; t < 200; ++t) {
      const auto dir = random_unit_vectors(rng, 1, 3).row_vector(0);
      const auto noisy = normalized(bank + rng.uniform(0.0, 0.1) * dir);
      stable += disambiguate(noisy, graph, "river").word == "bank";
      const auto a = disambiguate(noisy, graph, "river").probabilities;
      const auto b = disambiguate(noisy, graph, "economy").probabilities;
      double gap = 0.0;
      for (std::size_t i = 0; i < 3; ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
      differ += gap > 1e-9;
    }
    CHECK(stable == 200);
    CHECK(differ > 190);
  }

  TEST_CASE("graph file round trip") {
    Rng rng(4);
    const auto g = bank_graph(rng);
    std::stringstream ss;
    write_graph(ss, g);
    const auto back = read_graph(ss);
    REQUIRE(back.bases.size() == g.bases.size());
    for (std::size_t i = 0; i < g.bases.size(); ++i) {
      CHECK(back.bases[i].label() == g.bases[i].label());
      CHECK(back.bases[i].words() == g.bases[i].words());
      CHECK(back.bases[i].vectors() == g.bases[i].vectors());
    }
    REQUIRE(back.shared.size() == 1);
    CHECK(back.shared[0].members.size() == 3);
    std::stringstream bad("{\"format\":\"lmlab.contexts\",\"version\":9}");
    CHECK_THROWS(read_graph(bad));
  }
}
