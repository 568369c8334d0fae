#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "lmlab/attention.hpp"
#include "lmlab/error.hpp"
#include "lmlab/rng.hpp"
#include "oracles.hpp"

using namespace lmlab;
using namespace lmlab::attention;

namespace {

// Weights straight from softmax(QK^T / sqrt(d_k)); masked scores are skipped.
RealMatrix reference_weights(const RealMatrix& Q, const RealMatrix& K, bool causal) {
  const auto n = Q.rows(), m = K.rows();
  RealMatrix A(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s;
    const auto visible = causal ? i + 1 : m;
    for (std::size_t j = 0; j < visible; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < Q.cols(); ++c) dot += Q(i, c) * K(j, c);
      s.push_back(dot / std::sqrt(static_cast<double>(Q.cols())));
    }
    const auto p = oracle::softmax(s);
    for (std::size_t j = 0; j < visible; ++j) A(i, j) = p[j];
  }
  return A;
}

RealMatrix reference_norm(const RealMatrix& Z, const RealVector& g, const RealVector& b) {
  RealMatrix out(Z.rows(), Z.cols());
  const double n = static_cast<double>(Z.cols());
  for (std::size_t r = 0; r < Z.rows(); ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 0; c < Z.cols(); ++c) mean += Z(r, c) / n;
    for (std::size_t c = 0; c < Z.cols(); ++c) var += (Z(r, c) - mean) * (Z(r, c) - mean) / n;
    for (std::size_t c = 0; c < Z.cols(); ++c)
      out(r, c) = (Z(r, c) - mean) / std::sqrt(var + 1e-5) * g[c] + b[c];
  }
  return out;
}

// Runs each head on its own, concatenates by hand, then multiplies by WO.
RealMatrix reference_multi_head(const RealMatrix& X, const BlockParams& p, bool causal) {
  const auto n = X.rows();
  std::size_t width = 0;
  for (const auto& h : p.heads) width += h.WV.cols();
  RealMatrix concat(n, width);
  std::size_t offset = 0;
  for (const auto& h : p.heads) {
    const auto Q = oracle::naive_matmul(X, h.WQ), K = oracle::naive_matmul(X, h.WK),
               V = oracle::naive_matmul(X, h.WV);
    const auto Y = oracle::naive_matmul(reference_weights(Q, K, causal), V);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < Y.cols(); ++c) concat(r, offset + c) = Y(r, c);
    offset += Y.cols();
  }
  return oracle::naive_matmul(concat, p.WO);
}

RealMatrix reference_block(const RealMatrix& Z, const BlockParams& p, bool causal) {
  const auto M = reference_multi_head(Z, p, causal);
  RealMatrix s1(Z.rows(), Z.cols());
  for (std::size_t i = 0; i < Z.size(); ++i) s1.data()[i] = Z.data()[i] + M.data()[i];
  const auto Zp = reference_norm(s1, p.ln1_gain, p.ln1_bias);
  auto H = oracle::naive_matmul(Zp, p.ffn.Wa);
  for (std::size_t r = 0; r < H.rows(); ++r)
    for (std::size_t c = 0; c < H.cols(); ++c)
      H(r, c) = 1.0 / (1.0 + std::exp(-(H(r, c) + p.ffn.ba[c])));
  auto F = oracle::naive_matmul(H, p.ffn.Wb);
  RealMatrix s2(Z.rows(), Z.cols());
  for (std::size_t r = 0; r < Z.rows(); ++r)
    for (std::size_t c = 0; c < Z.cols(); ++c) s2(r, c) = Zp(r, c) + F(r, c) + p.ffn.bb[c];
  return reference_norm(s2, p.ln2_gain, p.ln2_bias);
}

}  // namespace

TEST_SUITE("attention") {
  TEST_CASE("qkv projection") {
    Rng rng(1);
    const auto X = random_gaussian(rng, 4, 3);
    const HeadParams id{RealMatrix::identity(3), RealMatrix::identity(3), RealMatrix::identity(3)};
    const auto a = qkv_project(X, id);
    CHECK(a.Q == X);
    CHECK(a.K == X);
    CHECK(a.V == X);
    const auto z = qkv_project(RealMatrix(4, 3), id);
    CHECK(z.Q == RealMatrix(4, 3));

    const HeadParams h{random_gaussian(rng, 3, 2), random_gaussian(rng, 3, 2),
                       random_gaussian(rng, 3, 5)};
    const auto b = qkv_project(X, h);
    CHECK(b.Q == oracle::naive_matmul(X, h.WQ));
    CHECK(b.K == oracle::naive_matmul(X, h.WK));
    CHECK(b.V == oracle::naive_matmul(X, h.WV));
    CHECK_THROWS_AS(qkv_project(RealMatrix(4, 2), h), ShapeError);
  }

  TEST_CASE("attention weights") {
    Rng rng(2);
    const auto q1 = random_gaussian(rng, 1, 3);
    CHECK(attention_weights(q1, q1, false) == RealMatrix{{1.0}});
    CHECK_THROWS_AS(attention_weights(RealMatrix(2, 0), RealMatrix(2, 0), false), ShapeError);

    // Orthogonal equal-norm rows: both off-diagonal weights are 1 / (1 + e^{|q|^2/sqrt 2}).
    const RealMatrix Q{{1.0, 1.0}, {1.0, -1.0}};
    const auto A = attention_weights(Q, Q, false);
    CHECK(A(0, 1) == A(1, 0));
    CHECK(std::abs(A(0, 1) - 1.0 / (1.0 + std::exp(2.0 / std::sqrt(2.0)))) <= 1e-15);

    for (int t = 0; t < 50; ++t) {
      const auto n = 1 + rng.below(9), dk = 1 + rng.below(6);
      const auto Qr = random_gaussian(rng, n, dk, 3.0), Kr = random_gaussian(rng, n, dk, 3.0);
      for (bool causal : {false, true}) {
        const auto W = attention_weights(Qr, Kr, causal);
        CHECK(oracle::max_abs(W, reference_weights(Qr, Kr, causal)) <= 1e-15);
        for (std::size_t i = 0; i < n; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += W(i, j);
          CHECK(std::abs(s - 1.0) <= 1e-12);
          if (causal)
            for (std::size_t j = i + 1; j < n; ++j) CHECK(W(i, j) == 0.0);
        }
        if (causal) {
          CHECK(W(0, 0) == 1.0);
        }
      }
    }
  }

  TEST_CASE("scaling matches softmax of the scaled reference") {
    // Inputs scaled by sqrt(sqrt(d_k)) reproduce the raw dot products.
    Rng rng(3);
    const std::size_t dk = 16;
    const auto Q = random_gaussian(rng, 5, dk), K = random_gaussian(rng, 5, dk);
    const double s = std::sqrt(std::sqrt(static_cast<double>(dk)));
    const auto A = attention_weights(s * Q, s * K, false);
    const auto raw = oracle::naive_matmul(Q, transpose(K));
    for (std::size_t i = 0; i < 5; ++i) {
      const auto p = oracle::softmax(std::vector<double>(raw.row(i).begin(), raw.row(i).end()));
      for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(A(i, j) - p[j]) <= 1e-12);
    }
  }

  TEST_CASE("attention output") {
    Rng rng(4);
    const auto V = random_gaussian(rng, 4, 3);
    CHECK(attention_output(RealMatrix::identity(4), V) == V);
    RealMatrix U(4, 4);
    for (auto& x : U.data()) x = 0.25;
    const auto Y = attention_output(U, V);
    for (std::size_t c = 0; c < 3; ++c) {
      const double mean = (V(0, c) + V(1, c) + V(2, c) + V(3, c)) / 4.0;
      for (std::size_t r = 0; r < 4; ++r) CHECK(std::abs(Y(r, c) - mean) <= 1e-15);
    }
    const auto A = random_gaussian(rng, 4, 4);
    CHECK(attention_output(A, V) == oracle::naive_matmul(A, V));
    CHECK_THROWS_AS(attention_output(RealMatrix(4, 3), V), ShapeError);
  }

  TEST_CASE("multi-head attention") {
    Rng rng(5);
    auto one = random_block(rng, 6, 1);
    one.WO = RealMatrix::identity(6);
    const auto X = random_gaussian(rng, 5, 6);
    for (bool causal : {false, true})
      CHECK(max_abs_diff(multi_head(X, one, causal), self_attention(X, one.heads[0], causal)) <= 1e-12);

    const auto two = random_block(rng, 6, 2);
    CHECK(two.heads[0].WQ.cols() == 3);
    CHECK(multi_head(RealMatrix(5, 6), two, true) == RealMatrix(5, 6));
    for (bool causal : {false, true})
      CHECK(oracle::max_abs(multi_head(X, two, causal), reference_multi_head(X, two, causal)) <= 1e-12);

    auto bad = two;
    bad.WO = RealMatrix(5, 6);
    CHECK_THROWS_AS(multi_head(X, bad, false), ShapeError);
  }

  TEST_CASE("layer norm") {
    const RealVector g1{1.0, 1.0, 1.0}, b0{0.0, 0.0, 0.0};
    CHECK(layer_norm(RealMatrix{{2.0, 2.0, 2.0}}, g1, b0) == RealMatrix{{0.0, 0.0, 0.0}});
    const auto pair = layer_norm(RealMatrix{{-1.0, 1.0}}, RealVector{1.0, 1.0}, RealVector{0.0, 0.0});
    CHECK(std::abs(pair(0, 0) + 1.0) <= 1e-5);
    CHECK(std::abs(pair(0, 1) - 1.0) <= 1e-5);

    Rng rng(6);
    const std::size_t d = 32;
    RealVector g(d), b(d);
    for (std::size_t c = 0; c < d; ++c) g[c] = 1.0;
    const auto Z = random_gaussian(rng, 10, d, 5.0);
    const auto N = layer_norm(Z, g, b);
    for (std::size_t r = 0; r < 10; ++r) {
      double mean = 0.0, var = 0.0;
      for (std::size_t c = 0; c < d; ++c) mean += N(r, c) / d;
      for (std::size_t c = 0; c < d; ++c) var += (N(r, c) - mean) * (N(r, c) - mean) / d;
      CHECK(std::abs(mean) <= 1e-12);
      CHECK(std::abs(var - 1.0) <= 1e-6);
    }
    for (std::size_t c = 0; c < d; ++c) {
      g[c] = rng.uniform(0.5, 2.0);
      b[c] = rng.normal();
    }
    CHECK(oracle::max_abs(layer_norm(Z, g, b), reference_norm(Z, g, b)) <= 1e-12);
    CHECK_THROWS_AS(layer_norm(Z, RealVector(3), b), ShapeError);
  }

  TEST_CASE("transformer block") {
    Rng rng(7);
    const std::size_t d = 8;
    auto p = random_block(rng, d, 2);
    CHECK(p.ffn_dim() == 4 * d);
    const auto Z = random_gaussian(rng, 5, d);
    for (bool causal : {false, true})
      CHECK(oracle::max_abs(transformer_block(Z, p, causal), reference_block(Z, p, causal)) <= 1e-12);

    // Residual-only path: normalization applied twice.
    auto r = p;
    r.WO = RealMatrix(r.WO.rows(), d);
    r.ffn.Wa = RealMatrix(d, r.ffn_dim());
    r.ffn.Wb = RealMatrix(r.ffn_dim(), d);
    const auto once = reference_norm(Z, p.ln1_gain, p.ln1_bias);
    CHECK(oracle::max_abs(transformer_block(Z, r, true), reference_norm(once, p.ln2_gain, p.ln2_bias)) <=
          1e-12);

    // A single row only sees itself.
    const auto row = transformer_block(RealMatrix::from_rows({Z.row_vector(2)}), p, false);
    const auto full = transformer_block(Z, p, true);
    CHECK(row.rows() == 1);
    CHECK(max_abs_diff(row.row_vector(0), transformer_block(RealMatrix::from_rows({Z.row_vector(2)}), p, true)
                                              .row_vector(0)) == 0.0);
    CHECK(max_abs_diff(transformer_block(RealMatrix::from_rows({Z.row_vector(0)}), p, true).row_vector(0),
                       full.row_vector(0)) <= 1e-12);
  }

  TEST_CASE("causal blocks ignore later tokens") {
    Rng rng(8);
    const std::size_t d = 8, n = 6;
    const std::vector<BlockParams> blocks{random_block(rng, d, 2), random_block(rng, d, 2)};
    const auto Z = random_gaussian(rng, n, d);
    const auto base = run_blocks(Z, blocks, true);
    for (std::size_t j = 1; j < n; ++j) {
      auto Zp = Z;
      for (auto& x : Zp.row(j)) x += rng.normal();
      const auto out = run_blocks(Zp, blocks, true);
      for (std::size_t i = 0; i < j; ++i) CHECK(out.row_vector(i) == base.row_vector(i));
    }
  }

  TEST_CASE("one token in two contexts gets two representations") {
    Rng rng(9);
    const std::size_t d = 16;
    const auto E = random_gaussian(rng, 10, d);
    const std::vector<BlockParams> blocks{random_block(rng, d, 2)};
    const auto a = run_blocks(embed(E, {1, 2, 3, 7}), blocks, true);
    const auto b = run_blocks(embed(E, {4, 5, 6, 7}), blocks, true);
    CHECK(norm(a.row_vector(3) - b.row_vector(3)) > 0.0);
    CHECK_THROWS(embed(E, {10}));
  }

  TEST_CASE("generation") {
    Rng rng(10);
    const std::size_t d = 8, V = 12;
    const std::vector<BlockParams> blocks{random_block(rng, d, 2)};
    const auto E = random_gaussian(rng, V, d), Eo = random_gaussian(rng, V, d);
    const std::vector<std::uint32_t> prompt{1, 2, 3};

    Rng g0(1);
    CHECK(generate(blocks, E, Eo, prompt, 1.0, 0, g0) == prompt);
    Rng g1(77), g2(77);
    const auto x = generate(blocks, E, Eo, prompt, 1.0, 10, g1);
    CHECK(x.size() == 13);
    CHECK(x == generate(blocks, E, Eo, prompt, 1.0, 10, g2));
    for (auto id : x) CHECK(id < V);
    CHECK_THROWS(generate(blocks, E, Eo, {}, 1.0, 2, g1));
    CHECK_THROWS_AS(generate(blocks, E, Eo, prompt, 0.0, 2, g1), DomainError);
    CHECK_THROWS(generate(blocks, E, Eo, {12}, 1.0, 2, g1));

    // Low temperature with a logit gap of at least 1 picks the top logit.
    const auto z = next_token_logits(blocks, E, Eo, prompt);
    std::vector<double> sorted(z.begin(), z.end());
    std::sort(sorted.rbegin(), sorted.rend());
    REQUIRE(sorted[0] - sorted[1] > 0.0);
    auto Es = Eo;
    const double scale = 1.5 / (sorted[0] - sorted[1]);
    for (auto& v : Es.data()) v *= scale;
    const auto top = argmax(next_token_logits(blocks, E, Es, prompt).values());
    std::size_t hits = 0;
    Rng s(11);
    for (int t = 0; t < 1000; ++t) hits += generate(blocks, E, Es, prompt, 0.001, 1, s).back() == top;
    CHECK(hits >= 999);
    const auto ps = softmax_temperature(next_token_logits(blocks, E, Es, prompt), 0.001);
    CHECK(ps[top] >= 0.999);
  }

  TEST_CASE("save and load blocks") {
    Rng rng(12);
    const std::vector<BlockParams> blocks{random_block(rng, 8, 2), random_block(rng, 8, 2, 12)};
    const auto dir = std::filesystem::temp_directory_path() / "lmlab_attention_roundtrip";
    save_blocks(dir, {blocks[0], blocks[0]}, 12);
    const auto back = load_blocks(dir);
    CHECK(back.blocks.size() == 2);
    CHECK(back.blocks[1] == blocks[0]);
    CHECK(back.manifest.d == 8);
    CHECK(back.manifest.heads == 2);
    CHECK(back.manifest.d_ff == 32);
    CHECK(back.manifest.seed == 12);
    std::filesystem::remove_all(dir);
  }
}
