#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lmlab/activations.hpp"
#include "lmlab/numkit.hpp"

namespace lmlab::attention {

inline constexpr double kLayerNormEpsilon = 1e-5;

struct HeadParams {
  RealMatrix WQ;  // d x d_k
  RealMatrix WK;  // d x d_k
  RealMatrix WV;  // d x d_v

  bool operator==(const HeadParams&) const = default;
};

struct FeedForward {
  RealMatrix Wa;  // d x d_ff
  RealVector ba;  // d_ff
  RealMatrix Wb;  // d_ff x d
  RealVector bb;  // d

  bool operator==(const FeedForward&) const = default;
};

struct BlockParams {
  std::vector<HeadParams> heads;
  RealMatrix WO;  // (h * d_v) x d
  RealVector ln1_gain, ln1_bias;
  RealVector ln2_gain, ln2_bias;
  FeedForward ffn;

  std::size_t model_dim() const { return WO.cols(); }
  std::size_t head_count() const { return heads.size(); }
  std::size_t ffn_dim() const { return ffn.Wa.cols(); }

  /// Throws ShapeError unless every shape agrees with (d, h, d_k, d_v, d_ff).
  void check_shapes() const;

  bool operator==(const BlockParams&) const = default;
};

struct Qkv {
  RealMatrix Q, K, V;
};

/// Q = X WQ, K = X WK, V = X WV.
Qkv qkv_project(const RealMatrix& X, const HeadParams& head);

/// Row-wise softmax(Q K^T / sqrt(d_k)). With `causal`, the most negative finite
/// double is added to every score above the diagonal before the softmax, so
/// those weights come out exactly 0.
RealMatrix attention_weights(const RealMatrix& Q, const RealMatrix& K, bool causal);

/// Y = A V.
RealMatrix attention_output(const RealMatrix& A, const RealMatrix& V);

/// Single head: attention_output(attention_weights(Q, K), V) on the projections of X.
RealMatrix self_attention(const RealMatrix& X, const HeadParams& head, bool causal);

/// Concat[head_1 .. head_h] WO.
RealMatrix multi_head(const RealMatrix& X, const BlockParams& params, bool causal);

/// Per row: (z - mean) / sqrt(var + eps) * gain + bias, population variance.
RealMatrix layer_norm(const RealMatrix& Z, const RealVector& gain, const RealVector& bias,
                      double eps = kLayerNormEpsilon);

/// Position-wise sigmoid(Z Wa + ba) Wb + bb.
RealMatrix feed_forward(const RealMatrix& Z, const FeedForward& ffn);

/// Z' = LN1(Z + MultiHead(Z)); out = LN2(Z' + FFN(Z')).
RealMatrix transformer_block(const RealMatrix& Z, const BlockParams& params, bool causal);

/// Applies the blocks in order.
RealMatrix run_blocks(const RealMatrix& Z, const std::vector<BlockParams>& blocks, bool causal);

/// Random block: projections and FFN weights N(0, 1/d) (Wb: N(0, 1/d_ff)), zero
/// biases, LayerNorm gain 1 and bias 0. d must be divisible by `heads`;
/// d_ff = 0 selects 4d.
BlockParams random_block(Rng& rng, std::size_t d, std::size_t heads, std::size_t d_ff = 0);

/// Stacks row `ids[i]` of the embedding table.
RealMatrix embed(const RealMatrix& table, const std::vector<std::uint32_t>& ids);

/// Logits z_i = E_out[i] . h for the last row h of the final block output.
RealVector next_token_logits(const std::vector<BlockParams>& blocks, const RealMatrix& E_in,
                             const RealMatrix& E_out, const std::vector<std::uint32_t>& ids);

/// Autoregressive sampling: embed, causal blocks, logits from E_out, temperature
/// softmax, inverse-CDF draw, append. Returns prompt + `steps` sampled ids.
std::vector<std::uint32_t> generate(const std::vector<BlockParams>& blocks,
                                    const RealMatrix& E_in, const RealMatrix& E_out,
                                    const std::vector<std::uint32_t>& prompt, double temperature,
                                    std::size_t steps, Rng& rng);

struct StackManifest {
  std::size_t d = 0;
  std::size_t heads = 0;
  std::size_t d_ff = 0;
  std::size_t layers = 0;
  std::uint64_t seed = 0;
};

/// One binary matrix per tensor (layer<i>_<name>.bin) plus manifest.json.
void save_blocks(const std::filesystem::path& dir, const std::vector<BlockParams>& blocks,
                 std::uint64_t seed);

struct LoadedStack {
  std::vector<BlockParams> blocks;
  StackManifest manifest;
};
LoadedStack load_blocks(const std::filesystem::path& dir);

}  // namespace lmlab::attention
