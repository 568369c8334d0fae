#include "lmlab/attention.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "lmlab/matrix_io.hpp"

namespace lmlab::attention {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

RealMatrix as_row(const RealVector& v) {
  return RealMatrix(1, v.dim(), std::vector<double>(v.begin(), v.end()));
}

RealVector load_row(const std::filesystem::path& p) {
  const auto m = load_binary(p);
  if (m.rows() != 1) throw FormatError(p.string() + ": expected a 1-row matrix");
  return m.row_vector(0);
}

}  // namespace

void BlockParams::check_shapes() const {
  require(!heads.empty(), "block: at least one head required");
  const auto d = heads.front().WQ.rows();
  require(d > 0, "block: model dimension must be >= 1");
  const auto dk = heads.front().WQ.cols();
  const auto dv = heads.front().WV.cols();
  require(dk > 0 && dv > 0, "block: d_k and d_v must be >= 1");
  for (const auto& h : heads) {
    require(h.WQ.rows() == d && h.WK.rows() == d && h.WV.rows() == d,
            "block: projection rows must equal d");
    require(h.WQ.cols() == dk && h.WK.cols() == dk && h.WV.cols() == dv,
            "block: heads disagree on d_k / d_v");
  }
  require(WO.rows() == heads.size() * dv && WO.cols() == d, "block: WO must be (h*d_v) x d");
  require(ln1_gain.dim() == d && ln1_bias.dim() == d && ln2_gain.dim() == d &&
              ln2_bias.dim() == d,
          "block: LayerNorm parameters must have dimension d");
  const auto dff = ffn.Wa.cols();
  require(ffn.Wa.rows() == d && ffn.ba.dim() == dff && ffn.Wb.rows() == dff &&
              ffn.Wb.cols() == d && ffn.bb.dim() == d,
          "block: inconsistent FFN shapes");
}

Qkv qkv_project(const RealMatrix& X, const HeadParams& head) {
  require(X.cols() == head.WQ.rows() && X.cols() == head.WK.rows() && X.cols() == head.WV.rows(),
          "qkv_project: X.cols must equal projection rows");
  return {matmul(X, head.WQ), matmul(X, head.WK), matmul(X, head.WV)};
}

RealMatrix attention_weights(const RealMatrix& Q, const RealMatrix& K, bool causal) {
  require(Q.cols() == K.cols(), "attention_weights: Q and K widths differ");
  if (Q.cols() == 0) throw ShapeError("attention_weights: d_k must be >= 1");
  require(!causal || Q.rows() == K.rows(), "attention_weights: causal mask needs square scores");
  const double scale = std::sqrt(static_cast<double>(Q.cols()));
  constexpr double kMask = std::numeric_limits<double>::lowest();

  RealMatrix A = matmul(Q, transpose(K));
  for (std::size_t i = 0; i < A.rows(); ++i) {
    auto row = A.row(i);
    double m = std::numeric_limits<double>::lowest();
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] /= scale;
      if (causal && j > i) row[j] += kMask;
      m = std::max(m, row[j]);
    }
    double sum = 0.0;
    for (auto& x : row) {
      x = std::exp(x - m);
      sum += x;
    }
    for (auto& x : row) x /= sum;
  }
  return A;
}

RealMatrix attention_output(const RealMatrix& A, const RealMatrix& V) {
  require(A.rows() == A.cols() && A.cols() == V.rows(),
          "attention_output: A must be n x n with n = V.rows");
  return matmul(A, V);
}

RealMatrix self_attention(const RealMatrix& X, const HeadParams& head, bool causal) {
  const auto qkv = qkv_project(X, head);
  return attention_output(attention_weights(qkv.Q, qkv.K, causal), qkv.V);
}

RealMatrix multi_head(const RealMatrix& X, const BlockParams& params, bool causal) {
  require(!params.heads.empty(), "multi_head: h must be >= 1");
  const auto dv = params.heads.front().WV.cols();
  require(params.WO.rows() == params.heads.size() * dv, "multi_head: WO rows must equal h*d_v");
  RealMatrix concat(X.rows(), params.heads.size() * dv);
  for (std::size_t h = 0; h < params.heads.size(); ++h) {
    require(params.heads[h].WV.cols() == dv, "multi_head: heads disagree on d_v");
    const auto Y = self_attention(X, params.heads[h], causal);
    for (std::size_t r = 0; r < Y.rows(); ++r)
      for (std::size_t c = 0; c < dv; ++c) concat(r, h * dv + c) = Y(r, c);
  }
  return matmul(concat, params.WO);
}

RealMatrix layer_norm(const RealMatrix& Z, const RealVector& gain, const RealVector& bias,
                      double eps) {
  require(gain.dim() == Z.cols() && bias.dim() == Z.cols(),
          "layer_norm: gain/bias must match the feature count");
  RealMatrix out(Z.rows(), Z.cols());
  const double n = static_cast<double>(Z.cols());
  for (std::size_t r = 0; r < Z.rows(); ++r) {
    const auto z = Z.row(r);
    double mean = 0.0;
    for (double x : z) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : z) var += (x - mean) * (x - mean);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    auto o = out.row(r);
    for (std::size_t c = 0; c < z.size(); ++c) o[c] = (z[c] - mean) * inv * gain[c] + bias[c];
  }
  return out;
}

RealMatrix feed_forward(const RealMatrix& Z, const FeedForward& ffn) {
  RealMatrix hidden = matmul(Z, ffn.Wa);
  require(ffn.ba.dim() == hidden.cols(), "feed_forward: ba dimension");
  for (std::size_t r = 0; r < hidden.rows(); ++r) {
    auto row = hidden.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = sigmoid(row[c] + ffn.ba[c]);
  }
  RealMatrix out = matmul(hidden, ffn.Wb);
  require(ffn.bb.dim() == out.cols(), "feed_forward: bb dimension");
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += ffn.bb[c];
  }
  return out;
}

RealMatrix transformer_block(const RealMatrix& Z, const BlockParams& params, bool causal) {
  params.check_shapes();
  require(Z.cols() == params.model_dim(), "transformer_block: Z.cols must equal d");
  const RealMatrix mid = layer_norm(Z + multi_head(Z, params, causal), params.ln1_gain,
                                    params.ln1_bias);
  return layer_norm(mid + feed_forward(mid, params.ffn), params.ln2_gain, params.ln2_bias);
}

RealMatrix run_blocks(const RealMatrix& Z, const std::vector<BlockParams>& blocks, bool causal) {
  RealMatrix out = Z;
  for (const auto& b : blocks) out = transformer_block(out, b, causal);
  return out;
}

BlockParams random_block(Rng& rng, std::size_t d, std::size_t heads, std::size_t d_ff) {
  if (d == 0 || heads == 0 || d % heads != 0) {
    throw ShapeError("random_block: d must be a positive multiple of the head count");
  }
  if (d_ff == 0) d_ff = 4 * d;
  const auto dk = d / heads;
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  BlockParams p;
  for (std::size_t h = 0; h < heads; ++h) {
    HeadParams hp;
    hp.WQ = random_gaussian(rng, d, dk, s);
    hp.WK = random_gaussian(rng, d, dk, s);
    hp.WV = random_gaussian(rng, d, dk, s);
    p.heads.push_back(std::move(hp));
  }
  p.WO = random_gaussian(rng, heads * dk, d, s);
  p.ln1_gain = RealVector(std::vector<double>(d, 1.0));
  p.ln1_bias = RealVector(d);
  p.ln2_gain = RealVector(std::vector<double>(d, 1.0));
  p.ln2_bias = RealVector(d);
  p.ffn.Wa = random_gaussian(rng, d, d_ff, s);
  p.ffn.ba = RealVector(d_ff);
  p.ffn.Wb = random_gaussian(rng, d_ff, d, 1.0 / std::sqrt(static_cast<double>(d_ff)));
  p.ffn.bb = RealVector(d);
  return p;
}

RealMatrix embed(const RealMatrix& table, const std::vector<std::uint32_t>& ids) {
  RealMatrix X(ids.size(), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table.rows()) {
      throw DomainError("token id " + std::to_string(ids[i]) + " outside vocabulary of " +
                        std::to_string(table.rows()));
    }
    const auto src = table.row(ids[i]);
    std::copy(src.begin(), src.end(), X.row(i).begin());
  }
  return X;
}

RealVector next_token_logits(const std::vector<BlockParams>& blocks, const RealMatrix& E_in,
                             const RealMatrix& E_out, const std::vector<std::uint32_t>& ids) {
  if (ids.empty()) throw DomainError("next_token_logits: empty context");
  require(E_in.cols() == E_out.cols(), "embedding tables disagree on d");
  const RealMatrix Z = run_blocks(embed(E_in, ids), blocks, /*causal=*/true);
  const RealVector h = Z.row_vector(Z.rows() - 1);
  return matvec(E_out, h);
}

std::vector<std::uint32_t> generate(const std::vector<BlockParams>& blocks,
                                    const RealMatrix& E_in, const RealMatrix& E_out,
                                    const std::vector<std::uint32_t>& prompt, double temperature,
                                    std::size_t steps, Rng& rng) {
  if (prompt.empty()) throw DomainError("generate: prompt must be non-empty");
  if (!(temperature > 0.0)) throw DomainError("generate: T must be > 0");
  require(E_in.rows() == E_out.rows(), "generate: E_in and E_out vocabulary sizes differ");
  for (auto id : prompt) {
    if (id >= E_in.rows()) throw DomainError("generate: prompt token outside vocabulary");
  }
  std::vector<std::uint32_t> ids = prompt;
  for (std::size_t s = 0; s < steps; ++s) {
    const auto p = softmax_temperature(next_token_logits(blocks, E_in, E_out, ids), temperature);
    ids.push_back(static_cast<std::uint32_t>(p.sample(rng.uniform())));
  }
  return ids;
}

void save_blocks(const std::filesystem::path& dir, const std::vector<BlockParams>& blocks,
                 std::uint64_t seed) {
  if (blocks.empty()) throw ShapeError("save_blocks: no blocks");
  for (const auto& b : blocks) b.check_shapes();
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json m;
  m["format"] = "lmlab.blocks";
  m["version"] = 1;
  m["d"] = blocks.front().model_dim();
  m["h"] = blocks.front().head_count();
  m["d_k"] = blocks.front().heads.front().WQ.cols();
  m["d_v"] = blocks.front().heads.front().WV.cols();
  m["d_ff"] = blocks.front().ffn_dim();
  m["layers"] = blocks.size();
  m["seed"] = seed;
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const auto& b = blocks[l];
    const auto prefix = "layer" + std::to_string(l) + "_";
    for (std::size_t h = 0; h < b.heads.size(); ++h) {
      const auto hp = prefix + "head" + std::to_string(h) + "_";
      save_binary(dir / (hp + "WQ.bin"), b.heads[h].WQ);
      save_binary(dir / (hp + "WK.bin"), b.heads[h].WK);
      save_binary(dir / (hp + "WV.bin"), b.heads[h].WV);
    }
    save_binary(dir / (prefix + "WO.bin"), b.WO);
    save_binary(dir / (prefix + "ln1_gain.bin"), as_row(b.ln1_gain));
    save_binary(dir / (prefix + "ln1_bias.bin"), as_row(b.ln1_bias));
    save_binary(dir / (prefix + "ln2_gain.bin"), as_row(b.ln2_gain));
    save_binary(dir / (prefix + "ln2_bias.bin"), as_row(b.ln2_bias));
    save_binary(dir / (prefix + "ffn_Wa.bin"), b.ffn.Wa);
    save_binary(dir / (prefix + "ffn_ba.bin"), as_row(b.ffn.ba));
    save_binary(dir / (prefix + "ffn_Wb.bin"), b.ffn.Wb);
    save_binary(dir / (prefix + "ffn_bb.bin"), as_row(b.ffn.bb));
  }
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
}

LoadedStack load_blocks(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw FormatError("missing manifest.json in " + dir.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("block manifest: ") + e.what());
  }
  LoadedStack out;
  try {
    out.manifest.d = m.at("d").get<std::size_t>();
    out.manifest.heads = m.at("h").get<std::size_t>();
    out.manifest.d_ff = m.at("d_ff").get<std::size_t>();
    out.manifest.layers = m.at("layers").get<std::size_t>();
    out.manifest.seed = m.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("block manifest: ") + e.what());
  }
  for (std::size_t l = 0; l < out.manifest.layers; ++l) {
    BlockParams b;
    const auto prefix = "layer" + std::to_string(l) + "_";
    for (std::size_t h = 0; h < out.manifest.heads; ++h) {
      const auto hp = prefix + "head" + std::to_string(h) + "_";
      b.heads.push_back({load_binary(dir / (hp + "WQ.bin")), load_binary(dir / (hp + "WK.bin")),
                         load_binary(dir / (hp + "WV.bin"))});
    }
    b.WO = load_binary(dir / (prefix + "WO.bin"));
    b.ln1_gain = load_row(dir / (prefix + "ln1_gain.bin"));
    b.ln1_bias = load_row(dir / (prefix + "ln1_bias.bin"));
    b.ln2_gain = load_row(dir / (prefix + "ln2_gain.bin"));
    b.ln2_bias = load_row(dir / (prefix + "ln2_bias.bin"));
    b.ffn.Wa = load_binary(dir / (prefix + "ffn_Wa.bin"));
    b.ffn.ba = load_row(dir / (prefix + "ffn_ba.bin"));
    b.ffn.Wb = load_binary(dir / (prefix + "ffn_Wb.bin"));
    b.ffn.bb = load_row(dir / (prefix + "ffn_bb.bin"));
    b.check_shapes();
    if (b.model_dim() != out.manifest.d || b.ffn_dim() != out.manifest.d_ff) {
      throw FormatError("block manifest dims disagree with stored matrices");
    }
    out.blocks.push_back(std::move(b));
  }
  return out;
}

}  // namespace lmlab::attention
