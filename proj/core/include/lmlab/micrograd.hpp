#pragma once

#include <cstdint>
#include <filesystem>

#include "lmlab/numkit.hpp"

namespace lmlab::micrograd {

/// One-hidden-layer scalar-output network over token embeddings:
///   z2 = W1 v_k + b1,  a2 = sigmoid(z2),  z3 = W2 a2 + b2,  yhat = sigmoid(z3)
/// where v_k is row k of the embedding matrix E.
struct Params {
  RealMatrix E;   // V x d
  RealMatrix W1;  // h x d
  RealVector b1;  // h
  RealMatrix W2;  // 1 x h
  double b2 = 0.0;

  std::size_t vocab() const { return E.rows(); }
  std::size_t embed_dim() const { return E.cols(); }
  std::size_t hidden() const { return W1.rows(); }

  static Params zeros(std::size_t vocab, std::size_t embed_dim, std::size_t hidden);

  /// Every parameter drawn uniform(-0.5, 0.5).
  static Params random(Rng& rng, std::size_t vocab, std::size_t embed_dim, std::size_t hidden);

  /// Throws ShapeError unless all shapes agree with (V, d, h).
  void check_shapes() const;

  bool operator==(const Params&) const = default;
};

struct ForwardTrace {
  std::size_t k = 0;
  RealVector v_k;
  RealVector z2;
  RealVector a2;
  double z3 = 0.0;
  double yhat = 0.5;
};

/// Same layout as Params; dE is zero outside row k.
struct Gradients {
  RealMatrix dE;
  RealMatrix dW1;
  RealVector db1;
  RealMatrix dW2;
  double db2 = 0.0;
};

ForwardTrace forward(const Params& params, std::size_t k);

/// 0.5 * (yhat - y)^2, y in {0, 1}.
double loss(double yhat, int y);

/// Closed-form gradients from the output error signal
/// delta3 = (yhat - y) yhat (1 - yhat) propagated back to the embedding row.
Gradients backward(const Params& params, const ForwardTrace& trace, int y);

inline constexpr double kDefaultFdEpsilon = 1e-5;

/// Central differences (L(theta + eps) - L(theta - eps)) / (2 eps), one parameter at a time.
Gradients finite_difference_grads(const Params& params, std::size_t k, int y,
                                  double eps = kDefaultFdEpsilon);

/// theta <- theta - lr * grad.
Params sgd_step(const Params& params, const Gradients& grads, double lr);

struct GradCheck {
  double max_rel_error = 0.0;  // max |analytic - fd| / (|analytic| + 1e-8)
  double max_abs_error = 0.0;
  std::size_t parameters = 0;
};

GradCheck compare(const Gradients& analytic, const Gradients& numeric);

/// Writes E.bin, W1.bin, b1.bin, W2.bin, b2.bin (numkit binary format) plus
/// manifest.json holding V, d, h and the seed.
void save(const std::filesystem::path& dir, const Params& params, std::uint64_t seed);

struct Loaded {
  Params params;
  std::uint64_t seed = 0;
};
Loaded load(const std::filesystem::path& dir);

}  // namespace lmlab::micrograd
