#include "lmlab/micrograd.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "lmlab/activations.hpp"
#include "lmlab/matrix_io.hpp"

namespace lmlab::micrograd {
namespace {

void check_target(int y) {
  if (y != 0 && y != 1) throw DomainError("target y must be 0 or 1");
}

RealMatrix as_row(const RealVector& v) {
  return RealMatrix(1, v.dim(), std::vector<double>(v.begin(), v.end()));
}

RealVector row_as_vector(const RealMatrix& m) {
  if (m.rows() != 1) throw FormatError("expected a 1-row matrix");
  return m.row_vector(0);
}

// Visits every scalar parameter in a fixed order: E, W1, b1, W2, b2.
void for_each_param(Params& p, const std::function<void(double&)>& fn) {
  for (auto& x : p.E.data()) fn(x);
  for (auto& x : p.W1.data()) fn(x);
  for (auto& x : p.b1) fn(x);
  for (auto& x : p.W2.data()) fn(x);
  fn(p.b2);
}

void for_each_grad(const Gradients& g, const std::function<void(double)>& fn) {
  for (auto x : g.dE.data()) fn(x);
  for (auto x : g.dW1.data()) fn(x);
  for (auto x : g.db1) fn(x);
  for (auto x : g.dW2.data()) fn(x);
  fn(g.db2);
}

Gradients zero_grads(const Params& p) {
  Gradients g;
  g.dE = RealMatrix(p.vocab(), p.embed_dim());
  g.dW1 = RealMatrix(p.hidden(), p.embed_dim());
  g.db1 = RealVector(p.hidden());
  g.dW2 = RealMatrix(1, p.hidden());
  return g;
}

}  // namespace

Params Params::zeros(std::size_t vocab, std::size_t embed_dim, std::size_t hidden) {
  Params p;
  p.E = RealMatrix(vocab, embed_dim);
  p.W1 = RealMatrix(hidden, embed_dim);
  p.b1 = RealVector(hidden);
  p.W2 = RealMatrix(1, hidden);
  p.b2 = 0.0;
  return p;
}

Params Params::random(Rng& rng, std::size_t vocab, std::size_t embed_dim, std::size_t hidden) {
  Params p = zeros(vocab, embed_dim, hidden);
  for_each_param(p, [&](double& x) { x = rng.uniform(-0.5, 0.5); });
  return p;
}

void Params::check_shapes() const {
  const auto V = vocab(), d = embed_dim(), h = hidden();
  if (V == 0 || d == 0 || h == 0) throw ShapeError("micronet: V, d, h must be >= 1");
  if (W1.cols() != d || b1.dim() != h || W2.rows() != 1 || W2.cols() != h) {
    throw ShapeError("micronet: inconsistent parameter shapes");
  }
}

ForwardTrace forward(const Params& params, std::size_t k) {
  params.check_shapes();
  if (k >= params.vocab()) {
    throw DomainError("token index " + std::to_string(k) + " out of range for V=" +
                      std::to_string(params.vocab()));
  }
  ForwardTrace t;
  t.k = k;
  t.v_k = params.E.row_vector(k);
  t.z2 = matvec(params.W1, t.v_k) + params.b1;
  t.a2 = RealVector(t.z2.dim());
  for (std::size_t j = 0; j < t.z2.dim(); ++j) t.a2[j] = sigmoid(t.z2[j]);
  t.z3 = matvec(params.W2, t.a2)[0] + params.b2;
  t.yhat = sigmoid(t.z3);
  return t;
}

double loss(double yhat, int y) {
  check_target(y);
  const double r = yhat - y;
  return 0.5 * r * r;
}

Gradients backward(const Params& params, const ForwardTrace& trace, int y) {
  check_target(y);
  params.check_shapes();
  const auto h = params.hidden();
  const auto d = params.embed_dim();
  if (trace.k >= params.vocab() || trace.v_k.dim() != d || trace.z2.dim() != h ||
      trace.a2.dim() != h) {
    throw ShapeError("backward: trace does not match parameter shapes");
  }

  Gradients g = zero_grads(params);
  const double delta3 = (trace.yhat - y) * trace.yhat * (1.0 - trace.yhat);

  for (std::size_t j = 0; j < h; ++j) g.dW2(0, j) = delta3 * trace.a2[j];
  g.db2 = delta3;

  RealVector delta2(h);
  for (std::size_t j = 0; j < h; ++j) {
    delta2[j] = params.W2(0, j) * delta3 * sigmoid_prime(trace.z2[j]);
  }
  for (std::size_t j = 0; j < h; ++j) {
    for (std::size_t i = 0; i < d; ++i) g.dW1(j, i) = delta2[j] * trace.v_k[i];
    g.db1[j] = delta2[j];
  }

  // dL/dv_k = W1^T delta2, scattered into row k only.
  auto row = g.dE.row(trace.k);
  for (std::size_t i = 0; i < d; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < h; ++j) acc += params.W1(j, i) * delta2[j];
    row[i] = acc;
  }
  return g;
}

Gradients finite_difference_grads(const Params& params, std::size_t k, int y, double eps) {
  if (!(eps > 0.0)) throw DomainError("finite_difference_grads: eps must be > 0");
  check_target(y);
  Params work = params;
  std::vector<double> numeric;
  for_each_param(work, [&](double& x) {
    const double saved = x;
    x = saved + eps;
    const double up = loss(forward(work, k).yhat, y);
    x = saved - eps;
    const double down = loss(forward(work, k).yhat, y);
    x = saved;
    numeric.push_back((up - down) / (2.0 * eps));
  });

  Gradients g = zero_grads(params);
  std::size_t i = 0;
  for (auto& x : g.dE.data()) x = numeric[i++];
  for (auto& x : g.dW1.data()) x = numeric[i++];
  for (auto& x : g.db1) x = numeric[i++];
  for (auto& x : g.dW2.data()) x = numeric[i++];
  g.db2 = numeric[i++];
  return g;
}

Params sgd_step(const Params& params, const Gradients& grads, double lr) {
  if (!(lr > 0.0)) throw DomainError("sgd_step: lr must be > 0");
  params.check_shapes();
  Params next = params;
  std::vector<double> flat;
  for_each_grad(grads, [&](double x) { flat.push_back(x); });
  std::size_t count = 0;
  for_each_param(next, [&](double&) { ++count; });
  if (flat.size() != count) throw ShapeError("sgd_step: gradient shape mismatch");
  std::size_t i = 0;
  for_each_param(next, [&](double& x) { x -= lr * flat[i++]; });
  return next;
}

GradCheck compare(const Gradients& analytic, const Gradients& numeric) {
  std::vector<double> a, n;
  for_each_grad(analytic, [&](double x) { a.push_back(x); });
  for_each_grad(numeric, [&](double x) { n.push_back(x); });
  if (a.size() != n.size()) throw ShapeError("compare: gradient shape mismatch");
  GradCheck r;
  r.parameters = a.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::abs(a[i] - n[i]);
    r.max_abs_error = std::max(r.max_abs_error, diff);
    r.max_rel_error = std::max(r.max_rel_error, diff / (std::abs(a[i]) + 1e-8));
  }
  return r;
}

void save(const std::filesystem::path& dir, const Params& params, std::uint64_t seed) {
  params.check_shapes();
  std::filesystem::create_directories(dir);
  save_binary(dir / "E.bin", params.E);
  save_binary(dir / "W1.bin", params.W1);
  save_binary(dir / "b1.bin", as_row(params.b1));
  save_binary(dir / "W2.bin", params.W2);
  save_binary(dir / "b2.bin", RealMatrix(1, 1, {params.b2}));
  nlohmann::ordered_json m;
  m["format"] = "lmlab.micronet";
  m["version"] = 1;
  m["V"] = params.vocab();
  m["d"] = params.embed_dim();
  m["h"] = params.hidden();
  m["seed"] = seed;
  m["files"] = {{"E", "E.bin"}, {"W1", "W1.bin"}, {"b1", "b1.bin"}, {"W2", "W2.bin"}, {"b2", "b2.bin"}};
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
}

Loaded load(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw FormatError("missing manifest.json in " + dir.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("micronet manifest: ") + e.what());
  }
  Loaded out;
  out.params.E = load_binary(dir / "E.bin");
  out.params.W1 = load_binary(dir / "W1.bin");
  out.params.b1 = row_as_vector(load_binary(dir / "b1.bin"));
  out.params.W2 = load_binary(dir / "W2.bin");
  const auto b2 = load_binary(dir / "b2.bin");
  if (b2.size() != 1) throw FormatError("b2.bin must hold one value");
  out.params.b2 = b2.data()[0];
  out.params.check_shapes();
  if (m.at("V").get<std::size_t>() != out.params.vocab() ||
      m.at("d").get<std::size_t>() != out.params.embed_dim() ||
      m.at("h").get<std::size_t>() != out.params.hidden()) {
    throw FormatError("micronet manifest dims disagree with stored matrices");
  }
  out.seed = m.at("seed").get<std::uint64_t>();
  return out;
}

}  // namespace lmlab::micrograd
