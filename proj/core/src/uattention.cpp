#include "lmlab/uattention.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "lmlab/activations.hpp"

namespace lmlab::uattention {
namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void apply_inplace(const UnitaryOp& op, ComplexVector& v) {
  std::visit(overloaded{
                 [&](const PlaneRotation& r) {
                   const double c = std::cos(r.angle), s = std::sin(r.angle);
                   const cplx e = std::polar(1.0, r.phase);
                   const cplx vi = v[r.i], vj = v[r.j];
                   v[r.i] = c * vi + std::conj(e) * s * vj;
                   v[r.j] = -e * s * vi + c * vj;
                 },
                 [&](const Permutation& p) {
                   ComplexVector out(v.dim());
                   for (std::size_t k = 0; k < p.mapping.size(); ++k) out[p.mapping[k]] = v[k];
                   v = std::move(out);
                 },
                 [&](const Composition& c) {
                   for (const auto& part : c.parts) apply_inplace(part, v);
                 },
             },
             op.kind());
}

nlohmann::ordered_json op_to_json(const UnitaryOp& op) {
  return std::visit(
      overloaded{
          [](const PlaneRotation& r) -> nlohmann::ordered_json {
            return {{"type", "rotation"}, {"i", r.i}, {"j", r.j}, {"angle", r.angle},
                    {"phase", r.phase}};
          },
          [](const Permutation& p) -> nlohmann::ordered_json {
            return {{"type", "permutation"}, {"mapping", p.mapping}};
          },
          [](const Composition& c) -> nlohmann::ordered_json {
            nlohmann::ordered_json parts = nlohmann::ordered_json::array();
            for (const auto& part : c.parts) parts.push_back(op_to_json(part));
            return {{"type", "composition"}, {"parts", parts}};
          },
      },
      op.kind());
}

UnitaryOp op_from_json(const nlohmann::json& j, std::size_t dim) {
  const auto type = j.at("type").get<std::string>();
  if (type == "rotation") {
    return UnitaryOp::rotation(dim, j.at("i").get<std::size_t>(), j.at("j").get<std::size_t>(),
                               j.at("angle").get<double>(), j.value("phase", 0.0));
  }
  if (type == "permutation") {
    auto mapping = j.at("mapping").get<std::vector<std::size_t>>();
    if (mapping.size() != dim) throw ValidationError("permutation length differs from dim");
    return UnitaryOp::permutation(std::move(mapping));
  }
  if (type == "composition") {
    std::vector<UnitaryOp> parts;
    for (const auto& p : j.at("parts")) parts.push_back(op_from_json(p, dim));
    return UnitaryOp::compose(dim, std::move(parts));
  }
  throw FormatError("circuit: unknown stage type '" + type + "'");
}

contexts::ComplexContextBasis inline_basis(const nlohmann::json& j) {
  std::vector<ComplexVector> vs;
  for (const auto& jv : j.at("vectors")) {
    ComplexVector v(jv.size());
    for (std::size_t i = 0; i < jv.size(); ++i) {
      if (jv[i].is_array()) v[i] = cplx(jv[i].at(0).get<double>(), jv[i].at(1).get<double>());
      else v[i] = jv[i].get<double>();
    }
    vs.push_back(std::move(v));
  }
  return contexts::ComplexContextBasis(j.at("label").get<std::string>(), std::move(vs),
                                       j.at("words").get<std::vector<std::string>>());
}

}  // namespace

StateVector::StateVector(ComplexVector amplitudes, double tol) : amps_(std::move(amplitudes)) {
  if (amps_.empty()) throw ShapeError("state vector must have dimension >= 1");
  const double n = norm(amps_);
  if (std::abs(n - 1.0) > tol) {
    throw DomainError("state vector norm " + std::to_string(n) + " is not 1");
  }
}

StateVector StateVector::basis(std::size_t dim, std::size_t k) {
  if (k >= dim) throw ShapeError("basis state index out of range");
  return StateVector(ComplexVector::basis(dim, k));
}

StateVector StateVector::from_real(const RealVector& v, double tol) {
  return StateVector(lmlab::to_complex(v), tol);
}

UnitaryOp::UnitaryOp(std::size_t dim, Kind kind) : dim_(dim), kind_(std::move(kind)) {
  if (dim_ == 0) throw ValidationError("unitary: dim must be >= 1");
  std::visit(overloaded{
                 [&](const PlaneRotation& r) {
                   if (r.i >= dim_ || r.j >= dim_ || r.i == r.j) {
                     throw ValidationError("rotation plane (" + std::to_string(r.i) + ", " +
                                           std::to_string(r.j) + ") invalid for dim " +
                                           std::to_string(dim_));
                   }
                 },
                 [&](const Permutation& p) {
                   if (p.mapping.size() != dim_) {
                     throw ValidationError("permutation length differs from dim");
                   }
                   std::vector<bool> seen(dim_, false);
                   for (auto m : p.mapping) {
                     if (m >= dim_ || seen[m]) throw ValidationError("mapping is not a bijection");
                     seen[m] = true;
                   }
                 },
                 [&](const Composition& c) {
                   for (const auto& part : c.parts)
                     if (part.dim() != dim_) throw ValidationError("composition parts differ in dim");
                 },
             },
             kind_);
}

UnitaryOp UnitaryOp::identity(std::size_t dim) { return UnitaryOp(dim, Composition{}); }

UnitaryOp UnitaryOp::rotation(std::size_t dim, std::size_t i, std::size_t j, double angle,
                              double phase) {
  return UnitaryOp(dim, PlaneRotation{i, j, angle, phase});
}

UnitaryOp UnitaryOp::permutation(std::vector<std::size_t> mapping) {
  const auto n = mapping.size();
  return UnitaryOp(n, Permutation{std::move(mapping)});
}

UnitaryOp UnitaryOp::compose(std::size_t dim, std::vector<UnitaryOp> parts) {
  return UnitaryOp(dim, Composition{std::move(parts)});
}

bool UnitaryOp::is_real() const {
  return std::visit(overloaded{
                        [](const PlaneRotation& r) { return r.phase == 0.0; },
                        [](const Permutation&) { return true; },
                        [](const Composition& c) {
                          for (const auto& p : c.parts)
                            if (!p.is_real()) return false;
                          return true;
                        },
                    },
                    kind_);
}

UnitaryOp UnitaryOp::inverse() const {
  return std::visit(overloaded{
                        [&](const PlaneRotation& r) {
                          return rotation(dim_, r.i, r.j, -r.angle, r.phase);
                        },
                        [&](const Permutation& p) {
                          std::vector<std::size_t> inv(p.mapping.size());
                          for (std::size_t k = 0; k < p.mapping.size(); ++k) inv[p.mapping[k]] = k;
                          return permutation(std::move(inv));
                        },
                        [&](const Composition& c) {
                          std::vector<UnitaryOp> parts;
                          for (auto it = c.parts.rbegin(); it != c.parts.rend(); ++it)
                            parts.push_back(it->inverse());
                          return compose(dim_, std::move(parts));
                        },
                    },
                    kind_);
}

ComplexMatrix UnitaryOp::dense() const {
  ComplexMatrix U(dim_, dim_);
  for (std::size_t c = 0; c < dim_; ++c) {
    auto col = ComplexVector::basis(dim_, c);
    apply_inplace(*this, col);
    for (std::size_t r = 0; r < dim_; ++r) U(r, c) = col[r];
  }
  return U;
}

StateVector apply(const UnitaryOp& op, const StateVector& psi) {
  if (op.dim() != psi.dim()) throw ShapeError("apply: dimension mismatch");
  ComplexVector v = psi.amplitudes();
  apply_inplace(op, v);
  return StateVector(std::move(v));
}

RealVector apply_real(const UnitaryOp& op, const RealVector& x) {
  if (!op.is_real()) throw ValidationError("apply_real: operator has complex phases");
  if (op.dim() != x.dim()) throw ShapeError("apply_real: dimension mismatch");
  ComplexVector v = lmlab::to_complex(x);
  apply_inplace(op, v);
  RealVector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = v[i].real();
  return out;
}

StateVector apply_dense(const ComplexMatrix& U, const StateVector& psi) {
  if (U.rows() != U.cols() || U.cols() != psi.dim()) throw ShapeError("apply_dense: shape mismatch");
  const auto gram = matmul(adjoint(U), U);
  if (max_abs_diff(gram, ComplexMatrix::identity(U.rows())) > kUnitaryTolerance) {
    throw ValidationError("apply_dense: matrix is not unitary");
  }
  return StateVector(matvec(U, psi.amplitudes()));
}

double overlap_probability(const StateVector& phi, const StateVector& psi) {
  if (phi.dim() != psi.dim()) throw ShapeError("overlap_probability: dimension mismatch");
  return abs2(inner(phi.amplitudes(), psi.amplitudes()));
}

Measurement measure(const StateVector& psi, const contexts::ComplexContextBasis& basis, Rng& rng) {
  const auto p = contexts::born_probabilities(psi.amplitudes(), basis);
  const auto k = p.sample(rng.uniform());
  ComplexVector e = basis.vector(k);
  for (std::size_t i = 0; i < e.dim(); ++i) {
    if (std::abs(e[i]) > 0.0) {
      const cplx fix = std::conj(e[i]) / std::abs(e[i]);
      for (auto& x : e) x *= fix;
      e[i] = std::abs(e[i]);
      break;
    }
  }
  return {k, StateVector(std::move(e))};
}

std::size_t quantum_attention_step(const StateVector& token_state, const UnitaryOp& U,
                                   const contexts::ComplexContextBasis& output_basis, Rng& rng) {
  return measure(apply(U, token_state), output_basis, rng).outcome;
}

std::vector<double> classicality_bridge(const RealVector& logits, double temperature,
                                        const RealVector& phases) {
  const auto a = amplitudes_from_logits(logits, temperature, phases);
  std::vector<double> p(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) p[i] = abs2(a[i]);
  return p;
}

Pipeline::Pipeline(std::vector<UnitaryOp> stages, contexts::ComplexContextBasis output_basis)
    : stages_(std::move(stages)), output_(std::move(output_basis)) {
  for (const auto& s : stages_)
    if (s.dim() != output_.dim()) throw ShapeError("pipeline: stage dimension differs from basis");
}

UnitaryOp Pipeline::evolution() const { return UnitaryOp::compose(dim(), stages_); }

StateVector Pipeline::evolve(const StateVector& psi) const {
  StateVector phi = psi;
  for (const auto& s : stages_) phi = apply(s, phi);
  return phi;
}

std::vector<double> Pipeline::outcome_probabilities(const StateVector& psi) const {
  const auto p = contexts::born_probabilities(evolve(psi).amplitudes(), output_);
  return {p.begin(), p.end()};
}

Measurement Pipeline::run(const StateVector& psi, Rng& rng) const {
  return measure(evolve(psi), output_, rng);
}

Pipeline read_circuit(std::istream& is, const std::filesystem::path& base_dir) {
  try {
    const auto j = nlohmann::json::parse(is);
    if (j.at("version").get<int>() != 1) throw FormatError("circuit: unsupported version");
    const auto dim = j.at("dim").get<std::size_t>();
    std::vector<UnitaryOp> stages;
    for (const auto& s : j.at("stages")) stages.push_back(op_from_json(s, dim));

    const auto& out = j.at("output_basis");
    if (out.is_string()) {
      if (out.get<std::string>() != "standard") {
        throw FormatError("circuit: output_basis string must be \"standard\"");
      }
      return Pipeline(std::move(stages), contexts::ComplexContextBasis::standard(dim));
    }
    if (out.contains("graph")) {
      auto path = std::filesystem::path(out.at("graph").get<std::string>());
      if (path.is_relative()) path = base_dir / path;
      const auto graph = contexts::load_graph(path);
      return Pipeline(std::move(stages),
                      contexts::to_complex(graph.basis(out.at("label").get<std::string>())));
    }
    return Pipeline(std::move(stages), inline_basis(out));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("circuit file: ") + e.what());
  }
}

Pipeline load_circuit(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path.string());
  return read_circuit(is, path.parent_path());
}

void write_circuit(std::ostream& os, const Pipeline& pipeline) {
  nlohmann::ordered_json j;
  j["format"] = "lmlab.circuit";
  j["version"] = 1;
  j["dim"] = pipeline.dim();
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : pipeline.stages()) j["stages"].push_back(op_to_json(s));
  nlohmann::ordered_json basis;
  basis["label"] = pipeline.output_basis().label();
  basis["words"] = pipeline.output_basis().words();
  basis["vectors"] = nlohmann::ordered_json::array();
  for (const auto& v : pipeline.output_basis().vectors()) {
    nlohmann::ordered_json jv = nlohmann::ordered_json::array();
    for (const auto& x : v) jv.push_back({x.real(), x.imag()});
    basis["vectors"].push_back(std::move(jv));
  }
  j["output_basis"] = std::move(basis);
  os << j.dump(2) << '\n';
}

}  // namespace lmlab::uattention
