#include "lmlab/contexts.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace lmlab::contexts {
namespace {

constexpr double kUnitStateTolerance = 1e-9;
constexpr double kBornSumTolerance = 1e-10;
constexpr double kSharedTolerance = 1e-12;

template <Scalar T>
double max_orthonormality_error(const std::vector<Vector<T>>& vs) {
  double err = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i; j < vs.size(); ++j) {
      const T g = inner(vs[i], vs[j]);
      err = std::max(err, std::abs(g - T{i == j ? 1.0 : 0.0}));
    }
  }
  return err;
}

bool same_coordinates(const RealVector& a, const RealVector& b) {
  if (a.dim() != b.dim()) return false;
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (std::abs(a[i] - b[i]) > kSharedTolerance) return false;
  return true;
}

}  // namespace

template <Scalar T>
BasicContextBasis<T>::BasicContextBasis(std::string label, std::vector<Vector<T>> vectors,
                                        std::vector<std::string> words, double tol)
    : label_(std::move(label)), vectors_(std::move(vectors)), words_(std::move(words)) {
  if (vectors_.empty()) throw ValidationError("context '" + label_ + "': no vectors");
  const auto d = vectors_.front().dim();
  for (const auto& v : vectors_) {
    if (v.dim() != d) throw ValidationError("context '" + label_ + "': vectors differ in dimension");
  }
  if (vectors_.size() != d) {
    throw ValidationError("context '" + label_ + "': " + std::to_string(vectors_.size()) +
                          " vectors cannot form a complete basis of dimension " +
                          std::to_string(d));
  }
  if (words_.size() != vectors_.size()) {
    throw ValidationError("context '" + label_ + "': need one word label per vector");
  }
  const double err = max_orthonormality_error(vectors_);
  if (!(err <= tol)) {
    throw ValidationError("context '" + label_ + "': not orthonormal (max Gram error " +
                          std::to_string(err) + ")");
  }
}

template <Scalar T>
BasicContextBasis<T> BasicContextBasis<T>::repaired(std::string label,
                                                    const std::vector<Vector<T>>& vectors,
                                                    std::vector<std::string> words,
                                                    std::string& repair_note) {
  repair_note.clear();
  if (vectors.empty()) throw ValidationError("context '" + label + "': no vectors");
  const auto fixed = orthonormalize_rows(Matrix<T>::from_rows(vectors));
  std::vector<Vector<T>> out;
  double moved = 0.0;
  for (std::size_t i = 0; i < fixed.rows(); ++i) {
    out.push_back(fixed.row_vector(i));
    moved = std::max(moved, max_abs_diff(out.back(), vectors[i]));
  }
  if (moved > 0.0) {
    repair_note = "context '" + label + "': Gram-Schmidt repair moved coordinates by up to " +
                  std::to_string(moved);
  }
  return BasicContextBasis(std::move(label), std::move(out), std::move(words));
}

template <Scalar T>
BasicContextBasis<T> BasicContextBasis<T>::standard(std::size_t dim, std::string label,
                                                    std::vector<std::string> words) {
  if (words.empty()) {
    for (std::size_t i = 0; i < dim; ++i) words.push_back("e" + std::to_string(i + 1));
  }
  std::vector<Vector<T>> vs;
  for (std::size_t i = 0; i < dim; ++i) vs.push_back(Vector<T>::basis(dim, i));
  return BasicContextBasis(std::move(label), std::move(vs), std::move(words));
}

template <Scalar T>
std::optional<std::size_t> BasicContextBasis<T>::find(const std::string& word) const {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] == word) return i;
  return std::nullopt;
}

template <Scalar T>
Matrix<T> BasicContextBasis<T>::completeness() const {
  Matrix<T> sum(dim(), dim());
  for (const auto& e : vectors_)
    for (std::size_t r = 0; r < dim(); ++r)
      for (std::size_t c = 0; c < dim(); ++c) sum(r, c) += e[r] * conj_if(e[c]);
  return sum;
}

ComplexContextBasis to_complex(const ContextBasis& basis) {
  std::vector<ComplexVector> vs;
  for (const auto& v : basis.vectors()) vs.push_back(lmlab::to_complex(v));
  return ComplexContextBasis(basis.label(), std::move(vs), basis.words());
}

template <Scalar T>
BasicObservable<T> make_observable(const BasicContextBasis<T>& basis,
                                   const std::vector<double>& eigenvalues) {
  if (eigenvalues.size() != basis.dim()) {
    throw ShapeError("make_observable: " + std::to_string(eigenvalues.size()) +
                     " eigenvalues for a basis of size " + std::to_string(basis.dim()));
  }
  if (!(max_orthonormality_error(basis.vectors()) <= kOrthonormalTolerance)) {
    throw ValidationError("make_observable: basis is not orthonormal");
  }
  const auto d = basis.dim();
  Matrix<T> m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto& e = basis.vector(i);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) m(r, c) += eigenvalues[i] * e[r] * conj_if(e[c]);
  }
  return {basis, eigenvalues, std::move(m)};
}

template <Scalar T>
double commutator_norm(const BasicObservable<T>& a, const BasicObservable<T>& b) {
  if (a.matrix.rows() != b.matrix.rows()) throw ShapeError("commutator_norm: dimension mismatch");
  return frobenius(matmul(a.matrix, b.matrix) - matmul(b.matrix, a.matrix));
}

template <Scalar T>
ProbabilityVector born_probabilities(const Vector<T>& psi, const BasicContextBasis<T>& basis) {
  if (psi.dim() != basis.dim()) throw ShapeError("born_probabilities: dimension mismatch");
  const double n = norm(psi);
  if (std::abs(n - 1.0) > kUnitStateTolerance) {
    throw DomainError("born_probabilities: state norm " + std::to_string(n) + " is not 1");
  }
  std::vector<double> p(basis.dim());
  for (std::size_t i = 0; i < basis.dim(); ++i) p[i] = abs2(inner(basis.vector(i), psi));
  return ProbabilityVector::validated(std::move(p), kBornSumTolerance);
}

ContextBasis rotated_about_z(double angle, std::string label, std::vector<std::string> words) {
  const double c = std::cos(angle), s = std::sin(angle);
  return ContextBasis(std::move(label),
                      {RealVector{c, -s, 0.0}, RealVector{s, c, 0.0}, RealVector{0.0, 0.0, 1.0}},
                      std::move(words));
}

ContextBasis complete_basis(std::string label, const RealVector& anchor,
                            std::vector<std::string> words, Rng& rng) {
  const auto d = anchor.dim();
  if (d == 0) throw ShapeError("complete_basis: empty anchor");
  for (int attempt = 0; attempt < 16; ++attempt) {
    RealMatrix rows(d, d);
    const auto a = normalized(anchor);
    std::copy(a.begin(), a.end(), rows.row(0).begin());
    for (std::size_t r = 1; r < d; ++r)
      for (auto& x : rows.row(r)) x = rng.normal();
    try {
      const auto q = orthonormalize_rows(rows);
      std::vector<RealVector> vs;
      for (std::size_t r = 0; r < d; ++r) vs.push_back(q.row_vector(r));
      vs[0] = a;  // keep the anchor's coordinates bit-exact across contexts
      return ContextBasis(std::move(label), std::move(vs), std::move(words));
    } catch (const ValidationError&) {
      // Degenerate random draw; try again.
    }
  }
  throw ValidationError("complete_basis: could not complete the basis");
}

const ContextBasis& ContextGraph::basis(const std::string& label) const {
  for (const auto& b : bases)
    if (b.label() == label) return b;
  throw ValidationError("unknown context label '" + label + "'");
}

std::vector<SharedVector> discover_shared(const std::vector<ContextBasis>& bases) {
  std::vector<SharedVector> out;
  std::vector<std::vector<bool>> claimed(bases.size());
  for (std::size_t b = 0; b < bases.size(); ++b) claimed[b].assign(bases[b].dim(), false);
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (std::size_t i = 0; i < bases[b].dim(); ++i) {
      if (claimed[b][i]) continue;
      SharedVector rec{bases[b].word(i), {{b, i}}};
      for (std::size_t b2 = b + 1; b2 < bases.size(); ++b2) {
        for (std::size_t j = 0; j < bases[b2].dim(); ++j) {
          if (!claimed[b2][j] && same_coordinates(bases[b].vector(i), bases[b2].vector(j))) {
            rec.members.push_back({b2, j});
            claimed[b2][j] = true;
            break;
          }
        }
      }
      if (rec.members.size() >= 2) out.push_back(std::move(rec));
    }
  }
  return out;
}

ContextGraph make_graph(std::vector<ContextBasis> bases) {
  ContextGraph g;
  g.shared = discover_shared(bases);
  g.bases = std::move(bases);
  return g;
}

ContextGraph bank_graph(Rng& rng) {
  const RealVector bank{1.0, 1.0, 1.0};
  std::vector<ContextBasis> bases;
  bases.push_back(complete_basis("economy", bank, {"bank", "money", "loan"}, rng));
  bases.push_back(complete_basis("river", bank, {"bank", "water", "shore"}, rng));
  bases.push_back(complete_basis("seat", bank, {"bank", "bench", "park"}, rng));
  return make_graph(std::move(bases));
}

IntertwineReport intertwine_check(const ContextGraph& graph) {
  if (graph.bases.empty()) throw ValidationError("intertwine_check: empty graph");
  IntertwineReport r;
  r.dimension = graph.dim();
  for (const auto& b : graph.bases) {
    if (b.dim() != r.dimension) throw ValidationError("intertwine_check: bases differ in dimension");
  }
  for (const auto& rec : graph.shared) {
    if (rec.members.empty()) throw ValidationError("shared vector '" + rec.id + "' has no members");
    const auto& first = rec.members.front();
    for (const auto& m : rec.members) {
      if (m.basis >= graph.bases.size() || m.position >= graph.bases[m.basis].dim()) {
        throw ValidationError("shared vector '" + rec.id + "': membership out of range");
      }
      if (!same_coordinates(graph.bases[first.basis].vector(first.position),
                            graph.bases[m.basis].vector(m.position))) {
        throw ValidationError("shared vector '" + rec.id + "' differs in context '" +
                              graph.bases[m.basis].label() + "'");
      }
    }
    std::vector<std::size_t> distinct;
    for (const auto& m : rec.members)
      if (std::find(distinct.begin(), distinct.end(), m.basis) == distinct.end())
        distinct.push_back(m.basis);
    r.multiplicities.emplace_back(rec.id, distinct.size());
    r.max_multiplicity = std::max(r.max_multiplicity, distinct.size());
    if (distinct.size() >= 2) r.nontrivial = true;
  }
  r.shared_count = graph.shared.size();
  r.dimension_ok = !r.nontrivial || r.dimension >= 3;
  return r;
}

Disambiguation disambiguate(const RealVector& token, const ContextGraph& graph,
                            const std::string& context_label) {
  const auto& basis = graph.basis(context_label);
  Disambiguation d;
  d.probabilities = born_probabilities(token, basis);
  d.index = d.probabilities.argmax();
  d.word = basis.word(d.index);
  return d;
}

void write_graph(std::ostream& os, const ContextGraph& graph) {
  nlohmann::ordered_json j;
  j["format"] = "lmlab.contexts";
  j["version"] = 1;
  j["dimension"] = graph.dim();
  j["bases"] = nlohmann::ordered_json::array();
  for (const auto& b : graph.bases) {
    nlohmann::ordered_json jb;
    jb["label"] = b.label();
    jb["words"] = b.words();
    jb["vectors"] = nlohmann::ordered_json::array();
    for (const auto& v : b.vectors()) jb["vectors"].push_back(v.values());
    j["bases"].push_back(std::move(jb));
  }
  j["shared"] = nlohmann::ordered_json::array();
  for (const auto& s : graph.shared) {
    nlohmann::ordered_json js;
    js["id"] = s.id;
    js["members"] = nlohmann::ordered_json::array();
    for (const auto& m : s.members) {
      js["members"].push_back({{"basis", graph.bases.at(m.basis).label()}, {"position", m.position}});
    }
    j["shared"].push_back(std::move(js));
  }
  os << j.dump(2) << '\n';
}

ContextGraph read_graph(std::istream& is) {
  ContextGraph g;
  try {
    const auto j = nlohmann::json::parse(is);
    if (j.at("version").get<int>() != 1) throw FormatError("contexts: unsupported version");
    for (const auto& jb : j.at("bases")) {
      std::vector<RealVector> vs;
      for (const auto& jv : jb.at("vectors")) vs.emplace_back(jv.get<std::vector<double>>());
      g.bases.emplace_back(jb.at("label").get<std::string>(), std::move(vs),
                           jb.at("words").get<std::vector<std::string>>());
    }
    if (j.contains("shared")) {
      for (const auto& js : j.at("shared")) {
        SharedVector s;
        s.id = js.at("id").get<std::string>();
        for (const auto& jm : js.at("members")) {
          const auto label = jm.at("basis").get<std::string>();
          std::size_t idx = g.bases.size();
          for (std::size_t b = 0; b < g.bases.size(); ++b)
            if (g.bases[b].label() == label) idx = b;
          if (idx == g.bases.size()) throw FormatError("contexts: unknown basis '" + label + "'");
          s.members.push_back({idx, jm.at("position").get<std::size_t>()});
        }
        g.shared.push_back(std::move(s));
      }
    }
    if (j.contains("dimension") && !g.bases.empty() &&
        j.at("dimension").get<std::size_t>() != g.dim()) {
      throw FormatError("contexts: declared dimension disagrees with the bases");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("contexts file: ") + e.what());
  }
  return g;
}

void save_graph(const std::filesystem::path& path, const ContextGraph& graph) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path.string());
  write_graph(os, graph);
}

ContextGraph load_graph(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path.string());
  return read_graph(is);
}

template class BasicContextBasis<double>;
template class BasicContextBasis<cplx>;
template BasicObservable<double> make_observable(const BasicContextBasis<double>&,
                                                 const std::vector<double>&);
template BasicObservable<cplx> make_observable(const BasicContextBasis<cplx>&,
                                               const std::vector<double>&);
template double commutator_norm(const BasicObservable<double>&, const BasicObservable<double>&);
template double commutator_norm(const BasicObservable<cplx>&, const BasicObservable<cplx>&);
template ProbabilityVector born_probabilities(const RealVector&, const ContextBasis&);
template ProbabilityVector born_probabilities(const ComplexVector&, const ComplexContextBasis&);

}  // namespace lmlab::contexts
