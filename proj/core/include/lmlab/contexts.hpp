#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lmlab/activations.hpp"
#include "lmlab/numkit.hpp"

namespace lmlab::contexts {

inline constexpr double kOrthonormalTolerance = 1e-12;

/// A measurement context: a complete orthonormal basis with one word label per vector.
/// Validated on construction; immutable afterwards.
template <Scalar T>
class BasicContextBasis {
 public:
  BasicContextBasis() = default;

  /// Throws ValidationError unless the vectors are orthonormal within `tol`,
  /// their count equals the dimension, and there is one word per vector.
  BasicContextBasis(std::string label, std::vector<Vector<T>> vectors,
                    std::vector<std::string> words, double tol = kOrthonormalTolerance);

  /// Gram-Schmidt repair of a near-basis. `repair_note` receives a description of
  /// the largest correction applied (empty when none was needed).
  static BasicContextBasis repaired(std::string label, const std::vector<Vector<T>>& vectors,
                                    std::vector<std::string> words, std::string& repair_note);

  /// e_1..e_d labelled "e1".."ed" unless words are given.
  static BasicContextBasis standard(std::size_t dim, std::string label = "standard",
                                    std::vector<std::string> words = {});

  const std::string& label() const { return label_; }
  std::size_t dim() const { return vectors_.size(); }
  const Vector<T>& vector(std::size_t i) const { return vectors_.at(i); }
  const std::vector<Vector<T>>& vectors() const { return vectors_; }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  const std::vector<std::string>& words() const { return words_; }
  std::optional<std::size_t> find(const std::string& word) const;

  /// Sum_i e_i e_i^dagger; the identity for a valid basis.
  Matrix<T> completeness() const;

 private:
  std::string label_;
  std::vector<Vector<T>> vectors_;
  std::vector<std::string> words_;
};

using ContextBasis = BasicContextBasis<double>;
using ComplexContextBasis = BasicContextBasis<cplx>;

ComplexContextBasis to_complex(const ContextBasis& basis);

/// Maximal observable sum_i lambda_i e_i e_i^dagger.
template <Scalar T>
struct BasicObservable {
  BasicContextBasis<T> basis;
  std::vector<double> eigenvalues;
  Matrix<T> matrix;
};

using Observable = BasicObservable<double>;

template <Scalar T>
BasicObservable<T> make_observable(const BasicContextBasis<T>& basis,
                                   const std::vector<double>& eigenvalues);

/// Frobenius norm of AB - BA.
template <Scalar T>
double commutator_norm(const BasicObservable<T>& a, const BasicObservable<T>& b);

/// Born rule p(i) = |e_i^dagger psi|^2. psi must have unit norm within 1e-9.
template <Scalar T>
ProbabilityVector born_probabilities(const Vector<T>& psi, const BasicContextBasis<T>& basis);

/// Standard basis of R^3 with e_1, e_2 rotated by `angle` clockwise about e_3:
/// f_1 = (cos, -sin, 0), f_2 = (sin, cos, 0), f_3 = e_3.
ContextBasis rotated_about_z(double angle, std::string label = "f",
                             std::vector<std::string> words = {"f1", "f2", "f3"});

/// Orthonormal basis whose first vector is `anchor` (normalized), completed by
/// Gram-Schmidt on random Gaussian directions.
ContextBasis complete_basis(std::string label, const RealVector& anchor,
                            std::vector<std::string> words, Rng& rng);

struct Membership {
  std::size_t basis = 0;
  std::size_t position = 0;
};

struct SharedVector {
  std::string id;
  std::vector<Membership> members;
};

/// Bases plus records of vectors that belong to several of them.
struct ContextGraph {
  std::vector<ContextBasis> bases;
  std::vector<SharedVector> shared;

  std::size_t dim() const { return bases.empty() ? 0 : bases.front().dim(); }
  const ContextBasis& basis(const std::string& label) const;
};

/// Three contexts of R^3 ("economy", "river", "seat") that all contain the
/// word vector v(bank) = (1, 1, 1) / sqrt(3), each completed at random.
ContextGraph bank_graph(Rng& rng);

/// Finds vectors that appear (coordinates within 1e-12) in two or more bases.
std::vector<SharedVector> discover_shared(const std::vector<ContextBasis>& bases);

/// Graph over `bases` with shared records from discover_shared().
ContextGraph make_graph(std::vector<ContextBasis> bases);

struct IntertwineReport {
  std::size_t dimension = 0;
  std::size_t shared_count = 0;
  std::size_t max_multiplicity = 0;
  bool nontrivial = false;     // some vector sits in two distinct bases
  bool dimension_ok = true;    // nontrivial intertwining requires dimension >= 3
  std::vector<std::pair<std::string, std::size_t>> multiplicities;
};

/// Verifies every shared record: each member position exists and holds the
/// same coordinates within 1e-12. Throws ValidationError on a mismatch.
IntertwineReport intertwine_check(const ContextGraph& graph);

struct Disambiguation {
  std::string word;
  std::size_t index = 0;
  ProbabilityVector probabilities;
};

/// Born distribution of `token` in the named context and its most likely word.
Disambiguation disambiguate(const RealVector& token, const ContextGraph& graph,
                            const std::string& context_label);

// JSON file: {"format":"lmlab.contexts","version":1,"dimension":d,
//   "bases":[{"label":..,"words":[..],"vectors":[[..],..]}],
//   "shared":[{"id":..,"members":[{"basis":label,"position":i}]}]}
void write_graph(std::ostream& os, const ContextGraph& graph);
ContextGraph read_graph(std::istream& is);
void save_graph(const std::filesystem::path& path, const ContextGraph& graph);
ContextGraph load_graph(const std::filesystem::path& path);

}  // namespace lmlab::contexts
