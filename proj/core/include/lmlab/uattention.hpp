#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>
#include <vector>

#include "lmlab/contexts.hpp"
#include "lmlab/numkit.hpp"

namespace lmlab::uattention {

inline constexpr double kUnitTolerance = 1e-10;
inline constexpr double kUnitaryTolerance = 1e-12;

/// Unit-norm complex state. Construction checks the norm.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(ComplexVector amplitudes, double tol = kUnitTolerance);

  static StateVector basis(std::size_t dim, std::size_t k);
  static StateVector from_real(const RealVector& v, double tol = kUnitTolerance);

  std::size_t dim() const { return amps_.dim(); }
  const ComplexVector& amplitudes() const { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }

 private:
  ComplexVector amps_;
};

/// Givens rotation in the (i, j) plane:
///   e_i -> cos(a) e_i - e^{i phase} sin(a) e_j,   e_j -> e^{-i phase} sin(a) e_i + cos(a) e_j.
/// With phase 0 this is the real clockwise rotation by `angle`.
struct PlaneRotation {
  std::size_t i = 0;
  std::size_t j = 1;
  double angle = 0.0;
  double phase = 0.0;
};

/// Basis permutation e_k -> e_{mapping[k]}.
struct Permutation {
  std::vector<std::size_t> mapping;
};

class UnitaryOp;

/// Applied in order: parts[0] first.
struct Composition {
  std::vector<UnitaryOp> parts;
};

/// Reversible, norm-preserving evolution built only from plane rotations,
/// permutations and their compositions.
class UnitaryOp {
 public:
  using Kind = std::variant<PlaneRotation, Permutation, Composition>;

  /// Throws ValidationError for out-of-range indices, i == j, or a mapping that
  /// is not a bijection on 0..dim-1.
  UnitaryOp(std::size_t dim, Kind kind);

  static UnitaryOp identity(std::size_t dim);
  static UnitaryOp rotation(std::size_t dim, std::size_t i, std::size_t j, double angle,
                            double phase = 0.0);
  static UnitaryOp permutation(std::vector<std::size_t> mapping);
  static UnitaryOp compose(std::size_t dim, std::vector<UnitaryOp> parts);

  std::size_t dim() const { return dim_; }
  const Kind& kind() const { return kind_; }

  /// True when every rotation phase is 0, i.e. the operator is real orthogonal.
  bool is_real() const;

  UnitaryOp inverse() const;
  ComplexMatrix dense() const;

 private:
  std::size_t dim_ = 0;
  Kind kind_;
};

/// phi = U psi.
StateVector apply(const UnitaryOp& op, const StateVector& psi);

/// Real orthogonal mode: requires op.is_real().
RealVector apply_real(const UnitaryOp& op, const RealVector& x);

/// Dense input; throws ValidationError unless ||U^dagger U - I||_inf <= 1e-12.
StateVector apply_dense(const ComplexMatrix& U, const StateVector& psi);

/// |phi^dagger psi|^2.
double overlap_probability(const StateVector& phi, const StateVector& psi);

struct Measurement {
  std::size_t outcome = 0;
  StateVector collapsed;
};

/// Born-rule sample of the outcome; the post-measurement state is the outcome's
/// basis vector with its first nonzero amplitude made positive real.
Measurement measure(const StateVector& psi, const contexts::ComplexContextBasis& basis, Rng& rng);

/// measure(apply(U, token_state), output_basis).outcome.
std::size_t quantum_attention_step(const StateVector& token_state, const UnitaryOp& U,
                                   const contexts::ComplexContextBasis& output_basis, Rng& rng);

/// |a_i|^2 of the amplitudes built from logits; equals the temperature softmax.
std::vector<double> classicality_bridge(const RealVector& logits, double temperature,
                                        const RealVector& phases);

/// Unitary stages followed by exactly one terminal measurement. There is no way
/// to put a non-unitary step anywhere else.
class Pipeline {
 public:
  Pipeline(std::vector<UnitaryOp> stages, contexts::ComplexContextBasis output_basis);

  std::size_t dim() const { return output_.dim(); }
  const std::vector<UnitaryOp>& stages() const { return stages_; }
  const contexts::ComplexContextBasis& output_basis() const { return output_; }

  /// Composition of the stages in order.
  UnitaryOp evolution() const;

  /// Deterministic part: the candidate state before measurement.
  StateVector evolve(const StateVector& psi) const;

  /// Born probabilities of the evolved state in the output basis.
  std::vector<double> outcome_probabilities(const StateVector& psi) const;

  Measurement run(const StateVector& psi, Rng& rng) const;

 private:
  std::vector<UnitaryOp> stages_;
  contexts::ComplexContextBasis output_;
};

// Circuit JSON:
//   {"format":"lmlab.circuit","version":1,"dim":d,
//    "stages":[{"type":"rotation","i":0,"j":1,"angle":0.5,"phase":0.0},
//              {"type":"permutation","mapping":[1,2,0]}],
//    "output_basis":"standard"
//      | {"graph":"contexts.json","label":"river"}
//      | {"label":..,"words":[..],"vectors":[[re,...] or [[re,im],...]]}}
// A relative graph path resolves against the circuit file's directory.
Pipeline read_circuit(std::istream& is, const std::filesystem::path& base_dir = {});
Pipeline load_circuit(const std::filesystem::path& path);
void write_circuit(std::ostream& os, const Pipeline& pipeline);

}  // namespace lmlab::uattention
