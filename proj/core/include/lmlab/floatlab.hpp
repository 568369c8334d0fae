#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lmlab::floatlab {

enum class Strategy { sequential, pairwise_tree, chunked, shuffled };
enum class Precision { float32, float64 };

/// A fully specified association order for a sum.
struct ReductionPlan {
  Strategy strategy = Strategy::sequential;
  std::size_t chunk_size = 1;  // chunked only
  std::uint64_t seed = 0;      // shuffled only
  Precision precision = Precision::float64;

  static ReductionPlan sequential(Precision p = Precision::float64);
  static ReductionPlan pairwise_tree(Precision p = Precision::float64);
  /// Throws DomainError for chunk_size == 0.
  static ReductionPlan chunked(std::size_t chunk_size, Precision p = Precision::float64);
  static ReductionPlan shuffled(std::uint64_t seed, Precision p = Precision::float64);

  /// e.g. "chunked(16)/float32".
  std::string name() const;
};

/// Sum in exactly the order the plan describes:
///   sequential     ((x0 + x1) + x2) + ...
///   pairwise_tree  reduce(left half) + reduce(right half), split at n/2
///   chunked(c)     sequential sums of consecutive c-blocks, then sequential over the partials
///   shuffled(s)    sequential over a Fisher-Yates permutation drawn from Rng(s)
/// float32 plans round each input and every partial sum to float.
/// Throws ShapeError on empty input.
double reduce(std::span<const double> data, const ReductionPlan& plan);

/// Chunked reduction whose layout depends only on `fixed_chunk`.
double deterministic_mode_reduce(std::span<const double> data, std::size_t fixed_chunk,
                                 Precision p = Precision::float64);

/// Number of partial sums a modeled kernel splits one request into when `batch_size`
/// requests share it: fewer requests leave more lanes to split each reduction.
inline constexpr std::size_t kKernelLanes = 64;
std::size_t batch_splits(std::size_t batch_size);

/// Chunking used for a request of length `len` inside a batch of `batch_size`.
ReductionPlan batch_plan(std::size_t len, std::size_t batch_size,
                         Precision p = Precision::float64);

struct BatchMode {
  bool deterministic = false;
  std::size_t fixed_chunk = 32;  // deterministic mode only
  Precision precision = Precision::float64;
};

struct ReducedValue {
  std::size_t request = 0;
  std::size_t batch_size = 0;
  std::string plan;
  double sum = 0.0;
};

struct DiscrepancyReport {
  std::vector<ReducedValue> values;
  double max_abs_diff = 0.0;       // worst per-request spread across batch sizes
  bool bitwise_identical = true;   // every request gave the same bits at every batch size
};

/// Groups the requests into batches of each size, reduces every request with the
/// chunking implied by its batch, and compares each request across batch sizes.
/// Throws DomainError for a zero batch size or an empty request.
DiscrepancyReport batch_simulation(const std::vector<std::vector<double>>& requests,
                                   const std::vector<std::size_t>& batch_sizes,
                                   const BatchMode& mode);

std::uint64_t bits_of(double x);
/// "0x" followed by 16 lowercase hex digits.
std::string hex_bits(double x);

/// CSV: request,batch_size,plan,sum,sum_hex
void write_report_csv(std::ostream& os, const DiscrepancyReport& report);

}  // namespace lmlab::floatlab
