#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "lmlab/numkit.hpp"

namespace lmlab::capacity {

inline constexpr std::size_t kDefaultMaxAttempts = 2000;

struct PackingReport {
  std::size_t d = 0;
  double epsilon = 0.0;
  std::size_t n_attempted = 0;
  double max_abs_dot = 0.0;
  std::size_t violating_pairs = 0;
  double fraction_violating = 0.0;
};

/// Pairwise |<u_i, u_j>| statistics over all n(n-1)/2 pairs of the rows.
PackingReport measure_packing_of(const RealMatrix& unit_rows, double epsilon);

/// measure_packing_of on n fresh random unit vectors in R^d.
PackingReport measure_packing(Rng& rng, std::size_t n, std::size_t d, double epsilon);

struct GreedyOptions {
  std::size_t max_attempts = kDefaultMaxAttempts;  // consecutive rejections before stopping
  bool seed_with_basis = false;                    // start from e_1..e_d
};

struct GreedyResult {
  std::size_t accepted = 0;     // includes the d basis vectors when seeded
  std::size_t candidates = 0;   // random draws examined
  std::size_t max_attempts = 0;
};

/// Greedy quasi-orthogonal packing: draw random unit vectors and keep each one
/// whose |dot| with every kept vector is <= epsilon; stop after `max_attempts`
/// consecutive rejections. The result is a lower-bound witness for the size of
/// the largest epsilon-packing in R^d.
GreedyResult greedy_pack_detailed(Rng& rng, std::size_t d, double epsilon,
                                  const GreedyOptions& options = {});

std::size_t greedy_pack(Rng& rng, std::size_t d, double epsilon,
                        std::size_t max_attempts = kDefaultMaxAttempts);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct CapacityPoint {
  std::size_t d = 0;
  std::size_t greedy_n = 0;    // greedy witness
  std::size_t achieved_n = 0;  // max(greedy_n, d): the orthonormal basis is always a packing
};

struct CapacityCurve {
  double epsilon = 0.0;
  std::size_t max_attempts = 0;
  std::vector<CapacityPoint> points;  // ascending d
  double fitted_slope = 0.0;          // slope of ln N against d
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// One greedy packing per dimension (each on its own split of `rng`), then the
/// least-squares fit of ln(achieved_n) against d.
CapacityCurve capacity_curve(Rng& rng, double epsilon, const std::vector<std::size_t>& dims,
                             const GreedyOptions& options = {});

/// Pools several curves (e.g. one per seed) into a single ln N vs d fit.
LinearFit pooled_fit(std::span<const CapacityCurve> curves);

/// d x k Gaussian matrix with N(0, 1/k) entries.
RealMatrix gaussian_projection(Rng& rng, std::size_t d, std::size_t k);

/// X (n x d) times a fresh gaussian_projection(d, k).
RealMatrix jl_project(Rng& rng, const RealMatrix& X, std::size_t k);

/// X times a caller-supplied d x k projection.
RealMatrix project_with(const RealMatrix& X, const RealMatrix& projection);

/// Smallest k with k >= 8 ln(n) / epsilon^2.
std::size_t jl_target_dim(std::size_t n, double epsilon);

struct DistortionReport {
  std::size_t pairs = 0;
  double max_distortion = 0.0;  // max |d'^2 / d^2 - 1|
  std::size_t within = 0;       // pairs with (1-eps) d^2 <= d'^2 <= (1+eps) d^2
  bool all_within = false;
};

/// Squared-distance distortion between corresponding row pairs of X and its projection Y.
DistortionReport distortion(const RealMatrix& X, const RealMatrix& Y, double epsilon);

double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// argmax over rows other than a, b, c of cos(row, Emb[a] - Emb[b] + Emb[c]);
/// ties to the lowest index. Throws DomainError on a zero query vector.
std::size_t analogy(const RealMatrix& embeddings, std::size_t a, std::size_t b, std::size_t c);

// CSV: header plus one row per (seed, d, epsilon) cell.
void write_packing_csv(std::ostream& os, std::span<const std::uint64_t> seeds,
                       std::span<const PackingReport> reports);
void write_curve_csv(std::ostream& os, std::span<const std::uint64_t> seeds,
                     std::span<const CapacityCurve> curves);

}  // namespace lmlab::capacity
