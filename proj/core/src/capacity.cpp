#include "lmlab/capacity.hpp"

#include <cmath>
#include <ostream>

#include "lmlab/matrix_io.hpp"

namespace lmlab::capacity {
namespace {

// Fixed four-way interleaved reduction: deterministic, and fast enough for
// the O(N^2 d) greedy loop.
double dot4(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
}

}  // namespace

PackingReport measure_packing_of(const RealMatrix& unit_rows, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
  PackingReport r;
  r.d = unit_rows.cols();
  r.epsilon = epsilon;
  r.n_attempted = unit_rows.rows();
  const std::size_t n = unit_rows.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = std::abs(dot4(unit_rows.row(i).data(), unit_rows.row(j).data(), r.d));
      r.max_abs_dot = std::max(r.max_abs_dot, a);
      if (a > epsilon) ++r.violating_pairs;
    }
  }
  const double pairs = n < 2 ? 0.0 : 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  r.fraction_violating = pairs > 0 ? static_cast<double>(r.violating_pairs) / pairs : 0.0;
  return r;
}

PackingReport measure_packing(Rng& rng, std::size_t n, std::size_t d, double epsilon) {
  if (n < 2 || d < 1) throw DomainError("measure_packing: need n >= 2 and d >= 1");
  check_epsilon(epsilon);
  return measure_packing_of(random_unit_vectors(rng, n, d), epsilon);
}

GreedyResult greedy_pack_detailed(Rng& rng, std::size_t d, double epsilon,
                                  const GreedyOptions& options) {
  check_epsilon(epsilon);
  if (d == 0) throw DomainError("greedy_pack: d must be >= 1");
  if (options.max_attempts == 0) throw DomainError("greedy_pack: max_attempts must be >= 1");

  GreedyResult result;
  result.max_attempts = options.max_attempts;
  std::vector<double> kept;  // random vectors only; the basis is checked coordinate-wise
  std::size_t kept_count = 0;
  std::size_t rejections = 0;
  std::vector<double> cand(d);

  while (rejections < options.max_attempts) {
    double ss = 0.0;
    for (auto& x : cand) {
      x = rng.normal();
      ss += x * x;
    }
    if (ss == 0.0) continue;
    const double inv = 1.0 / std::sqrt(ss);
    for (auto& x : cand) x *= inv;
    ++result.candidates;

    bool ok = true;
    if (options.seed_with_basis) {
      for (double x : cand) {
        if (std::abs(x) > epsilon) {
          ok = false;
          break;
        }
      }
    }
    for (std::size_t j = 0; ok && j < kept_count; ++j) {
      if (std::abs(dot4(cand.data(), kept.data() + j * d, d)) > epsilon) ok = false;
    }
    if (ok) {
      kept.insert(kept.end(), cand.begin(), cand.end());
      ++kept_count;
      rejections = 0;
    } else {
      ++rejections;
    }
  }
  result.accepted = kept_count + (options.seed_with_basis ? d : 0);
  return result;
}

std::size_t greedy_pack(Rng& rng, std::size_t d, double epsilon, std::size_t max_attempts) {
  GreedyOptions o;
  o.max_attempts = max_attempts;
  return greedy_pack_detailed(rng, d, epsilon, o).accepted;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ShapeError("fit_line: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_line: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

CapacityCurve capacity_curve(Rng& rng, double epsilon, const std::vector<std::size_t>& dims,
                             const GreedyOptions& options) {
  if (dims.size() < 2) throw DomainError("capacity_curve: need at least two dimensions");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 2) throw DomainError("capacity_curve: dimensions must be >= 2");
    if (i > 0 && dims[i] <= dims[i - 1]) throw DomainError("capacity_curve: dims must ascend");
  }
  CapacityCurve c;
  c.epsilon = epsilon;
  c.max_attempts = options.max_attempts;
  std::vector<double> x, y;
  for (auto d : dims) {
    Rng child = rng.split(d);
    const auto r = greedy_pack_detailed(child, d, epsilon, options);
    const auto n = std::max(r.accepted, d);
    c.points.push_back({d, r.accepted, n});
    x.push_back(static_cast<double>(d));
    y.push_back(std::log(static_cast<double>(n)));
  }
  const auto f = fit_line(x, y);
  c.fitted_slope = f.slope;
  c.intercept = f.intercept;
  c.r_squared = f.r_squared;
  return c;
}

LinearFit pooled_fit(std::span<const CapacityCurve> curves) {
  std::vector<double> x, y;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      x.push_back(static_cast<double>(p.d));
      y.push_back(std::log(static_cast<double>(p.achieved_n)));
    }
  }
  return fit_line(x, y);
}

RealMatrix gaussian_projection(Rng& rng, std::size_t d, std::size_t k) {
  if (k == 0 || k > d) throw DomainError("projection dimension k must satisfy 1 <= k <= d");
  return random_gaussian(rng, d, k, 1.0 / std::sqrt(static_cast<double>(k)));
}

RealMatrix jl_project(Rng& rng, const RealMatrix& X, std::size_t k) {
  return project_with(X, gaussian_projection(rng, X.cols(), k));
}

RealMatrix project_with(const RealMatrix& X, const RealMatrix& projection) {
  if (projection.rows() != X.cols()) throw ShapeError("projection rows must equal X.cols");
  if (projection.cols() == 0 || projection.cols() > X.cols()) {
    throw DomainError("projection dimension k must satisfy 1 <= k <= d");
  }
  return matmul(X, projection);
}

std::size_t jl_target_dim(std::size_t n, double epsilon) {
  check_epsilon(epsilon);
  return static_cast<std::size_t>(
      std::ceil(8.0 * std::log(static_cast<double>(n)) / (epsilon * epsilon)));
}

DistortionReport distortion(const RealMatrix& X, const RealMatrix& Y, double epsilon) {
  if (X.rows() != Y.rows()) throw ShapeError("distortion: row counts differ");
  DistortionReport r;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = i + 1; j < X.rows(); ++j) {
      double dx = 0.0, dy = 0.0;
      for (std::size_t c = 0; c < X.cols(); ++c) dx += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
      for (std::size_t c = 0; c < Y.cols(); ++c) dy += (Y(i, c) - Y(j, c)) * (Y(i, c) - Y(j, c));
      ++r.pairs;
      if (dx == 0.0) {
        if (dy == 0.0) ++r.within;
        continue;
      }
      const double dev = std::abs(dy / dx - 1.0);
      r.max_distortion = std::max(r.max_distortion, dev);
      if (dy >= (1.0 - epsilon) * dx && dy <= (1.0 + epsilon) * dx) ++r.within;
    }
  }
  r.all_within = r.within == r.pairs;
  return r;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("cosine_similarity: dims differ");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

std::size_t analogy(const RealMatrix& embeddings, std::size_t a, std::size_t b, std::size_t c) {
  const auto n = embeddings.rows();
  if (a >= n || b >= n || c >= n) throw DomainError("analogy: token index out of range");
  RealVector query(embeddings.cols());
  for (std::size_t i = 0; i < query.dim(); ++i) {
    query[i] = embeddings(a, i) - embeddings(b, i) + embeddings(c, i);
  }
  if (norm(query) == 0.0) throw DomainError("analogy: degenerate (zero) query vector");
  std::size_t best = n;
  double best_sim = -2.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r == a || r == b || r == c) continue;
    const double s = cosine_similarity(embeddings.row(r), query.span());
    if (s > best_sim) {
      best_sim = s;
      best = r;
    }
  }
  if (best == n) throw DomainError("analogy: no candidate rows besides the inputs");
  return best;
}

void write_packing_csv(std::ostream& os, std::span<const std::uint64_t> seeds,
                       std::span<const PackingReport> reports) {
  if (seeds.size() != reports.size()) throw ShapeError("write_packing_csv: one seed per report");
  os << "seed,d,epsilon,n_attempted,max_abs_dot,violating_pairs,fraction_violating\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    os << seeds[i] << ',' << r.d << ',' << format_double(r.epsilon) << ',' << r.n_attempted << ','
       << format_double(r.max_abs_dot) << ',' << r.violating_pairs << ','
       << format_double(r.fraction_violating) << '\n';
  }
}

void write_curve_csv(std::ostream& os, std::span<const std::uint64_t> seeds,
                     std::span<const CapacityCurve> curves) {
  if (seeds.size() != curves.size()) throw ShapeError("write_curve_csv: one seed per curve");
  os << "seed,d,epsilon,max_attempts,greedy_n,achieved_n,ln_n,curve_slope,curve_r_squared\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    for (const auto& p : c.points) {
      os << seeds[i] << ',' << p.d << ',' << format_double(c.epsilon) << ',' << c.max_attempts
         << ',' << p.greedy_n << ',' << p.achieved_n << ','
         << format_double(std::log(static_cast<double>(p.achieved_n))) << ','
         << format_double(c.fitted_slope) << ',' << format_double(c.r_squared) << '\n';
    }
  }
}

}  // namespace lmlab::capacity
