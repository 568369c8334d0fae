#include "lmlab/floatlab.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "lmlab/error.hpp"
#include "lmlab/matrix_io.hpp"
#include "lmlab/rng.hpp"

namespace lmlab::floatlab {
namespace {

template <class F>
F seq(std::span<const double> d) {
  F s = static_cast<F>(d[0]);
  for (std::size_t i = 1; i < d.size(); ++i) s += static_cast<F>(d[i]);
  return s;
}

template <class F>
F tree(std::span<const double> d) {
  if (d.size() == 1) return static_cast<F>(d[0]);
  const auto h = d.size() / 2;
  return tree<F>(d.subspan(0, h)) + tree<F>(d.subspan(h));
}

template <class F>
F chunks(std::span<const double> d, std::size_t c) {
  F total = seq<F>(d.subspan(0, std::min(c, d.size())));
  for (std::size_t start = c; start < d.size(); start += c) {
    total += seq<F>(d.subspan(start, std::min(c, d.size() - start)));
  }
  return total;
}

template <class F>
F run(std::span<const double> d, const ReductionPlan& plan) {
  switch (plan.strategy) {
    case Strategy::sequential:
      return seq<F>(d);
    case Strategy::pairwise_tree:
      return tree<F>(d);
    case Strategy::chunked:
      return chunks<F>(d, plan.chunk_size);
    case Strategy::shuffled: {
      Rng rng(plan.seed);
      const auto perm = rng.permutation(d.size());
      std::vector<double> shuffled(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) shuffled[i] = d[perm[i]];
      return seq<F>(shuffled);
    }
  }
  throw DomainError("unknown reduction strategy");
}

}  // namespace

ReductionPlan ReductionPlan::sequential(Precision p) { return {Strategy::sequential, 1, 0, p}; }

ReductionPlan ReductionPlan::pairwise_tree(Precision p) {
  return {Strategy::pairwise_tree, 1, 0, p};
}

ReductionPlan ReductionPlan::chunked(std::size_t chunk_size, Precision p) {
  if (chunk_size == 0) throw DomainError("chunk_size must be >= 1");
  return {Strategy::chunked, chunk_size, 0, p};
}

ReductionPlan ReductionPlan::shuffled(std::uint64_t seed, Precision p) {
  return {Strategy::shuffled, 1, seed, p};
}

std::string ReductionPlan::name() const {
  std::string s;
  switch (strategy) {
    case Strategy::sequential: s = "sequential"; break;
    case Strategy::pairwise_tree: s = "pairwise_tree"; break;
    case Strategy::chunked: s = "chunked(" + std::to_string(chunk_size) + ")"; break;
    case Strategy::shuffled: s = "shuffled(" + std::to_string(seed) + ")"; break;
  }
  return s + (precision == Precision::float32 ? "/float32" : "/float64");
}

double reduce(std::span<const double> data, const ReductionPlan& plan) {
  if (data.empty()) throw ShapeError("reduce: empty input");
  if (plan.strategy == Strategy::chunked && plan.chunk_size == 0) {
    throw DomainError("chunk_size must be >= 1");
  }
  if (plan.precision == Precision::float32) return static_cast<double>(run<float>(data, plan));
  return run<double>(data, plan);
}

double deterministic_mode_reduce(std::span<const double> data, std::size_t fixed_chunk,
                                 Precision p) {
  return reduce(data, ReductionPlan::chunked(fixed_chunk, p));
}

std::size_t batch_splits(std::size_t batch_size) {
  if (batch_size == 0) throw DomainError("batch_size must be >= 1");
  return std::max<std::size_t>(1, kKernelLanes / batch_size);
}

ReductionPlan batch_plan(std::size_t len, std::size_t batch_size, Precision p) {
  const auto splits = batch_splits(batch_size);
  const auto chunk = std::max<std::size_t>(1, (len + splits - 1) / splits);
  return ReductionPlan::chunked(chunk, p);
}

DiscrepancyReport batch_simulation(const std::vector<std::vector<double>>& requests,
                                   const std::vector<std::size_t>& batch_sizes,
                                   const BatchMode& mode) {
  for (auto b : batch_sizes)
    if (b == 0) throw DomainError("batch_size must be >= 1");
  if (mode.deterministic && mode.fixed_chunk == 0) throw DomainError("fixed_chunk must be >= 1");
  for (const auto& r : requests)
    if (r.empty()) throw DomainError("batch_simulation: empty request");

  DiscrepancyReport report;
  std::vector<double> first(requests.size());
  for (std::size_t bi = 0; bi < batch_sizes.size(); ++bi) {
    const auto b = batch_sizes[bi];
    // Requests are taken in order, b at a time; a short final batch is padded with
    // empty slots, which occupy lanes but contribute nothing.
    for (std::size_t start = 0; start < requests.size(); start += b) {
      const auto end = std::min(requests.size(), start + b);
      for (std::size_t r = start; r < end; ++r) {
        const auto plan = mode.deterministic
                              ? ReductionPlan::chunked(mode.fixed_chunk, mode.precision)
                              : batch_plan(requests[r].size(), b, mode.precision);
        const double s = reduce(requests[r], plan);
        report.values.push_back({r, b, plan.name(), s});
        if (bi == 0) {
          first[r] = s;
        } else {
          if (bits_of(s) != bits_of(first[r])) report.bitwise_identical = false;
          report.max_abs_diff = std::max(report.max_abs_diff, std::abs(s - first[r]));
        }
      }
    }
  }
  return report;
}

std::uint64_t bits_of(double x) { return std::bit_cast<std::uint64_t>(x); }

std::string hex_bits(double x) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(bits_of(x)));
  return buf;
}

void write_report_csv(std::ostream& os, const DiscrepancyReport& report) {
  os << "request,batch_size,plan,sum,sum_hex\n";
  for (const auto& v : report.values) {
    os << v.request << ',' << v.batch_size << ',' << v.plan << ',' << format_double(v.sum) << ','
       << hex_bits(v.sum) << '\n';
  }
}

}  // namespace lmlab::floatlab
