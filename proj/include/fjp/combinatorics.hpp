#pragma once

// Non-crossing partitions, Catalan and Legendre numbers, and the free
// moment-cumulant calculus needed for compressions by a free projection.

#include "fjp/exact.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace fjp {

/// Largest order accepted by the enumerators (C_16 is about 3.5e7 partitions).
inline constexpr unsigned kMaxNcOrder = 16;

/// A partition of {1..n}. Blocks hold sorted 1-based indices and are ordered
/// by their smallest element.
struct NCPartition {
  unsigned n = 0;
  std::vector<std::vector<unsigned>> blocks;

  std::size_t block_count() const { return blocks.size(); }

  /// True when the blocks are disjoint, cover {1..n} and are sorted.
  bool is_partition() const;

  friend bool operator==(const NCPartition&, const NCPartition&) = default;
};

/// True when two distinct blocks interleave as a < b < c < d with {a, c} in
/// one block and {b, d} in the other.
bool has_crossing(const NCPartition& partition);

BigInt catalan(unsigned n);

/// Visits every non-crossing partition of {1..n}. `labels[i]` is the block
/// index (0-based, in order of first element) of element i+1. The label
/// buffer is reused between calls. Throws std::length_error above kMaxNcOrder.
void for_each_nc(unsigned n,
                 const std::function<void(std::span<const unsigned> labels,
                                          unsigned block_count)>& visit);

/// Materialized list of NC(n), built by first-block interval decomposition.
std::vector<NCPartition> enumerate_nc(unsigned n);

/// Histogram of block-size multisets over NC(n): key is the sorted
/// (descending) list of block sizes, value the number of partitions.
std::map<std::vector<unsigned>, std::uint64_t> nc_block_types(unsigned n);

/// Legendre polynomial P_n(x) by the three-term recurrence
/// (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}.
template <class T>
T legendre(unsigned n, const T& x) {
  T previous = T(1);
  if (n == 0) return previous;
  T current = x;
  for (unsigned m = 1; m < n; ++m) {
    T next = (T(2 * m + 1) * x * current - T(m) * previous) / T(m + 1);
    previous = std::move(current);
    current = std::move(next);
  }
  return current;
}

/// Free cumulants kappa_1..kappa_{n_max}; `alpha` records the trace of the
/// projection the table was built for, when applicable.
struct CumulantTable {
  Rational alpha = 0;
  std::map<unsigned, Rational> kappa;

  /// Throws std::out_of_range when order `n` is missing.
  const Rational& at(unsigned n) const;
  unsigned max_order() const { return kappa.empty() ? 0 : kappa.rbegin()->first; }

  nlohmann::json to_json() const;
  static CumulantTable from_json(const nlohmann::json& j);
};

/// kappa_1 = alpha, kappa_n = [P_{n-2}(1-2 alpha) - P_n(1-2 alpha)] / (2(2n-1)).
CumulantTable projection_cumulants(const Rational& alpha, unsigned n_max);

/// m_0..m_{n_max} with m_n the sum over NC(n) of the multiplicative cumulant
/// functional. Throws std::out_of_range when the table stops short of n_max.
std::vector<Rational> moments_from_cumulants(const CumulantTable& table, unsigned n_max);

/// Inverse of moments_from_cumulants by Moebius inversion over NC(n).
/// `moments[0]` is ignored; orders 1..moments.size()-1 are produced.
CumulantTable cumulants_from_moments(std::span<const Rational> moments);

enum class Letter : std::uint8_t { u, u_star };

/// Caller-supplied mixed free cumulant of the word formed by the letters of
/// one block, read in increasing position order.
template <class T>
using StarCumulantOracle = std::function<T(std::span<const Letter>)>;

/// Largest n accepted by compressed_jacobi_moment (NC(12) has 208012 elements).
inline constexpr unsigned kMaxCompressedOrder = 6;

/// k tau[(P U P U* P)^n] for tau(P) = 1/k: the sum over NC(2n) of the
/// cumulant functional on (U, U*, ..., U, U*) weighted by k^{|pi| - 2n}.
template <class T>
T compressed_jacobi_moment(const StarCumulantOracle<T>& oracle, unsigned k, unsigned n);

/// Free cumulants of a Haar unitary: kappa_{2m}(U, U*, ..., U, U*) and
/// kappa_{2m}(U*, U, ..., U*, U) equal (-1)^{m-1} C_{m-1}; all others vanish.
Rational haar_unitary_cumulant(std::span<const Letter> pattern);

// ---------------------------------------------------------------------------

template <class T>
T compressed_jacobi_moment(const StarCumulantOracle<T>& oracle, unsigned k, unsigned n) {
  if (n == 0) return T(1);
  if (n > kMaxCompressedOrder) {
    throw std::length_error("compressed_jacobi_moment: order exceeds guard");
  }
  if (k < 1) throw std::invalid_argument("compressed_jacobi_moment: k must be positive");
  const unsigned length = 2 * n;

  // Block values depend only on the letter pattern, so memoize per call.
  std::map<std::vector<Letter>, T> cache;
  std::vector<T> inverse_k_powers(length + 1, T(1));
  for (unsigned e = 1; e <= length; ++e) inverse_k_powers[e] = inverse_k_powers[e - 1] / T(k);

  T total = T(0);
  std::vector<std::vector<Letter>> patterns;
  for_each_nc(length, [&](std::span<const unsigned> labels, unsigned blocks) {
    patterns.assign(blocks, {});
    for (unsigned i = 0; i < length; ++i) {
      patterns[labels[i]].push_back(i % 2 == 0 ? Letter::u : Letter::u_star);
    }
    T term = inverse_k_powers[length - blocks];
    for (const auto& pattern : patterns) {
      auto it = cache.find(pattern);
      if (it == cache.end()) it = cache.emplace(pattern, oracle(pattern)).first;
      if (it->second == T(0)) return;
      term *= it->second;
    }
    total += term;
  });
  return total;
}

}  // namespace fjp
