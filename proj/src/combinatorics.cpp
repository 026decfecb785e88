#include "fjp/combinatorics.hpp"

#include <algorithm>
#include <string>

namespace fjp {

bool NCPartition::is_partition() const {
  std::vector<bool> seen(n + 1, false);
  std::size_t covered = 0;
  for (const auto& block : blocks) {
    if (block.empty()) return false;
    if (!std::is_sorted(block.begin(), block.end())) return false;
    for (unsigned element : block) {
      if (element < 1 || element > n || seen[element]) return false;
      seen[element] = true;
      ++covered;
    }
  }
  return covered == n;
}

bool has_crossing(const NCPartition& partition) {
  const auto& blocks = partition.blocks;
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    for (std::size_t q = 0; q < blocks.size(); ++q) {
      if (p == q) continue;
      for (std::size_t i = 0; i < blocks[p].size(); ++i) {
        for (std::size_t j = i + 1; j < blocks[p].size(); ++j) {
          const unsigned a = blocks[p][i];
          const unsigned c = blocks[p][j];
          bool inside = false;
          bool outside = false;
          for (unsigned x : blocks[q]) {
            if (x > a && x < c) inside = true;
            else outside = true;
          }
          if (inside && outside) return true;
        }
      }
    }
  }
  return false;
}

BigInt catalan(unsigned n) { return binomial(2 * n, n) / (n + 1); }

namespace {

class NcEnumerator {
 public:
  using Visit = std::function<void(std::span<const unsigned>, unsigned)>;

  NcEnumerator(unsigned n, const Visit& visit) : labels_(n), visit_(visit) {}

  void run() {
    fill(0, static_cast<unsigned>(labels_.size()),
         [this] { visit_(std::span<const unsigned>(labels_), next_label_); });
  }

 private:
  // Partition the positions [lo, hi) and then invoke `then`. The block of
  // `lo` is opened first; the gaps between its consecutive elements are
  // independent sub-intervals.
  void fill(unsigned lo, unsigned hi, const std::function<void()>& then) {
    if (lo == hi) {
      then();
      return;
    }
    const unsigned label = next_label_++;
    labels_[lo] = label;
    extend(lo, hi, label, then);
    --next_label_;
  }

  void extend(unsigned last, unsigned hi, unsigned label, const std::function<void()>& then) {
    fill(last + 1, hi, then);
    for (unsigned next = last + 1; next < hi; ++next) {
      fill(last + 1, next, [this, next, hi, label, &then] {
        labels_[next] = label;
        extend(next, hi, label, then);
      });
    }
  }

  std::vector<unsigned> labels_;
  unsigned next_label_ = 0;
  const Visit& visit_;
};

}  // namespace

void for_each_nc(unsigned n,
                 const std::function<void(std::span<const unsigned>, unsigned)>& visit) {
  if (n > kMaxNcOrder) throw std::length_error("non-crossing enumeration: n exceeds guard");
  NcEnumerator(n, visit).run();
}

std::vector<NCPartition> enumerate_nc(unsigned n) {
  if (n > kMaxNcOrder) throw std::length_error("enumerate_nc: n exceeds guard");
  std::vector<NCPartition> result;
  result.reserve(catalan(n).convert_to<std::size_t>());
  for_each_nc(n, [&](std::span<const unsigned> labels, unsigned block_count) {
    NCPartition partition;
    partition.n = n;
    partition.blocks.assign(block_count, {});
    for (unsigned i = 0; i < n; ++i) partition.blocks[labels[i]].push_back(i + 1);
    result.push_back(std::move(partition));
  });
  return result;
}

std::map<std::vector<unsigned>, std::uint64_t> nc_block_types(unsigned n) {
  std::map<std::vector<unsigned>, std::uint64_t> types;
  std::vector<unsigned> sizes;
  for_each_nc(n, [&](std::span<const unsigned> labels, unsigned block_count) {
    sizes.assign(block_count, 0);
    for (unsigned label : labels) ++sizes[label];
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    ++types[sizes];
  });
  return types;
}

const Rational& CumulantTable::at(unsigned n) const {
  auto it = kappa.find(n);
  if (it == kappa.end()) {
    throw std::out_of_range("cumulant table has no order " + std::to_string(n));
  }
  return it->second;
}

nlohmann::json CumulantTable::to_json() const {
  nlohmann::json j;
  j["alpha"] = fjp::to_string(alpha);
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [order, value] : kappa) values[std::to_string(order)] = fjp::to_string(value);
  j["kappa"] = std::move(values);
  return j;
}

CumulantTable CumulantTable::from_json(const nlohmann::json& j) {
  CumulantTable table;
  table.alpha = parse_rational(j.at("alpha").get<std::string>());
  for (const auto& [key, value] : j.at("kappa").items()) {
    const unsigned long order = std::stoul(key);
    if (order == 0) throw std::invalid_argument("cumulant orders start at 1");
    table.kappa[static_cast<unsigned>(order)] = parse_rational(value.get<std::string>());
  }
  return table;
}

CumulantTable projection_cumulants(const Rational& alpha, unsigned n_max) {
  if (n_max < 1) throw std::invalid_argument("projection_cumulants: n_max must be >= 1");
  CumulantTable table;
  table.alpha = alpha;
  table.kappa[1] = alpha;
  const Rational beta = 1 - 2 * alpha;
  // Legendre values P_0..P_{n_max} at beta, by the same recurrence as legendre().
  std::vector<Rational> p(n_max + 1);
  p[0] = 1;
  if (n_max >= 1) p[1] = beta;
  for (unsigned m = 1; m + 1 <= n_max; ++m) {
    p[m + 1] = (Rational(2 * m + 1) * beta * p[m] - Rational(m) * p[m - 1]) / Rational(m + 1);
  }
  for (unsigned n = 2; n <= n_max; ++n) {
    table.kappa[n] = (p[n - 2] - p[n]) / Rational(2 * (2 * n - 1));
  }
  return table;
}

namespace {

Rational type_product(const std::vector<unsigned>& sizes, const CumulantTable& table) {
  Rational product = 1;
  for (unsigned size : sizes) {
    const Rational& value = table.at(size);
    if (value == 0) return 0;
    product *= value;
  }
  return product;
}

}  // namespace

std::vector<Rational> moments_from_cumulants(const CumulantTable& table, unsigned n_max) {
  std::vector<Rational> moments(n_max + 1);
  moments[0] = 1;
  for (unsigned n = 1; n <= n_max; ++n) {
    table.at(n);
    Rational sum = 0;
    for (const auto& [sizes, count] : nc_block_types(n)) {
      sum += Rational(BigInt(count)) * type_product(sizes, table);
    }
    moments[n] = sum;
  }
  return moments;
}

CumulantTable cumulants_from_moments(std::span<const Rational> moments) {
  CumulantTable table;
  for (unsigned n = 1; n < moments.size(); ++n) {
    Rational rest = 0;
    for (const auto& [sizes, count] : nc_block_types(n)) {
      if (sizes.size() == 1) continue;  // the one-block partition carries kappa_n itself
      rest += Rational(BigInt(count)) * type_product(sizes, table);
    }
    table.kappa[n] = moments[n] - rest;
  }
  if (!table.kappa.empty()) table.alpha = table.kappa.begin()->second;
  return table;
}

Rational haar_unitary_cumulant(std::span<const Letter> pattern) {
  const std::size_t length = pattern.size();
  if (length == 0 || length % 2 != 0) return 0;
  for (std::size_t i = 1; i < length; ++i) {
    if (pattern[i] == pattern[i - 1]) return 0;
  }
  const unsigned m = static_cast<unsigned>(length / 2);
  Rational value(catalan(m - 1));
  return (m % 2 == 1) ? value : Rational(-value);
}

}  // namespace fjp
