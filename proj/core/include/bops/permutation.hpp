#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bops/rng.hpp"

namespace bops {

/// A bijection on {0, ..., d-1}, d >= 2. Position i maps to value p[i].
/// Immutable once constructed.
class Permutation {
 public:
  /// Throws std::invalid_argument unless `mapping` is a bijection with d >= 2.
  explicit Permutation(std::vector<int> mapping);

  static Permutation identity(int d);
  /// Reversal d-1, d-2, ..., 0; maximally discordant with the identity.
  static Permutation reversed(int d);

  int size() const { return static_cast<int>(mapping_.size()); }
  int operator[](int i) const { return mapping_[static_cast<std::size_t>(i)]; }
  std::span<const int> mapping() const { return mapping_; }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> mapping_;
};

struct PermutationHash {
  std::size_t operator()(const Permutation& p) const noexcept;
};

/// C(d, 2).
constexpr int pair_count(int d) { return d * (d - 1) / 2; }

/// Linear index of the ordered pair (i, j), i < j, in lexicographic pair order.
constexpr int pair_index(int i, int j, int d) {
  return i * (2 * d - i - 1) / 2 + (j - i - 1);
}

/// Uniform draw from S_d (Fisher-Yates).
Permutation random_permutation(int d, Rng& rng);

/// Number of object pairs ordered oppositely by a and b (Kendall tau distance).
int discordant_pairs(const Permutation& a, const Permutation& b);
int concordant_pairs(const Permutation& a, const Permutation& b);

/// Kendall feature map: entry for pair (i, j), i < j, is
/// +1/sqrt(C(d,2)) when p(i) > p(j) and -1/sqrt(C(d,2)) otherwise.
Eigen::VectorXd kendall_feature_map(const Permutation& p);

/// All C(d,2) permutations one transposition away, in lexicographic (i, j) order.
std::vector<Permutation> swap_neighbors(const Permutation& p);

/// p with positions i and j exchanged.
Permutation swapped(const Permutation& p, int i, int j);

/// (a o b)(x) = a(b(x)).
Permutation compose(const Permutation& a, const Permutation& b);
Permutation inverse(const Permutation& a);

/// Permutation matrix with P(i, p(i)) = 1. Under this convention
/// (P A P^T)(j, i) = A(p(j), p(i)).
Eigen::MatrixXd permutation_matrix(const Permutation& p);

/// Comma-separated 0-based values, e.g. "2,0,1".
std::string to_string(const Permutation& p);
/// Inverse of to_string; throws std::invalid_argument on malformed input.
Permutation parse_permutation(std::string_view text);

}  // namespace bops
