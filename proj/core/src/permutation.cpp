#include "bops/permutation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace bops {

namespace {

void require_same_size(const Permutation& a, const Permutation& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

Permutation::Permutation(std::vector<int> mapping) : mapping_(std::move(mapping)) {
  const int d = size();
  if (d < 2) {
    throw std::invalid_argument("permutation: dimension must be at least 2");
  }
  std::vector<bool> seen(mapping_.size(), false);
  for (int v : mapping_) {
    if (v < 0 || v >= d) {
      throw std::invalid_argument("permutation: value " + std::to_string(v) + " out of range [0, " +
                                  std::to_string(d) + ")");
    }
    if (seen[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument("permutation: duplicate value " + std::to_string(v));
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

Permutation Permutation::identity(int d) {
  std::vector<int> m(static_cast<std::size_t>(std::max(d, 0)));
  std::iota(m.begin(), m.end(), 0);
  return Permutation(std::move(m));
}

Permutation Permutation::reversed(int d) {
  std::vector<int> m(static_cast<std::size_t>(std::max(d, 0)));
  std::iota(m.rbegin(), m.rend(), 0);
  return Permutation(std::move(m));
}

std::size_t PermutationHash::operator()(const Permutation& p) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (int v : p.mapping()) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

Permutation random_permutation(int d, Rng& rng) {
  if (d < 2) {
    throw std::invalid_argument("random_permutation: dimension must be at least 2");
  }
  std::vector<int> m(static_cast<std::size_t>(d));
  std::iota(m.begin(), m.end(), 0);
  for (int i = d - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(m[static_cast<std::size_t>(i)], m[static_cast<std::size_t>(pick(rng))]);
  }
  return Permutation(std::move(m));
}

int discordant_pairs(const Permutation& a, const Permutation& b) {
  require_same_size(a, b, "discordant_pairs");
  const int d = a.size();
  int count = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const bool a_up = a[i] < a[j];
      const bool b_up = b[i] < b[j];
      count += (a_up != b_up) ? 1 : 0;
    }
  }
  return count;
}

int concordant_pairs(const Permutation& a, const Permutation& b) {
  return pair_count(a.size()) - discordant_pairs(a, b);
}

Eigen::VectorXd kendall_feature_map(const Permutation& p) {
  const int d = p.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(pair_count(d)));
  Eigen::VectorXd phi(pair_count(d));
  int k = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      phi(k++) = p[i] > p[j] ? scale : -scale;
    }
  }
  return phi;
}

Permutation swapped(const Permutation& p, int i, int j) {
  std::vector<int> m(p.mapping().begin(), p.mapping().end());
  std::swap(m.at(static_cast<std::size_t>(i)), m.at(static_cast<std::size_t>(j)));
  return Permutation(std::move(m));
}

std::vector<Permutation> swap_neighbors(const Permutation& p) {
  const int d = p.size();
  std::vector<Permutation> out;
  out.reserve(static_cast<std::size_t>(pair_count(d)));
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      out.push_back(swapped(p, i, j));
    }
  }
  return out;
}

Permutation compose(const Permutation& a, const Permutation& b) {
  require_same_size(a, b, "compose");
  std::vector<int> m(static_cast<std::size_t>(a.size()));
  for (int x = 0; x < a.size(); ++x) {
    m[static_cast<std::size_t>(x)] = a[b[x]];
  }
  return Permutation(std::move(m));
}

Permutation inverse(const Permutation& a) {
  std::vector<int> m(static_cast<std::size_t>(a.size()));
  for (int x = 0; x < a.size(); ++x) {
    m[static_cast<std::size_t>(a[x])] = x;
  }
  return Permutation(std::move(m));
}

Eigen::MatrixXd permutation_matrix(const Permutation& p) {
  const int d = p.size();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    P(i, p[i]) = 1.0;
  }
  return P;
}

std::string to_string(const Permutation& p) {
  std::string out;
  for (int i = 0; i < p.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(p[i]);
  }
  return out;
}

Permutation parse_permutation(std::string_view text) {
  std::vector<int> m;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view token = text.substr(pos, comma - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    int value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size() || token.empty()) {
      throw std::invalid_argument("parse_permutation: bad token '" + std::string(token) + "'");
    }
    m.push_back(value);
    pos = comma + 1;
  }
  return Permutation(std::move(m));
}

}  // namespace bops
