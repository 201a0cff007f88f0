#pragma once

// Seeded, splittable randomness.
//
// A StreamKey (master seed + path of (label, index) pairs) hashes to a
// 64-bit stream id. The stream itself is counter based: draw i is
// splitmix64(id + (i+1) * golden), so any key can be replayed from any
// thread without shared state.

#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "raptt/error.hpp"

namespace raptt {

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class StreamKey {
 public:
  struct Step {
    std::string label;
    std::uint64_t index = 0;
    bool operator==(const Step&) const = default;
  };

  StreamKey() = default;
  explicit StreamKey(std::uint64_t master_seed) : master_seed_(master_seed) {}

  // Child key; the parent is unchanged.
  [[nodiscard]] StreamKey child(std::string_view label, std::uint64_t index = 0) const {
    StreamKey out = *this;
    out.path_.push_back(Step{std::string(label), index});
    return out;
  }

  [[nodiscard]] std::uint64_t master_seed() const { return master_seed_; }
  [[nodiscard]] const std::vector<Step>& path() const { return path_; }

  [[nodiscard]] std::uint64_t stream_id() const {
    std::uint64_t h = detail::mix64(master_seed_ + detail::kGolden);
    for (const Step& s : path_) {
      h = detail::mix64(h ^ detail::fnv1a(s.label));
      h = detail::mix64(h + (s.index + 1) * detail::kGolden);
    }
    return h;
  }

  [[nodiscard]] std::string to_string() const {
    std::string out = std::to_string(master_seed_);
    for (const Step& s : path_) out += "/" + s.label + ":" + std::to_string(s.index);
    return out;
  }

  bool operator==(const StreamKey&) const = default;

 private:
  std::uint64_t master_seed_ = 0;
  std::vector<Step> path_;
};

// UniformRandomBitGenerator over one stream. Single owner.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(const StreamKey& key) : id_(key.stream_id()) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return detail::mix64(id_ + counter_ * detail::kGolden);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double gaussian() { return normal_(*this); }

  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    return boost::random::uniform_int_distribution<std::uint64_t>(lo, hi)(*this);
  }

  void fill_gaussian(Eigen::Ref<Eigen::MatrixXd> out) {
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal_(*this);
  }

  [[nodiscard]] std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t id_;
  std::uint64_t counter_ = 0;
  // Boost's ziggurat; unlike std::normal_distribution its output is
  // specified independently of the standard library vendor.
  boost::random::normal_distribution<double> normal_;
};

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, const StreamKey& key) {
  detail::require(rows >= 1 && cols >= 1, "gaussian_matrix: sizes must be positive");
  Eigen::MatrixXd out(rows, cols);
  Stream stream(key);
  stream.fill_gaussian(out);
  return out;
}

// Fisher-Yates on the stream. Returns a permutation of {0, ..., p-1}.
inline std::vector<std::size_t> random_permutation(std::size_t p, Stream& stream) {
  detail::require(p >= 1, "random_permutation: p must be positive");
  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = p - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(stream.uniform_int(0, i));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

inline std::vector<std::size_t> random_permutation(std::size_t p, const StreamKey& key) {
  Stream stream(key);
  return random_permutation(p, stream);
}

}  // namespace raptt
