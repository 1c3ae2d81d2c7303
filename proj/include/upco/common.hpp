#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace upco {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Absolute slack allowed on linear constraints (double precision, d <= 32).
inline constexpr double kGeomTol = 1e-9;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random stream. Streams split from the same parent with different
// tags are independent; splitting depends only on the parent seed, never on
// how much of the parent stream has been consumed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

  RngStream split(std::uint64_t tag) const {
    return RngStream(splitmix64(seed_ ^ (0x632be59bd9b4e019ULL * (tag + 1))));
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::int64_t uniform_int(std::int64_t n) {  // [0, n)
    return static_cast<std::int64_t>(eng_() % static_cast<std::uint64_t>(n));
  }

  double normal() {
    // Box-Muller; stateless so split/copy semantics stay simple.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vec normal_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      const auto j = uniform_int(i + 1);
      std::swap(first[i], first[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string format_double(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace upco
