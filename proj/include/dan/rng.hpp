#ifndef DAN_RNG_HPP_
#define DAN_RNG_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dan {

// splitmix64 mixing, used to derive independent stream seeds (per split, etc.).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic RNG. mt19937_64 has a fully specified output sequence and a
// portable textual state; the derivations below avoid std::*_distribution,
// whose results are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller (no retained spare, so the state is
  // exactly the engine state).
  double gaussian();

  // Uniform integer in [0, n), unbiased. n must be > 0.
  std::uint64_t bounded(std::uint64_t n);

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string state() const;
  void set_state(const std::string& s);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dan

#endif  // DAN_RNG_HPP_
