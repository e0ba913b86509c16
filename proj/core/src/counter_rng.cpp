#include "polylab/counter_rng.hpp"

#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace polylab::rng {
namespace {

// Uniform random bit generator over the words mix64(key + i * golden).
class KeyStream {
 public:
  using result_type = std::uint64_t;
  explicit KeyStream(std::uint64_t key) noexcept : state_(key) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

}  // namespace

std::pair<double, double> normal_pair(std::uint64_t key_hash) noexcept {
  KeyStream stream(key_hash);
  boost::random::normal_distribution<double> normal;
  const double first = normal(stream);
  return {first, normal(stream)};
}

}  // namespace polylab::rng
