#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace dpsur {

// splitmix64 step; used to derive independent stream seeds from one master
// seed so that consuming one stream never perturbs another.
std::uint64_t splitmix64(std::uint64_t& state);

// A seeded random stream. Gaussian draws use plain Box-Muller with a fixed
// consumption of two 64-bit words per draw and no cached state, so replay
// and checkpointing stay exact.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  static RngStream derive(std::uint64_t master_seed, std::uint64_t stream_tag);

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1) with 53-bit resolution
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double gaussian();

  bool bernoulli(double p) { return uniform() < p; }

  std::string save_state() const;
  void restore_state(const std::string& state);

  bool operator==(const RngStream& other) const { return gen_ == other.gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace dpsur
