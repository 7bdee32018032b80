#include "dpsur/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dpsur {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream RngStream::derive(std::uint64_t master_seed,
                            std::uint64_t stream_tag) {
  std::uint64_t state = master_seed;
  std::uint64_t mixed = splitmix64(state);
  state = mixed ^ (0xd1b54a32d192ed03ULL * (stream_tag + 1));
  return RngStream(splitmix64(state));
}

double RngStream::gaussian() {
  // u1 in (0, 1] so the log is finite; u2 in [0, 1)
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::string RngStream::save_state() const {
  std::ostringstream out;
  out << gen_;
  return out.str();
}

void RngStream::restore_state(const std::string& state) {
  std::istringstream in(state);
  in >> gen_;
  if (in.fail()) throw std::runtime_error("RngStream: malformed saved state");
}

}  // namespace dpsur
