#include "dpsur/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dpsur {

namespace {

constexpr char kMagic[8] = {'D', 'P', 'S', 'U', 'R', 'C', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_f64_vec(std::ostream& out, const std::vector<double>& v) {
  write_u64(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double read_f64(std::istream& in) {
  double v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::string read_string(std::istream& in) {
  const std::uint64_t n = read_u64(in);
  if (n > (1ULL << 24)) throw std::runtime_error("checkpoint: oversized string");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}
std::vector<double> read_f64_vec(std::istream& in) {
  const std::uint64_t n = read_u64(in);
  if (n > (1ULL << 28)) throw std::runtime_error("checkpoint: oversized vector");
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(ckpt.params.shape.kind));
  write_u32(out, static_cast<std::uint32_t>(ckpt.params.shape.input_dim));
  write_u32(out, static_cast<std::uint32_t>(ckpt.params.shape.num_classes));
  write_u32(out, static_cast<std::uint32_t>(ckpt.params.shape.hidden_dim));
  write_f64_vec(out, ckpt.params.weights);
  write_f64_vec(out, ckpt.params.momentum);
  write_u64(out, static_cast<std::uint64_t>(ckpt.ledger.accepted_updates));
  write_f64(out, ckpt.ledger.train_spec.sampling_rate);
  write_f64(out, ckpt.ledger.train_spec.noise_multiplier);
  write_u32(out, ckpt.ledger.valid_spec ? 1u : 0u);
  write_f64(out, ckpt.ledger.valid_spec ? ckpt.ledger.valid_spec->sampling_rate
                                        : 0.0);
  write_f64(out, ckpt.ledger.valid_spec
                     ? ckpt.ledger.valid_spec->noise_multiplier
                     : 0.0);
  write_f64(out, ckpt.ledger.delta);
  write_string(out, ckpt.rng_states.init);
  write_string(out, ckpt.rng_states.train_sample);
  write_string(out, ckpt.rng_states.grad_noise);
  write_string(out, ckpt.rng_states.valid_sample);
  write_string(out, ckpt.rng_states.valid_noise);
  if (!out) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
  const std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  Checkpoint ckpt;
  ckpt.params.shape.kind = static_cast<ModelKind>(read_u32(in));
  ckpt.params.shape.input_dim = static_cast<int>(read_u32(in));
  ckpt.params.shape.num_classes = static_cast<int>(read_u32(in));
  ckpt.params.shape.hidden_dim = static_cast<int>(read_u32(in));
  ckpt.params.weights = read_f64_vec(in);
  ckpt.params.momentum = read_f64_vec(in);
  ckpt.ledger.accepted_updates = static_cast<long>(read_u64(in));
  ckpt.ledger.train_spec.sampling_rate = read_f64(in);
  ckpt.ledger.train_spec.noise_multiplier = read_f64(in);
  const bool has_valid = read_u32(in) != 0;
  const double qv = read_f64(in);
  const double sv = read_f64(in);
  if (has_valid) ckpt.ledger.valid_spec = SubsampledGaussianSpec{qv, sv};
  ckpt.ledger.delta = read_f64(in);
  ckpt.rng_states.init = read_string(in);
  ckpt.rng_states.train_sample = read_string(in);
  ckpt.rng_states.grad_noise = read_string(in);
  ckpt.rng_states.valid_sample = read_string(in);
  ckpt.rng_states.valid_noise = read_string(in);
  if (!in) throw std::runtime_error("checkpoint: truncated file '" + path + "'");
  return ckpt;
}

}  // namespace dpsur
