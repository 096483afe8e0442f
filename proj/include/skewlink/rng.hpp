#pragma once

#include <array>
#include <cstdint>

namespace skewlink {

// Philox4x32-10 counter-based generator (Salmon et al. 2011). Output is a
// pure function of (key, counter), so independent substreams are cheap and
// a stream can be consumed from any number of threads deterministically:
// substream s of seed k owns the counter block with high word s.
class CounterRng {
 public:
  CounterRng() : CounterRng(0, 0) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = static_cast<std::uint32_t>(stream);
    ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
    buf_pos_ = 4;
  }

  // A fresh generator over a disjoint counter block of the same seed.
  CounterRng substream(std::uint64_t s) const {
    CounterRng r;
    r.key_ = key_;
    r.ctr_ = {0, 0, static_cast<std::uint32_t>(s),
              static_cast<std::uint32_t>(s >> 32)};
    r.buf_pos_ = 4;
    return r;
  }

  std::uint32_t next_u32() {
    if (buf_pos_ == 4) refill();
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double next_double() {
    // 53-bit mantissa, offset by half an ulp.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // UniformRandomBitGenerator interface.
  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }
  result_type operator()() { return next_u32(); }

 private:
  static std::uint64_t mulhilo(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint64_t>(a) * b;
  }

  void refill() {
    std::array<std::uint32_t, 4> c = ctr_;
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = mulhilo(0xD2511F53u, c[0]);
      const std::uint64_t p1 = mulhilo(0xCD9E8D57u, c[2]);
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0,
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1,
           static_cast<std::uint32_t>(p0)};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    buf_ = c;
    buf_pos_ = 0;
    // 64-bit position counter within the stream's block.
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> buf_;
  int buf_pos_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Derives a fresh 64-bit key so nested components never share streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

// Standard normal via inverse cdf: one uniform per deviate, which keeps
// stream consumption deterministic across code paths.
double normal_draw(CounterRng& rng);

// Gamma(shape, scale) by inversion.
double gamma_draw(CounterRng& rng, double shape, double scale);

// Chi-squared with nu degrees of freedom.
double chisq_draw(CounterRng& rng, double nu);

}  // namespace skewlink
