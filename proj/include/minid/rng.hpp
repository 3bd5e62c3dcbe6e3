#pragma once

// Counter-based splittable generator.  Every output is a pure function of
// (key, counter), and split(idx) derives an independent stream from (key,
// idx), so draws addressed by replicate or column index reproduce bit-exactly
// no matter how work is scheduled across threads.

#include <cstdint>
#include <vector>

namespace minid {

class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) : key_(fin(seed ^ 0x9e3779b97f4a7c15ull)), ctr_(0) {}

  // Independent stream addressed by idx; counter restarts at zero.
  Rng split(std::uint64_t idx) const {
    Rng r;
    r.key_ = fin(key_ ^ fin(idx + 0x632be59bd9b4e019ull));
    r.ctr_ = 0;
    return r;
  }

  std::uint64_t next_u64() { return fin(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

  // Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential();              // rate 1
  double normal();                   // standard normal via inverse CDF
  double gamma(double shape);        // unit scale
  long poisson(double mean);
  std::uint64_t below(std::uint64_t n); // uniform on {0, ..., n-1}

  // Index distributed as softmax(logw); logw entries may be -inf.
  int categorical_log(const std::vector<double>& logw);
  int categorical(const std::vector<double>& w); // unnormalized weights >= 0

 private:
  static std::uint64_t fin(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
};

} // namespace minid
