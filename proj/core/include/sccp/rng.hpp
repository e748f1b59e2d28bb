#pragma once

#include <cstdint>

namespace sccp {

// Counter-based stream: the n-th draw is a pure function of
// (seed, run index, n), so runs of an ensemble get independent,
// reproducible substreams and replaying a run never depends on shared
// state.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t run = 0);

  uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  // Exponential with the given rate.
  double exponential(double rate = 1.0);

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace sccp
