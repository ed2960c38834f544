#pragma once

#include "engel/frame_algebra.hpp"

#include <cstdint>
#include <vector>

namespace engel {

//! Halton sequence with a seeded Cranley-Patterson rotation.
class HaltonSampler
{
  public:
    HaltonSampler(int dim, std::uint64_t seed);
    //! i-th point of the unit cube.
    Vec unit(std::size_t i) const;

  private:
    int dim_;
    Vec shift_;
};

//! First n points of the domain (predicate rejections are skipped, so the
//! index stream is longer than n when a predicate is present).
std::vector<Vec> sample_domain(Domain const& d, std::size_t n, std::uint64_t seed);

//! Worker count: set_worker_count override, then ENGEL_LAB_THREADS, then the
//! OpenMP default.
int worker_count();
//! n <= 0 clears the override.
void set_worker_count(int n);

}  // namespace engel
