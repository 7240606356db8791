#include "mcd/rng.hpp"

#include <cmath>

namespace mcd {

ZipfSampler::ZipfSampler(std::uint64_t n, double theta) {
  if (n == 0) throw SimError("ZipfSampler: n == 0");
  cdf_.resize(n);
  double acc = 0;
  for (std::uint64_t k = 0; k < n; ++k) {
    acc += theta == 0.0 ? 1.0 : 1.0 / std::pow(static_cast<double>(k + 1), theta);
    cdf_[k] = acc;
  }
  for (double& v : cdf_) v /= acc;
  cdf_.back() = 1.0;  // guard against rounding
}

std::uint64_t ZipfSampler::sample(Rng& rng) const {
  const double u = rng.next_double();
  std::size_t lo = 0, hi = cdf_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cdf_[mid] <= u)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace mcd
