#include "commoncv/randgen.hpp"

#include <cmath>
#include <string>

#include "commoncv/error.hpp"

namespace commoncv {

SeededStream::SeededStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
    : master_seed_(master_seed), stream_id_(stream_id) {
  std::uint64_t x = combine_keys(master_seed, stream_id);
  for (auto& word : state_) {
    x += 0x9e3779b97f4a7c15ULL;
    word = mix64(x);
  }
  // xoshiro must not start from the all-zero state
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

double standard_normal(SeededStream& stream) noexcept {
  if (stream.has_spare_) {
    stream.has_spare_ = false;
    return stream.spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * stream.uniform() - 1.0;
    v = 2.0 * stream.uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  stream.spare_normal_ = v * factor;
  stream.has_spare_ = true;
  return u * factor;
}

double gamma_variate(SeededStream& stream, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw Error(ErrorCode::InvalidArgument, "gamma shape must be positive");
  }
  if (shape < 1.0) {
    const double boosted = gamma_variate(stream, shape + 1.0);
    return boosted * std::pow(stream.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(stream);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double chi_square(SeededStream& stream, std::int64_t df) {
  if (df < 1) {
    throw Error(ErrorCode::InvalidDf, "chi-square df must be >= 1, got " + std::to_string(df));
  }
  return 2.0 * gamma_variate(stream, 0.5 * static_cast<double>(df));
}

}  // namespace commoncv
