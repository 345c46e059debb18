#include <string>

#include "commoncv/error.hpp"
#include "commoncv/gpq.hpp"
#include "commoncv/randgen.hpp"
#include "pivotal_kernel.hpp"

namespace commoncv::reference {

PivotalDrawSet generate_all_draws(const Study& study, std::int64_t m, std::uint64_t seed) {
  if (m < kMinDraws) throw Error(ErrorCode::InvalidArgument, "too few draws");
  const std::size_t k = study.k();
  PivotalDrawSet set;
  set.seed = seed;

  for (std::int64_t r = 0; r < m; ++r) {
    bool done = false;
    for (int attempt = 0; attempt < detail::kMaxAttempts && !done; ++attempt) {
      SeededStream stream(seed, detail::replicate_stream_id(r, attempt));
      std::vector<double> u(k);
      std::vector<double> z(k);
      for (std::size_t i = 0; i < k; ++i) u[i] = chi_square(stream, study.group(i).n() - 1);
      for (std::size_t i = 0; i < k; ++i) z[i] = standard_normal(stream);
      const double z_common = standard_normal(stream);
      try {
        const double t1 = t1_draw(study, u, z);
        const double t2 = t2_draw(study, u, z_common);
        if (!std::isfinite(t1) || !std::isfinite(t2)) throw Error(ErrorCode::DegenerateDenominator, "");
        set.tian.push_back(t1);
        set.fresh.push_back(t2);
        set.combined.push_back(t3_draw(t1, t2));
        done = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateDenominator) throw;
        ++set.rejected;
      }
    }
    if (!done) throw Error(ErrorCode::DegenerateRate, "replicate " + std::to_string(r) + " is degenerate");
  }
  if (static_cast<double>(set.rejected) >
      detail::kMaxRejectedFraction * static_cast<double>(m + set.rejected)) {
    throw Error(ErrorCode::DegenerateRate, "too many degenerate replicates");
  }
  return set;
}

}  // namespace commoncv::reference
