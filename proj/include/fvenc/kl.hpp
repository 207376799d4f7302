#pragma once

#include <cstdint>
#include <string>

#include "fvenc/gmm.hpp"

namespace fvenc {

struct KlEstimate {
    double value = 0.0;      // nats
    std::size_t n_samples = 0;
    double std_error = 0.0;  // sample std of the log-ratio / sqrt(n)
    std::uint64_t seed = 0;
    std::string rng;         // algorithm identifier, for replayability
};

// Monte-Carlo divergence D(f||g) ~= mean of log f(x) - log g(x) over draws
// x ~ f. Works entirely in log densities. Sampling is chunked; chunk streams
// derive from the seed and partial sums combine in chunk order, so the
// estimate is identical for any thread count.
KlEstimate kl_mc(const DiagGmm& f, const DiagGmm& g, std::size_t n, std::uint64_t seed,
                 int threads = 1);

// Closed form for the single-component diagonal case; per dimension
//   log(s_g/s_f) + (s_f^2 + (m_f - m_g)^2) / (2 s_g^2) - 1/2.
double kl_gaussian_closed(const DiagGmm& f, const DiagGmm& g);

}  // namespace fvenc
