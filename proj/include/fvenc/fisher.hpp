#pragma once

#include <cstddef>

#include "fvenc/gmm.hpp"
#include "fvenc/linalg.hpp"

namespace fvenc {

// Fixed-length orderless descriptor of a local-feature set under a GMM.
// Layout: [weight gradients (K) | mean gradients, component-major (K*d) |
// variance gradients, component-major (K*d)].
struct FisherVector {
    Vector values;
    bool normalized = false;
};

std::size_t fv_length(int components, int dim);  // K(2d+1)

// Per component k and dimension d, with responsibilities g = gamma_k(x_t):
//   weight:   sum_t (g - w_k)                 / (T sqrt(w_k))
//   mean:     sum_t g (x - mu)/sigma          / (T sqrt(w_k))
//   variance: sum_t g ((x - mu)^2/sigma^2 - 1) / (T sqrt(2 w_k))
// Invariant under any permutation or duplication of the feature rows.
FisherVector encode(const DiagGmm& gmm, const Matrix& features);

// Elementwise signed power |z|^alpha, then global L2 normalization. The zero
// vector is returned unchanged with the flag set.
FisherVector normalize(const FisherVector& fv, double alpha = 0.5);

}  // namespace fvenc
