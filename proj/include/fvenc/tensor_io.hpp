#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fvenc/linalg.hpp"

namespace fvenc {

// `FVT1` tensor file, little-endian:
//   offset 0   4 bytes   magic "FVT1"
//   offset 4   1 byte    dtype: 0 = float32, 1 = float64
//   offset 5   1 byte    ndim
//   offset 6   2 bytes   reserved, must be zero
//   offset 8   ndim x u64 dims
//   then       row-major payload, product(dims) elements
//
// All values are materialized as 64-bit floats in memory regardless of the
// storage dtype.

enum class Dtype : std::uint8_t { f32 = 0, f64 = 1 };

struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;  // row-major

    std::uint64_t element_count() const;
};

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor,
                  Dtype storage = Dtype::f64);

// 2-D helpers for the common matrix-on-disk case.
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  Dtype storage = Dtype::f64);

Matrix tensor_to_matrix(const Tensor& tensor);
Tensor matrix_to_tensor(const Matrix& m);

}  // namespace fvenc
