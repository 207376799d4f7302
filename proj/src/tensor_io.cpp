#include "fvenc/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "fvenc/errors.hpp"

namespace fvenc {

namespace {

constexpr char kMagic[4] = {'F', 'V', 'T', '1'};
constexpr std::size_t kHeaderFixed = 8;  // magic + dtype + ndim + reserved

static_assert(std::endian::native == std::endian::little,
              "FVT1 IO assumes a little-endian host");

std::string at_offset(std::uint64_t offset) {
    return " (byte offset " + std::to_string(offset) + ")";
}

}  // namespace

std::uint64_t Tensor::element_count() const {
    std::uint64_t n = 1;
    for (std::uint64_t d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingPath("cannot open tensor file " + path.string());

    char header[kHeaderFixed];
    in.read(header, kHeaderFixed);
    if (in.gcount() < static_cast<std::streamsize>(kHeaderFixed))
        throw TruncatedPayload("header shorter than 8 bytes in " + path.string() +
                               at_offset(static_cast<std::uint64_t>(in.gcount())));
    if (std::memcmp(header, kMagic, 4) != 0)
        throw BadMagic("expected FVT1 in " + path.string() + at_offset(0));

    const auto dtype_byte = static_cast<std::uint8_t>(header[4]);
    if (dtype_byte > 1)
        throw BadMagic("unknown dtype byte " + std::to_string(dtype_byte) + " in " +
                       path.string() + at_offset(4));
    if (header[6] != 0 || header[7] != 0)
        throw BadMagic("reserved bytes not zero in " + path.string() + at_offset(6));
    const auto ndim = static_cast<std::size_t>(static_cast<std::uint8_t>(header[5]));

    Tensor tensor;
    tensor.dims.resize(ndim);
    std::uint64_t offset = kHeaderFixed;
    for (std::size_t i = 0; i < ndim; ++i) {
        std::uint64_t d = 0;
        in.read(reinterpret_cast<char*>(&d), sizeof(d));
        if (in.gcount() < static_cast<std::streamsize>(sizeof(d)))
            throw TruncatedPayload("dims cut short in " + path.string() + at_offset(offset));
        if (d == 0)
            throw BadMagic("zero dimension in " + path.string() + at_offset(offset));
        tensor.dims[i] = d;
        offset += sizeof(d);
    }

    const std::uint64_t count = tensor.element_count();
    const std::size_t elem_size = dtype_byte == 0 ? 4 : 8;
    tensor.data.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        double value;
        if (dtype_byte == 0) {
            float f;
            in.read(reinterpret_cast<char*>(&f), 4);
            value = static_cast<double>(f);
        } else {
            in.read(reinterpret_cast<char*>(&value), 8);
        }
        if (in.gcount() < static_cast<std::streamsize>(elem_size))
            throw TruncatedPayload("payload declares " + std::to_string(count) +
                                   " elements in " + path.string() + at_offset(offset));
        if (!std::isfinite(value))
            throw NonFiniteValue("element " + std::to_string(i) + " in " + path.string() +
                                 at_offset(offset));
        tensor.data[i] = value;
        offset += elem_size;
    }
    return tensor;
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor, Dtype storage) {
    if (tensor.element_count() != tensor.data.size())
        throw SizeMismatch("tensor dims do not match payload length");
    for (double v : tensor.data)
        if (!std::isfinite(v)) throw NonFiniteValue("refusing to write non-finite tensor");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw MissingPath("cannot open " + path.string() + " for writing");

    out.write(kMagic, 4);
    const std::uint8_t dtype_byte = static_cast<std::uint8_t>(storage);
    const std::uint8_t ndim = static_cast<std::uint8_t>(tensor.dims.size());
    const std::uint8_t reserved[2] = {0, 0};
    out.write(reinterpret_cast<const char*>(&dtype_byte), 1);
    out.write(reinterpret_cast<const char*>(&ndim), 1);
    out.write(reinterpret_cast<const char*>(reserved), 2);
    for (std::uint64_t d : tensor.dims)
        out.write(reinterpret_cast<const char*>(&d), sizeof(d));

    if (storage == Dtype::f32) {
        for (double v : tensor.data) {
            const float f = static_cast<float>(v);
            out.write(reinterpret_cast<const char*>(&f), 4);
        }
    } else {
        out.write(reinterpret_cast<const char*>(tensor.data.data()),
                  static_cast<std::streamsize>(tensor.data.size() * 8));
    }
    if (!out) throw MissingPath("write failed for " + path.string());
}

Matrix tensor_to_matrix(const Tensor& tensor) {
    if (tensor.dims.size() != 2)
        throw SizeMismatch("expected a 2-D tensor, got " +
                           std::to_string(tensor.dims.size()) + " dims");
    const auto rows = static_cast<Index>(tensor.dims[0]);
    const auto cols = static_cast<Index>(tensor.dims[1]);
    Matrix m(rows, cols);
    std::memcpy(m.data(), tensor.data.data(), tensor.data.size() * sizeof(double));
    return m;
}

Tensor matrix_to_tensor(const Matrix& m) {
    Tensor tensor;
    tensor.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    tensor.data.assign(m.data(), m.data() + m.size());
    return tensor;
}

Matrix read_matrix(const std::filesystem::path& path) {
    return tensor_to_matrix(read_tensor(path));
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, Dtype storage) {
    write_tensor(path, matrix_to_tensor(m), storage);
}

}  // namespace fvenc
