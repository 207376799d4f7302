#include <doctest.h>

#include <cstring>
#include <fstream>

#include "fvenc/errors.hpp"
#include "fvenc/tensor_io.hpp"
#include "helpers.hpp"

using namespace fvenc;

TEST_CASE("tensor round-trips bit-exactly in f64") {
    testutil::TempDir tmp("tensor");
    Tensor t;
    t.dims = {2, 3};
    t.data = {1, 1, 1, 1, 1, 1};
    write_tensor(tmp / "ones.fvt", t);
    const Tensor back = read_tensor(tmp / "ones.fvt");
    CHECK(back.dims == t.dims);
    CHECK(back.data == t.data);

    // arbitrary payloads survive exactly
    const Matrix m = testutil::random_matrix(7, 5, 42, -100.0, 100.0);
    write_matrix(tmp / "m.fvt", m);
    const Matrix m2 = read_matrix(tmp / "m.fvt");
    REQUIRE(m2.rows() == m.rows());
    CHECK(std::memcmp(m.data(), m2.data(), sizeof(double) * m.size()) == 0);
}

TEST_CASE("f32 storage loads as doubles") {
    testutil::TempDir tmp("tensor32");
    Tensor t;
    t.dims = {4};
    t.data = {0.5, -2.25, 8.0, 0.0};  // exactly representable in float
    write_tensor(tmp / "f32.fvt", t, Dtype::f32);
    const Tensor back = read_tensor(tmp / "f32.fvt");
    CHECK(back.data == t.data);
}

TEST_CASE("bad magic is rejected with the byte offset") {
    testutil::TempDir tmp("badmagic");
    std::ofstream out(tmp / "x.fvt", std::ios::binary);
    out << "XXXX";
    const char rest[12] = {1, 1, 0, 0};
    out.write(rest, 12);
    out.close();
    CHECK_THROWS_AS(read_tensor(tmp / "x.fvt"), BadMagic);
    try {
        read_tensor(tmp / "x.fvt");
    } catch (const BadMagic& e) {
        CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
    }
}

TEST_CASE("truncated payload is rejected") {
    testutil::TempDir tmp("trunc");
    Tensor t;
    t.dims = {4};
    t.data = {1, 2, 3, 4};
    write_tensor(tmp / "t.fvt", t);
    // chop the last element off
    const auto full = std::filesystem::file_size(tmp / "t.fvt");
    std::filesystem::resize_file(tmp / "t.fvt", full - 8);
    CHECK_THROWS_AS(read_tensor(tmp / "t.fvt"), TruncatedPayload);
}

TEST_CASE("non-finite payload is rejected") {
    testutil::TempDir tmp("nonfinite");
    Tensor t;
    t.dims = {2};
    t.data = {1.0, 2.0};
    write_tensor(tmp / "n.fvt", t);
    // poke a NaN into the second element
    std::fstream f(tmp / "n.fvt", std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(8 + 8 + 8);
    const double nan = std::nan("");
    f.write(reinterpret_cast<const char*>(&nan), 8);
    f.close();
    CHECK_THROWS_AS(read_tensor(tmp / "n.fvt"), NonFiniteValue);
}

TEST_CASE("writer refuses inconsistent tensors") {
    testutil::TempDir tmp("badwrite");
    Tensor t;
    t.dims = {3};
    t.data = {1.0, 2.0};
    CHECK_THROWS_AS(write_tensor(tmp / "bad.fvt", t), SizeMismatch);
}
