#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "fvenc/linalg.hpp"

namespace testutil {

// Scratch directory under the system temp root, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        dir_ = std::filesystem::temp_directory_path() /
               ("fvenc_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }
    std::filesystem::path operator/(const std::string& name) const { return dir_ / name; }

  private:
    std::filesystem::path dir_;
};

template <typename A, typename B>
bool bits_equal(const A& a, const B& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (fvenc::Index i = 0; i < a.rows(); ++i)
        for (fvenc::Index j = 0; j < a.cols(); ++j)
            if (a(i, j) != b(i, j)) return false;
    return true;
}

inline fvenc::Matrix random_matrix(fvenc::Index rows, fvenc::Index cols, unsigned seed,
                                   double lo = -1.0, double hi = 1.0) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    fvenc::Matrix m(rows, cols);
    for (fvenc::Index i = 0; i < rows; ++i)
        for (fvenc::Index j = 0; j < cols; ++j) m(i, j) = dist(gen);
    return m;
}

}  // namespace testutil
