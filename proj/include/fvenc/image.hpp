#pragma once

#include <filesystem>
#include <vector>

namespace fvenc {

// Grayscale raster, optionally volumetric. Pixels are row-major
// (depth-major for volumes) brightness values.
struct GrayImage {
    int width = 0;
    int height = 0;
    int depth = 1;  // 1 for plain 2-D images
    std::vector<double> pixels;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height * depth;
    }
    bool is_volume() const { return depth > 1; }
};

// Binary PGM (P5), maxval <= 65535. Pixels are scaled to [0,1] by division
// by maxval. Two-byte samples are big-endian per the Netpbm convention.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image, int maxval = 255);

// Dispatches on extension: .pgm goes through read_pgm, .fvt/.fvt1 tensors
// (2-D [h,w] or 3-D [d,h,w]) become images with brightness as stored.
GrayImage load_image(const std::filesystem::path& path);

}  // namespace fvenc
