#include "fvenc/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "fvenc/errors.hpp"
#include "fvenc/tensor_io.hpp"

namespace fvenc {

namespace {

// Reads one header token, skipping whitespace and # comments.
std::string next_token(std::istream& in) {
    std::string token;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    return token;
}

int parse_positive(const std::string& token, const char* what) {
    if (token.empty()) throw CorruptHeader(std::string("missing ") + what);
    for (char c : token)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw CorruptHeader(std::string("non-numeric ") + what + " '" + token + "'");
    const long value = std::stol(token);
    if (value <= 0) throw CorruptHeader(std::string(what) + " must be positive");
    return static_cast<int>(value);
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingPath("cannot open image file " + path.string());

    const std::string magic = next_token(in);
    if (magic == "P2" || magic == "P1" || magic == "P3" || magic == "P6")
        throw UnsupportedFormat("only binary PGM (P5) is supported, got " + magic);
    if (magic != "P5") throw CorruptHeader("not a PGM file: " + path.string());

    GrayImage image;
    image.width = parse_positive(next_token(in), "width");
    image.height = parse_positive(next_token(in), "height");
    const int maxval = parse_positive(next_token(in), "maxval");
    if (maxval > 65535) throw UnsupportedFormat("maxval " + std::to_string(maxval) + " > 65535");

    const std::size_t count = static_cast<std::size_t>(image.width) * image.height;
    image.pixels.resize(count);
    const double scale = 1.0 / maxval;
    if (maxval < 256) {
        std::vector<unsigned char> raw(count);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in.gcount()) < count)
            throw CorruptHeader("pixel data cut short in " + path.string());
        for (std::size_t i = 0; i < count; ++i) image.pixels[i] = raw[i] * scale;
    } else {
        std::vector<unsigned char> raw(count * 2);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 2));
        if (static_cast<std::size_t>(in.gcount()) < count * 2)
            throw CorruptHeader("pixel data cut short in " + path.string());
        for (std::size_t i = 0; i < count; ++i) {
            const unsigned value = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
            image.pixels[i] = value * scale;
        }
    }
    return image;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image, int maxval) {
    if (image.is_volume()) throw UnsupportedFormat("PGM cannot store volumes");
    if (maxval < 1 || maxval > 65535) throw UnsupportedFormat("maxval out of range");
    if (image.pixels.size() != image.pixel_count())
        throw SizeMismatch("pixel buffer does not match image dims");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw MissingPath("cannot open " + path.string() + " for writing");
    out << "P5\n" << image.width << " " << image.height << "\n" << maxval << "\n";
    for (double v : image.pixels) {
        const double clamped = std::clamp(v, 0.0, 1.0);
        const unsigned q = static_cast<unsigned>(std::lround(clamped * maxval));
        if (maxval < 256) {
            const unsigned char b = static_cast<unsigned char>(q);
            out.write(reinterpret_cast<const char*>(&b), 1);
        } else {
            const unsigned char hi = static_cast<unsigned char>(q >> 8);
            const unsigned char lo = static_cast<unsigned char>(q & 0xFF);
            out.write(reinterpret_cast<const char*>(&hi), 1);
            out.write(reinterpret_cast<const char*>(&lo), 1);
        }
    }
    if (!out) throw MissingPath("write failed for " + path.string());
}

GrayImage load_image(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".fvt" || ext == ".fvt1") {
        const Tensor tensor = read_tensor(path);
        GrayImage image;
        if (tensor.dims.size() == 2) {
            image.height = static_cast<int>(tensor.dims[0]);
            image.width = static_cast<int>(tensor.dims[1]);
        } else if (tensor.dims.size() == 3) {
            image.depth = static_cast<int>(tensor.dims[0]);
            image.height = static_cast<int>(tensor.dims[1]);
            image.width = static_cast<int>(tensor.dims[2]);
        } else {
            throw UnsupportedFormat("image tensor must be 2-D or 3-D: " + path.string());
        }
        image.pixels = tensor.data;
        return image;
    }
    throw UnsupportedFormat("unknown image extension '" + ext + "'");
}

}  // namespace fvenc
