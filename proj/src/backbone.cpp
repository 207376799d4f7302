#include "fvenc/backbone.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "fvenc/errors.hpp"
#include "fvenc/rng.hpp"

namespace fvenc {

namespace {

// Substream tags for per-stage weight derivation.
constexpr std::uint64_t kProjStream = 0x10;
constexpr std::uint64_t kAttnStream = 0x20;

Matrix patchify(const GrayImage& image, int patch) {
    const int px = image.width / patch;
    const int py = image.height / patch;
    const int pz = image.is_volume() ? image.depth / patch : 1;
    const int zstep = image.is_volume() ? patch : 1;
    const Index patch_len = static_cast<Index>(patch) * patch * zstep;

    Matrix tokens(static_cast<Index>(px) * py * pz, patch_len);
    const auto pixel = [&](int z, int y, int x) {
        return image.pixels[(static_cast<std::size_t>(z) * image.height + y) * image.width + x];
    };
    Index row = 0;
    for (int bz = 0; bz < pz; ++bz)
        for (int by = 0; by < py; ++by)
            for (int bx = 0; bx < px; ++bx, ++row) {
                Index col = 0;
                for (int z = 0; z < zstep; ++z)
                    for (int y = 0; y < patch; ++y)
                        for (int x = 0; x < patch; ++x, ++col)
                            tokens(row, col) =
                                pixel(bz * zstep + z, by * patch + y, bx * patch + x);
            }
    return tokens;
}

}  // namespace

std::vector<StageFeatures> extract_stages(const GrayImage& image, const BackboneConfig& config) {
    if (config.stages.empty()) throw BadConfig("no stages configured");
    if (image.pixels.size() != image.pixel_count())
        throw BadConfig("image buffer does not match its dims");

    int dims_gcd = 0;
    for (const StageSpec& stage : config.stages) {
        if (stage.patch_size < 1 || stage.dim < 1)
            throw BadConfig("stage patch size and dim must be positive");
        dims_gcd = std::gcd(dims_gcd, stage.dim);
    }
    if (config.stages.size() > 1 && dims_gcd <= 1)
        throw BadConfig("stage dims must share a common divisor > 1");

    for (const StageSpec& stage : config.stages) {
        const int p = stage.patch_size;
        if (image.width % p != 0 || image.height % p != 0 ||
            (image.is_volume() && image.depth % p != 0))
            throw IndivisibleImage("image " + std::to_string(image.width) + "x" +
                                   std::to_string(image.height) +
                                   " not divisible by patch size " + std::to_string(p));
    }

    std::vector<StageFeatures> features;
    features.reserve(config.stages.size());
    for (const StageSpec& stage : config.stages) {
        const Matrix patches = patchify(image, stage.patch_size);
        const Index f = patches.cols();

        const std::uint64_t stage_tag = static_cast<std::uint64_t>(stage.stage_index);
        Rng proj_rng(derive_seed(config.seed, kProjStream + stage_tag));
        const double bound = 1.0 / std::sqrt(static_cast<double>(f));
        Matrix proj(f, stage.dim);
        for (Index i = 0; i < f; ++i)
            for (Index j = 0; j < stage.dim; ++j) proj(i, j) = proj_rng.uniform(-bound, bound);

        const Matrix projected = patches * proj;
        const AttentionParams params = make_attention_params(
            stage.dim, stage.dim, derive_seed(config.seed, kAttnStream + stage_tag));

        StageFeatures out;
        out.stage_index = stage.stage_index;
        out.tokens = config.kind == AttentionKind::softmax
                         ? softmax_attention(projected, params)
                         : relu_linear_attention(projected, params, config.eps);
        features.push_back(std::move(out));
    }
    return features;
}

}  // namespace fvenc
