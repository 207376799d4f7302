#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fvenc/entropy.hpp"
#include "fvenc/errors.hpp"
#include "fvenc/image.hpp"
#include "helpers.hpp"

using namespace fvenc;

namespace {

// Literal histogram: per pixel, scan the bins computed from the edge formula
// until one owns it; min goes to bin 1, values past the last edge clamp.
double entropy_oracle(const std::vector<double>& pixels, int bins) {
    const double lo = *std::min_element(pixels.begin(), pixels.end());
    const double hi = *std::max_element(pixels.begin(), pixels.end());
    if (lo == hi) return 0.0;
    std::vector<double> edges(bins + 1);
    for (int i = 0; i <= bins; ++i) edges[i] = (static_cast<double>(i) / bins) * (hi - lo) + lo;

    std::vector<int> counts(bins, 0);
    for (double x : pixels) {
        int bin = bins - 1;
        if (x <= edges[0]) {
            bin = 0;
        } else {
            for (int i = 1; i <= bins; ++i) {
                if (edges[i - 1] < x && x <= edges[i]) {
                    bin = i - 1;
                    break;
                }
            }
        }
        ++counts[bin];
    }
    double h = 0.0;
    for (int c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(pixels.size());
        h -= p * std::log(p);
    }
    return h;
}

GrayImage image_of(std::vector<double> pixels, int width, int height) {
    GrayImage image;
    image.width = width;
    image.height = height;
    image.pixels = std::move(pixels);
    return image;
}

}  // namespace

TEST_CASE("constant image has zero entropy") {
    const GrayImage image = image_of(std::vector<double>(64, 0.37), 8, 8);
    CHECK(image_entropy(image, 256) == 0.0);
}

TEST_CASE("balanced two-level image hits log 2") {
    std::vector<double> pixels(64, 0.0);
    for (int i = 32; i < 64; ++i) pixels[i] = 1.0;
    const GrayImage image = image_of(pixels, 8, 8);
    CHECK(image_entropy(image, 2) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
    CHECK(image_entropy(image, 256) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("matches the scalar histogram oracle on random images") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> pixels(64);
        for (double& p : pixels) p = dist(gen);
        const GrayImage image = image_of(pixels, 8, 8);
        const double expected = entropy_oracle(pixels, 256);
        CHECK(image_entropy(image, 256) == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("entropy is orderless and affine-invariant") {
    // dyadic pixel values and dyadic affine coefficients keep the arithmetic
    // exact, so invariance holds bit-for-bit
    std::mt19937 gen(11);
    std::uniform_int_distribution<int> level(0, 1023);
    std::uniform_int_distribution<int> pick_a(0, 5);
    std::uniform_int_distribution<int> pick_b(-8, 8);
    const double a_choices[6] = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> pixels(49);
        for (double& p : pixels) p = level(gen) / 1024.0;
        const GrayImage image = image_of(pixels, 7, 7);
        const double h = image_entropy(image, 64);
        CHECK(h >= 0.0);
        CHECK(h <= std::log(64.0) + 1e-12);

        std::vector<double> shuffled = pixels;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        CHECK(image_entropy(image_of(shuffled, 7, 7), 64) == h);

        const double a = a_choices[pick_a(gen)];
        const double b = pick_b(gen) / 8.0;
        std::vector<double> rescaled(pixels.size());
        for (std::size_t i = 0; i < pixels.size(); ++i) rescaled[i] = a * pixels[i] + b;
        CHECK(image_entropy(image_of(rescaled, 7, 7), 64) == h);
    }
}

TEST_CASE("empty image is an error") {
    GrayImage image;
    CHECK_THROWS_AS(image_entropy(image, 16), EmptyImage);
}

TEST_CASE("rank_and_select orders by entropy with manifest-position ties") {
    testutil::TempDir tmp("rank");
    // three images: flat (H=0), four levels (H=log4), two levels (H=log2)
    std::vector<std::vector<double>> sets = {
        std::vector<double>(16, 0.5),
        {0, 0, 0, 0, .25, .25, .25, .25, .5, .5, .5, .5, 1, 1, 1, 1},
        {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1},
    };
    DatasetManifest manifest;
    manifest.task = Task::binary;
    manifest.num_labels = 1;
    manifest.base_dir = tmp.path();
    for (std::size_t i = 0; i < sets.size(); ++i) {
        GrayImage image = image_of(sets[i], 4, 4);
        const std::string name = "img" + std::to_string(i) + ".pgm";
        write_pgm(tmp / name, image);
        Sample s;
        s.id = "s" + std::to_string(i);
        s.image_path = name;
        s.labels = {0};
        manifest.samples.push_back(s);
    }

    const EntropyRanking top2 = rank_and_select(manifest, 256, 2);
    REQUIRE(top2.entries.size() == 2);
    CHECK(top2.entries[0].sample_id == "s1");
    CHECK(top2.entries[1].sample_id == "s2");

    // no cap: all three, descending
    const EntropyRanking all = rank_and_select(manifest, 256, 10);
    REQUIRE(all.entries.size() == 3);
    CHECK(all.entries[2].sample_id == "s0");
    CHECK(std::is_sorted(all.entries.begin(), all.entries.end(),
                         [](const auto& x, const auto& y) { return x.entropy > y.entropy; }));

    // parallel evaluation returns the same order
    const EntropyRanking parallel = rank_and_select(manifest, 256, 10, {}, 4);
    for (std::size_t i = 0; i < all.entries.size(); ++i) {
        CHECK(parallel.entries[i].sample_id == all.entries[i].sample_id);
        CHECK(parallel.entries[i].entropy == all.entries[i].entropy);
    }
}

TEST_CASE("identical constant images tie-break by manifest position") {
    testutil::TempDir tmp("rank_tie");
    DatasetManifest manifest;
    manifest.task = Task::binary;
    manifest.num_labels = 1;
    manifest.base_dir = tmp.path();
    for (int i = 0; i < 2; ++i) {
        write_pgm(tmp / ("c" + std::to_string(i) + ".pgm"),
                  image_of(std::vector<double>(16, 0.25), 4, 4));
        Sample s;
        s.id = "c" + std::to_string(i);
        s.image_path = "c" + std::to_string(i) + ".pgm";
        s.labels = {0};
        manifest.samples.push_back(s);
    }
    const EntropyRanking ranking = rank_and_select(manifest, 256, 1);
    REQUIRE(ranking.entries.size() == 1);
    CHECK(ranking.entries[0].sample_id == "c0");
}
