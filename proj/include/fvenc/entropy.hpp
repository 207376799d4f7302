#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fvenc/image.hpp"
#include "fvenc/manifest.hpp"

namespace fvenc {

// Shannon entropy (nats) of an image's brightness values over `bins` evenly
// spaced bins between the observed min and max. Bins are half-open on the
// left, except the first bin which also owns the minimum value. A constant
// image has entropy 0. Works on raw stored brightness; the ranking is
// invariant to positive affine rescaling, so no prior normalization matters.
double image_entropy(const GrayImage& image, int bins);

struct EntropyRanking {
    struct Entry {
        std::string sample_id;
        double entropy = 0.0;
    };
    // Sorted by entropy descending, ties broken by ascending manifest position.
    std::vector<Entry> entries;
    int bin_count = 0;
};

using ImageLoader = std::function<GrayImage(const std::filesystem::path&)>;

// Ranks all manifest samples by entropy and keeps the top min(cap, size).
// Loader defaults to load_image; pipeline code substitutes an access-logging
// wrapper. Evaluation may be parallel; the returned order never depends on it.
EntropyRanking rank_and_select(const DatasetManifest& manifest, int bins, std::size_t cap,
                               const ImageLoader& loader = {}, int threads = 1);

void save_ranking(const EntropyRanking& ranking, const std::filesystem::path& path);
EntropyRanking load_ranking(const std::filesystem::path& path);

}  // namespace fvenc
