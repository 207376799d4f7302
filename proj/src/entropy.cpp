#include "fvenc/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "fvenc/errors.hpp"
#include "fvenc/parallel.hpp"

namespace fvenc {

double image_entropy(const GrayImage& image, int bins) {
    if (bins < 1) throw ConfigError("bin count must be >= 1");
    if (image.pixels.empty()) throw EmptyImage("image has no pixels");

    const auto [min_it, max_it] = std::minmax_element(image.pixels.begin(), image.pixels.end());
    const double lo = *min_it;
    const double hi = *max_it;
    if (lo == hi) return 0.0;  // single outcome

    // Edges: edge[i] = (i/bins)*(hi-lo) + lo. A value x lands in the first
    // bin i with edge[i-1] < x <= edge[i]; the minimum belongs to bin 1.
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i)
        edges[static_cast<std::size_t>(i)] = (static_cast<double>(i) / bins) * (hi - lo) + lo;

    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double x : image.pixels) {
        std::size_t bin;
        if (x <= edges[0]) {
            bin = 0;
        } else {
            const auto it = std::lower_bound(edges.begin() + 1, edges.end(), x);
            bin = it == edges.end() ? static_cast<std::size_t>(bins) - 1
                                    : static_cast<std::size_t>(it - edges.begin()) - 1;
        }
        ++counts[bin];
    }

    const double total = static_cast<double>(image.pixels.size());
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log(p);
    }
    return std::max(h, 0.0);
}

EntropyRanking rank_and_select(const DatasetManifest& manifest, int bins, std::size_t cap,
                               const ImageLoader& loader, int threads) {
    if (cap < 1) throw ConfigError("sample cap must be >= 1");
    const ImageLoader load = loader ? loader : ImageLoader(&load_image);

    const std::size_t n = manifest.samples.size();
    std::vector<double> entropies(n, 0.0);
    std::vector<std::string> failures(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const Sample& sample = manifest.samples[i];
        if (!sample.image_path) {
            failures[i] = "sample '" + sample.id + "' has no image path";
            return;
        }
        try {
            entropies[i] = image_entropy(load(manifest.resolve(*sample.image_path)), bins);
        } catch (const Error& e) {
            failures[i] = "sample '" + sample.id + "': " + e.what();
        }
    });
    for (const std::string& f : failures)
        if (!f.empty()) throw MissingPath(f);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (entropies[a] != entropies[b]) return entropies[a] > entropies[b];
        return a < b;  // manifest position breaks ties
    });

    EntropyRanking ranking;
    ranking.bin_count = bins;
    const std::size_t keep = std::min(cap, n);
    ranking.entries.reserve(keep);
    for (std::size_t r = 0; r < keep; ++r)
        ranking.entries.push_back({manifest.samples[order[r]].id, entropies[order[r]]});
    return ranking;
}

void save_ranking(const EntropyRanking& ranking, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["bin_count"] = ranking.bin_count;
    doc["entries"] = nlohmann::ordered_json::array();
    for (const auto& entry : ranking.entries)
        doc["entries"].push_back({{"sample_id", entry.sample_id}, {"entropy", entry.entropy}});
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw MissingPath("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << "\n";
}

EntropyRanking load_ranking(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingPath("cannot open ranking " + path.string());
    nlohmann::json doc;
    in >> doc;
    EntropyRanking ranking;
    ranking.bin_count = doc.at("bin_count").get<int>();
    for (const auto& item : doc.at("entries"))
        ranking.entries.push_back(
            {item.at("sample_id").get<std::string>(), item.at("entropy").get<double>()});
    return ranking;
}

}  // namespace fvenc
