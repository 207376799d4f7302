#include "fvenc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "fvenc/errors.hpp"
#include "fvenc/image.hpp"
#include "fvenc/rng.hpp"

namespace fvenc {

namespace {

struct BlobClassParams {
    double cx, cy;      // center, fractional
    double sigma_frac;  // blob radius as a fraction of image size
};

BlobClassParams class_params(int cls, int classes) {
    // centers on a diagonal sweep, radius growing with the class index
    const double f = classes == 1 ? 0.5 : static_cast<double>(cls) / (classes - 1);
    BlobClassParams p;
    p.cx = 0.30 + 0.40 * f;
    p.cy = 0.30 + 0.40 * f;
    p.sigma_frac = 0.08 + 0.10 * f;
    return p;
}

GrayImage render_blob(const BlobSpec& spec, int cls, Rng& rng) {
    const BlobClassParams base = class_params(cls, spec.classes);
    const double jitter_x = rng.uniform(-0.04, 0.04);
    const double jitter_y = rng.uniform(-0.04, 0.04);
    const double sigma =
        base.sigma_frac * rng.uniform(0.9, 1.1) * std::min(spec.width, spec.height);
    const double cx = (base.cx + jitter_x) * spec.width;
    const double cy = (base.cy + jitter_y) * spec.height;
    const double amplitude = rng.uniform(0.8, 1.0);

    GrayImage image;
    image.width = spec.width;
    image.height = spec.height;
    image.pixels.resize(image.pixel_count());
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const double value = amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) +
                                 spec.noise * rng.uniform();
            image.pixels[static_cast<std::size_t>(y) * spec.width + x] =
                std::clamp(value, 0.0, 1.0);
        }
    return image;
}

std::filesystem::path write_split(const BlobSpec& spec, const std::filesystem::path& out_dir,
                                  const std::string& split, int count, std::uint64_t split_tag,
                                  int* files_written) {
    DatasetManifest manifest;
    manifest.task = spec.classes == 2 ? Task::binary : Task::multiclass;
    manifest.num_labels = spec.classes == 2 ? 1 : spec.classes;
    manifest.base_dir = out_dir;

    Rng rng(derive_seed(spec.seed, split_tag));
    for (int i = 0; i < count; ++i) {
        const int cls = i % spec.classes;
        const GrayImage image = render_blob(spec, cls, rng);
        const std::string name = split + "_" + std::to_string(i) + ".pgm";
        write_pgm(out_dir / name, image);
        ++*files_written;

        Sample sample;
        sample.id = split + "_" + std::to_string(i);
        sample.image_path = name;
        sample.labels = {cls};
        manifest.samples.push_back(std::move(sample));
    }
    const std::filesystem::path manifest_path = out_dir / (split + ".json");
    save_manifest(manifest, manifest_path);
    return manifest_path;
}

}  // namespace

BlobDataset gen_blob_images(const BlobSpec& spec, const std::filesystem::path& out_dir) {
    if (spec.classes < 2 || spec.width < 1 || spec.height < 1)
        throw InvalidSpec("need >= 2 classes and positive image dims");
    if (spec.train_count < 1 || spec.val_count < 1 || spec.test_count < 1)
        throw InvalidSpec("every split needs at least one sample");
    if (spec.noise < 0.0) throw InvalidSpec("noise must be nonnegative");
    std::filesystem::create_directories(out_dir);

    BlobDataset dataset;
    dataset.train_manifest =
        write_split(spec, out_dir, "train", spec.train_count, 1, &dataset.files_written);
    dataset.val_manifest =
        write_split(spec, out_dir, "val", spec.val_count, 2, &dataset.files_written);
    dataset.test_manifest =
        write_split(spec, out_dir, "test", spec.test_count, 3, &dataset.files_written);
    return dataset;
}

PlantedMixture gen_planted_mixture(const PlantedSpec& spec) {
    if (spec.components < 1 || spec.dim < 1) throw InvalidSpec("components and dim must be >= 1");
    std::vector<int> counts = spec.counts;
    if (counts.empty()) {
        if (spec.total < spec.components) throw InvalidSpec("total smaller than component count");
        counts.assign(static_cast<std::size_t>(spec.components),
                      spec.total / spec.components);
        for (int r = 0; r < spec.total % spec.components; ++r) ++counts[static_cast<std::size_t>(r)];
    }
    if (static_cast<int>(counts.size()) != spec.components)
        throw InvalidSpec("counts must cover every component");
    int total = 0;
    for (int c : counts) {
        if (c < 0) throw InvalidSpec("negative count");
        total += c;
    }
    if (total < 1) throw InvalidSpec("no samples requested");
    if (!(spec.min_sigma > 0.0) || spec.max_sigma < spec.min_sigma)
        throw InvalidSpec("need 0 < min_sigma <= max_sigma");

    PlantedMixture planted;
    planted.truth.weights.resize(spec.components);
    planted.truth.means.resize(spec.components, spec.dim);
    planted.truth.variances.resize(spec.components, spec.dim);
    planted.truth.reg = 0.0;

    Rng param_rng(derive_seed(spec.seed, 10));
    for (int k = 0; k < spec.components; ++k) {
        planted.truth.weights(k) = static_cast<double>(counts[static_cast<std::size_t>(k)]) / total;
        for (int col = 0; col < spec.dim; ++col) {
            planted.truth.means(k, col) = param_rng.uniform(-spec.center_range, spec.center_range);
            const double sigma = param_rng.uniform(spec.min_sigma, spec.max_sigma);
            planted.truth.variances(k, col) = sigma * sigma;
        }
    }

    planted.samples.resize(total, spec.dim);
    planted.component_of_row.resize(static_cast<std::size_t>(total));
    Rng draw_rng(derive_seed(spec.seed, 11));
    Index row = 0;
    for (int k = 0; k < spec.components; ++k)
        for (int i = 0; i < counts[static_cast<std::size_t>(k)]; ++i, ++row) {
            planted.component_of_row[static_cast<std::size_t>(row)] = k;
            for (int col = 0; col < spec.dim; ++col)
                planted.samples(row, col) = planted.truth.means(k, col) +
                                            std::sqrt(planted.truth.variances(k, col)) *
                                                draw_rng.normal();
        }

    // shuffle rows so ratio prefixes are fair draws
    Rng shuffle_rng(derive_seed(spec.seed, 12));
    for (Index i = planted.samples.rows(); i > 1; --i) {
        const Index j = static_cast<Index>(shuffle_rng.uniform_index(static_cast<std::uint64_t>(i)));
        planted.samples.row(i - 1).swap(planted.samples.row(j));
        std::swap(planted.component_of_row[static_cast<std::size_t>(i - 1)],
                  planted.component_of_row[static_cast<std::size_t>(j)]);
    }
    return planted;
}

BlobSpec blob_spec_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingPath("cannot open spec " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec("spec is not valid JSON: " + std::string(e.what()));
    }
    if (doc.value("kind", "blob_images") != "blob_images")
        throw InvalidSpec("unknown spec kind");
    BlobSpec spec;
    spec.classes = doc.value("classes", spec.classes);
    spec.width = doc.value("width", spec.width);
    spec.height = doc.value("height", spec.height);
    spec.train_count = doc.value("train_count", spec.train_count);
    spec.val_count = doc.value("val_count", spec.val_count);
    spec.test_count = doc.value("test_count", spec.test_count);
    spec.noise = doc.value("noise", spec.noise);
    spec.seed = doc.value("seed", spec.seed);
    return spec;
}

}  // namespace fvenc
