#include <doctest.h>

#include <fstream>

#include "fvenc/errors.hpp"
#include "fvenc/manifest.hpp"
#include "helpers.hpp"

using namespace fvenc;

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("binary manifest loads with one label column") {
    testutil::TempDir tmp("manifest");
    write_file(tmp / "m.json", R"({
        "task": "binary", "num_labels": 1,
        "samples": [
            {"id": "a", "labels": [0]},
            {"id": "b", "labels": [1]},
            {"id": "c", "labels": [0]}
        ]})");
    const DatasetManifest manifest = load_manifest(tmp / "m.json");
    CHECK(manifest.task == Task::binary);
    CHECK(manifest.num_labels == 1);
    REQUIRE(manifest.samples.size() == 3);
    // order is preserved exactly
    CHECK(manifest.samples[0].id == "a");
    CHECK(manifest.samples[1].id == "b");
    CHECK(manifest.samples[2].id == "c");
    CHECK(manifest.samples[1].labels == std::vector<int>{1});
}

TEST_CASE("multiclass label equal to num_labels is out of range") {
    testutil::TempDir tmp("range");
    write_file(tmp / "m.json", R"({
        "task": "multiclass", "num_labels": 3,
        "samples": [{"id": "a", "labels": [3]}]})");
    CHECK_THROWS_AS(load_manifest(tmp / "m.json"), LabelOutOfRange);
}

TEST_CASE("duplicate ids are rejected") {
    testutil::TempDir tmp("dup");
    write_file(tmp / "m.json", R"({
        "task": "binary", "num_labels": 1,
        "samples": [{"id": "a", "labels": [0]}, {"id": "a", "labels": [1]}]})");
    CHECK_THROWS_AS(load_manifest(tmp / "m.json"), DuplicateId);
}

TEST_CASE("referenced paths must resolve") {
    testutil::TempDir tmp("missing");
    write_file(tmp / "m.json", R"({
        "task": "binary", "num_labels": 1,
        "samples": [{"id": "a", "image_path": "nope.pgm", "labels": [0]}]})");
    CHECK_THROWS_AS(load_manifest(tmp / "m.json"), MissingPath);
}

TEST_CASE("save/load preserves samples and relative paths") {
    testutil::TempDir tmp("roundtrip");
    write_file(tmp / "img.pgm", "placeholder");

    DatasetManifest manifest;
    manifest.task = Task::multilabel;
    manifest.num_labels = 2;
    manifest.base_dir = tmp.path();
    Sample s;
    s.id = "x";
    s.image_path = "img.pgm";
    s.labels = {1, 0};
    manifest.samples.push_back(s);
    save_manifest(manifest, tmp / "m.json");

    const DatasetManifest back = load_manifest(tmp / "m.json");
    CHECK(back.task == Task::multilabel);
    REQUIRE(back.samples.size() == 1);
    CHECK(back.samples[0].labels == std::vector<int>{1, 0});
    CHECK(back.resolve(*back.samples[0].image_path) == tmp / "img.pgm");
}

TEST_CASE("multilabel rows must be full-width 0/1 vectors") {
    testutil::TempDir tmp("ml");
    write_file(tmp / "m.json", R"({
        "task": "multilabel", "num_labels": 3,
        "samples": [{"id": "a", "labels": [1, 0]}]})");
    CHECK_THROWS_AS(load_manifest(tmp / "m.json"), LabelOutOfRange);
}
