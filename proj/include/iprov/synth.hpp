#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iprov/core.hpp"
#include "iprov/rng.hpp"

namespace iprov {

/// Recipe for one synthetic provenance dataset. Same spec + seed reproduces
/// byte-identical outputs.
struct GenSpec {
    int n_graphs = 10;
    int nodes_min = 6;
    int nodes_max = 14;
    int branching_min = 1;
    int branching_max = 8;
    std::vector<std::string> op_pool; // empty = full catalog minus `unrelated`
    std::vector<int> quality_pool = {60, 70, 75, 80, 85, 90, 95};
    int distractor_count = 10;
    std::uint64_t master_seed = 42;
    int seed_width = 256;
    int seed_height = 256;
    double splice_probability = 0.25; // one optional multi-parent splice per graph
    int ops_per_edge_min = 1;
    int ops_per_edge_max = 3;
};

GenSpec genspec_from_file(const std::string& path);

/// Procedural seed: gradient background, value-noise texture, random shapes.
ImageRecord make_seed_image(int width, int height, Rng& rng, ImageId id = ImageId{0});

/// Draws an op with parameters from the documented ranges.
ModificationOp draw_op(const std::string& name, Rng& rng);

/// Applies one catalog op. Ops whose effect is not fully pinned by params
/// (noise values, tile permutation, donor content) consume the rng.
/// Throws UnknownOp for names outside the catalog.
ImageRecord apply_modification(const ImageRecord& img, const ModificationOp& op, Rng& rng);

/// Splice a rectangular region of donor content; used both by the catalog op
/// (procedural donor) and by multi-parent graph edges (real second parent).
ImageRecord apply_splice(const ImageRecord& img, const ImageRecord& donor, double area, double x,
                         double y);

struct GeneratedGraph {
    Journal journal;
    std::vector<ImageRecord> images;             // decoded records, ids assigned
    std::vector<std::vector<std::uint8_t>> files; // encoded bytes, parallel to images
};

/// Random tree (optionally with one splice edge) of modified re-saves of the
/// seed. Every edge applies 1-3 ops then a JPEG save at a pool quality; the
/// root's initial save is recorded too. Node pixels are the decoded bytes.
GeneratedGraph generate_graph(const ImageRecord& seed, const GenSpec& spec, Rng& rng,
                              std::uint64_t first_id, const std::string& graph_id);

struct ManifestEntry {
    ImageId id;
    std::string file;
    std::string graph_id; // empty for distractors
};

struct Manifest {
    std::vector<ManifestEntry> images;
    std::vector<std::string> journals;
};

void manifest_write(const Manifest& m, const std::string& path);
Manifest manifest_read(const std::string& path);

struct DatasetPaths {
    std::string dir;
    std::string manifest;
};

/// Emits all graph images, journals, distractors and the manifest under
/// out_dir. Returns the manifest path.
DatasetPaths generate_dataset(const GenSpec& spec, const std::string& out_dir);

} // namespace iprov
