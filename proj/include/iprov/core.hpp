#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "iprov/errors.hpp"

namespace iprov {

/// Identity of an image within a database. Assigned densely at ingest time,
/// in ingest order, so runs are deterministic.
struct ImageId {
    std::uint64_t value = 0;

    ImageId() = default;
    explicit constexpr ImageId(std::uint64_t v) : value(v) {}

    auto operator<=>(const ImageId&) const = default;
};

enum class ImageFormat { Jpeg, Png, Other };

const char* to_string(ImageFormat f);

/// Decoded 8-bit RGB raster plus provenance of the bytes it came from.
struct ImageRecord {
    ImageId id;
    int width = 0;
    int height = 0;
    ImageFormat format = ImageFormat::Other;
    std::string source_path;
    std::vector<std::uint8_t> pixels; // row-major RGB, width*height*3

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }

    bool same_pixels(const ImageRecord& other) const {
        return width == other.width && height == other.height && pixels == other.pixels;
    }
};

ImageRecord make_image(ImageId id, int width, int height, ImageFormat format = ImageFormat::Other);

/// Directed modification relationship: dst was modified from src.
struct MREdge {
    ImageId src;
    ImageId dst;

    MREdge() = default;
    MREdge(ImageId s, ImageId d) : src(s), dst(d) {}

    auto operator<=>(const MREdge&) const = default;
};

struct ValidationReport {
    std::vector<std::vector<ImageId>> cycles; // node sequences, capped
    std::set<ImageId> orphan_nodes;           // degree 0
    bool cycle_cap_hit = false;

    bool acyclic() const { return cycles.empty(); }
};

/// Node set plus directed edge set. Edges are kept in sorted canonical order
/// (src, then dst); acyclicity is reported by validate(), not enforced.
struct ProvenanceGraph {
    std::set<ImageId> nodes;
    std::set<MREdge> edges;

    bool operator==(const ProvenanceGraph&) const = default;

    void add_node(ImageId id) { nodes.insert(id); }

    /// Inserts the edge and both endpoints; idempotent. Self-loops rejected.
    void add_edge(const MREdge& e);

    bool has_edge(const MREdge& e) const { return edges.count(e) > 0; }
    bool has_edge_either_direction(ImageId a, ImageId b) const {
        return edges.count(MREdge(a, b)) > 0 || edges.count(MREdge(b, a)) > 0;
    }
};

ProvenanceGraph graph_add_edge(ProvenanceGraph g, const MREdge& e);

/// Enumerates elementary cycles (up to max_cycles) and degree-0 nodes.
ValidationReport graph_validate(const ProvenanceGraph& g, std::size_t max_cycles = 16);

std::string graph_to_dot(const ProvenanceGraph& g, const std::string& name = "provenance");

/// One modification step applied along an edge. Valid names and their exact
/// parameter keys live in the op catalog (op_catalog()).
struct ModificationOp {
    std::string name;
    std::map<std::string, double> params;

    bool operator==(const ModificationOp&) const = default;
};

struct OpCatalogEntry {
    std::string name;
    std::vector<std::string> param_keys;
};

/// The 21 modification operations plus the `unrelated` distractor marker.
const std::vector<OpCatalogEntry>& op_catalog();
const OpCatalogEntry* op_catalog_find(const std::string& name);

/// Throws UnknownOp for names outside the catalog and ParseError when the
/// parameter keys differ from the catalog entry.
void validate_op(const ModificationOp& op);

/// Ground truth for one synthetic provenance graph.
struct Journal {
    std::string graph_id;
    ProvenanceGraph graph;
    std::map<ImageId, std::string> node_files;            // relative paths
    std::map<MREdge, std::vector<ModificationOp>> edge_ops;
    std::map<ImageId, int> save_quality;                  // absent => lossless save

    bool operator==(const Journal&) const = default;

    /// Enforces: edge_ops keys == graph.edges, node_files covers nodes,
    /// graph is acyclic. Throws InconsistentJournal.
    void check() const;
};

std::string journal_to_string(const Journal& j);
Journal journal_from_string(const std::string& text);
void journal_write(const Journal& j, const std::string& path);
Journal journal_read(const std::string& path);

} // namespace iprov

template <>
struct std::hash<iprov::ImageId> {
    std::size_t operator()(const iprov::ImageId& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
