#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "iprov/core.hpp"

namespace iprov {

struct TraceStats {
    std::uint64_t nodes_touched = 0;
    std::uint64_t edges_touched = 0;
};

/// Persistent store of known MR edges with ancestor/descendant tracing.
/// Forward and backward adjacency are exact transposes; the on-disk edge log
/// is append-only (IPMR format, 16 bytes per edge).
class MRStore {
public:
    /// Throws SelfLoop. Idempotent in the maps.
    void add_edge(const MREdge& e);

    std::size_t edge_count() const { return edges_.size(); }

    const std::set<ImageId>& successors(ImageId id) const;
    const std::set<ImageId>& predecessors(ImageId id) const;

    /// Subgraph spanning the seeds, every ancestor and descendant of a seed,
    /// and the stored edges lying inside the per-direction closures. Sibling
    /// branches are excluded. Unknown seeds contribute only themselves.
    ProvenanceGraph trace(const std::set<ImageId>& seeds, TraceStats* stats = nullptr) const;

    void save(const std::string& path) const;
    static MRStore load(const std::string& path);

    const std::set<MREdge>& edges() const { return edges_; }

private:
    std::map<ImageId, std::set<ImageId>> forward_;
    std::map<ImageId, std::set<ImageId>> backward_;
    std::set<MREdge> edges_;
};

} // namespace iprov
