#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "iprov/core.hpp"
#include "iprov/graphstore.hpp"
#include "iprov/index.hpp"
#include "iprov/pairwise.hpp"

namespace iprov {

struct PipelineStats {
    std::uint64_t relationship_calls = 0;
    std::uint64_t direction_calls = 0;
    std::uint64_t similarity_evals = 0;
    std::chrono::duration<double> filter_time{0};
    std::chrono::duration<double> trace_time{0};
    std::chrono::duration<double> construct_time{0};
};

/// Full pairwise construction: every unordered pair analyzed once (the
/// analyzer is symmetric, so N(N-1)/2 calls); per image the strongest related
/// partner gets an edge, direction decided on first contact with the pair;
/// images with no related partner are discarded.
std::pair<ProvenanceGraph, PipelineStats> build_graph_full(const std::vector<ImageRecord>& candidates,
                                                           const PairwiseModels& models,
                                                           int threads = 1);

using ImageLoader = std::function<ImageRecord(ImageId)>;

/// End-to-end analysis for one query: global-descriptor top-k filtering,
/// query-vs-candidate relationship and direction analysis, then MR tracing
/// over the accepted vertex set to merge stored edges and recover overlooked
/// images. Pairwise work is bounded by k regardless of database size.
std::pair<ProvenanceGraph, PipelineStats> run_pipeline(const DescriptorIndex& index,
                                                       const MRStore& store,
                                                       const ImageLoader& loader,
                                                       const ImageRecord& query, std::size_t k,
                                                       const PairwiseModels& models);

using Dissimilarity = std::function<double(const ImageRecord&, const ImageRecord&)>;

/// Kruskal MST over the complete candidate graph; connects every candidate
/// (the documented failure mode: unrelated images cannot be discarded).
/// Edges are undirected, stored canonically as (smaller id -> larger id).
ProvenanceGraph build_graph_mst_baseline(const std::vector<ImageRecord>& candidates,
                                         const Dissimilarity& dissimilarity = {});

} // namespace iprov
