#include "iprov/construct.hpp"

#include <algorithm>
#include <numeric>

#include "iprov/descriptor.hpp"
#include "iprov/parallel.hpp"

namespace iprov {

namespace {

using Clock = std::chrono::steady_clock;

std::size_t pair_slot(std::size_t i, std::size_t j, std::size_t n) {
    // upper-triangular index for i < j
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

} // namespace

std::pair<ProvenanceGraph, PipelineStats> build_graph_full(const std::vector<ImageRecord>& candidates,
                                                           const PairwiseModels& models,
                                                           int threads) {
    const std::size_t n = candidates.size();
    if (n < 2) raise(Errc::Usage, "build_graph_full needs at least 2 candidates");

    PipelineStats stats;
    const auto t0 = Clock::now();

    // Evaluate each unordered pair once; the analyzer is symmetric.
    std::vector<PairVerdict> verdicts(n * (n - 1) / 2);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(verdicts.size());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        verdicts[pair_slot(i, j, n)] = models.relationship->analyze(candidates[i], candidates[j]);
    });
    stats.relationship_calls = verdicts.size();

    const auto verdict = [&](std::size_t i, std::size_t j) -> const PairVerdict& {
        return i < j ? verdicts[pair_slot(i, j, n)] : verdicts[pair_slot(j, i, n)];
    };

    ProvenanceGraph g;
    std::set<std::pair<std::size_t, std::size_t>> decided; // unordered pairs with an edge
    for (std::size_t i = 0; i < n; ++i) {
        double score_max = 0.0;
        std::ptrdiff_t index = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const PairVerdict& v = verdict(i, j);
            if (v.related && v.confidence >= score_max) { // >= : last maximal j wins
                score_max = v.confidence;
                index = static_cast<std::ptrdiff_t>(j);
            }
        }
        if (index < 0) continue; // no related partner: discarded
        const std::size_t j = static_cast<std::size_t>(index);
        const auto key = std::minmax(i, j);
        if (decided.count(key)) continue; // first writer wins for this pair
        decided.insert(key);
        const DirectionVerdict d = models.direction->direction(candidates[i], candidates[j]);
        ++stats.direction_calls;
        if (d.direction == Direction::AtoB)
            g.add_edge({candidates[i].id, candidates[j].id});
        else
            g.add_edge({candidates[j].id, candidates[i].id});
    }

    stats.construct_time = Clock::now() - t0;
    return {std::move(g), stats};
}

std::pair<ProvenanceGraph, PipelineStats> run_pipeline(const DescriptorIndex& index,
                                                       const MRStore& store,
                                                       const ImageLoader& loader,
                                                       const ImageRecord& query, std::size_t k,
                                                       const PairwiseModels& models) {
    if (k == 0) raise(Errc::Usage, "k must be >= 1");

    PipelineStats stats;
    ProvenanceGraph g;
    g.add_node(query.id);

    const auto t0 = Clock::now();
    const GlobalDescriptor vq = extract_global(query);
    std::uint64_t evals = 0;
    const std::vector<SearchHit> hits = index.top_k(vq, k, &evals);
    stats.similarity_evals += evals;
    stats.filter_time = Clock::now() - t0;

    const auto t1 = Clock::now();
    std::set<ImageId> accepted{query.id};
    for (const SearchHit& hit : hits) {
        if (hit.id == query.id) continue;
        const ImageRecord candidate = loader(hit.id);
        if (candidate.same_pixels(query)) {
            // an exact stored copy of the query: same vertex, no direction exists
            g.add_node(hit.id);
            accepted.insert(hit.id);
            continue;
        }
        const PairVerdict rel = models.relationship->analyze(query, candidate);
        ++stats.relationship_calls;
        if (!rel.related) continue;
        g.add_node(hit.id);
        accepted.insert(hit.id);
        const DirectionVerdict dir = models.direction->direction(query, candidate);
        ++stats.direction_calls;
        if (dir.direction == Direction::AtoB)
            g.add_edge({query.id, hit.id});
        else
            g.add_edge({hit.id, query.id});
    }
    stats.construct_time = Clock::now() - t1;

    const auto t2 = Clock::now();
    const ProvenanceGraph traced = store.trace(accepted);
    for (const ImageId& v : traced.nodes) g.add_node(v);
    for (const MREdge& e : traced.edges)
        if (!g.has_edge(e)) g.add_edge(e);
    stats.trace_time = Clock::now() - t2;

    return {std::move(g), stats};
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

} // namespace

ProvenanceGraph build_graph_mst_baseline(const std::vector<ImageRecord>& candidates,
                                         const Dissimilarity& dissimilarity) {
    const std::size_t n = candidates.size();
    if (n < 2) raise(Errc::Usage, "build_graph_mst_baseline needs at least 2 candidates");

    Dissimilarity dissim = dissimilarity;
    std::vector<GlobalDescriptor> descriptors;
    if (!dissim) {
        descriptors.reserve(n);
        for (const ImageRecord& c : candidates) descriptors.push_back(extract_global(c));
    }

    struct WeightedEdge {
        double w;
        std::size_t i, j;
    };
    std::vector<WeightedEdge> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = dissim ? dissim(candidates[i], candidates[j])
                                    : 1.0 - similarity(descriptors[i], descriptors[j]);
            edges.push_back({w, i, j});
        }
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        if (a.w != b.w) return a.w < b.w;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    ProvenanceGraph g;
    for (const ImageRecord& c : candidates) g.add_node(c.id);
    UnionFind uf(n);
    for (const WeightedEdge& e : edges) {
        if (!uf.unite(e.i, e.j)) continue;
        const ImageId a = candidates[e.i].id, b = candidates[e.j].id;
        g.add_edge(a < b ? MREdge{a, b} : MREdge{b, a}); // undirected, canonical orientation
        if (g.edges.size() == n - 1) break;
    }
    return g;
}

} // namespace iprov
