#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "iprov/graphstore.hpp"
#include "iprov/rng.hpp"

using namespace iprov;

namespace {

struct RandomDag {
    int n = 0;
    std::vector<MREdge> edges;
};

// edges always go low id -> high id, so the graph is acyclic by construction
RandomDag random_dag(Rng& rng, int max_n) {
    RandomDag dag;
    dag.n = static_cast<int>(rng.uniform_int(2, max_n));
    const int m = static_cast<int>(rng.uniform_int(1, 2 * dag.n));
    for (int i = 0; i < m; ++i) {
        const auto a = static_cast<std::uint64_t>(rng.uniform_int(0, dag.n - 2));
        const auto b = static_cast<std::uint64_t>(rng.uniform_int(static_cast<std::int64_t>(a) + 1, dag.n - 1));
        dag.edges.push_back({ImageId{a}, ImageId{b}});
    }
    return dag;
}

// Brute-force transitive-closure oracle: boolean reachability matrix, then
// per-seed up-set/down-set union including their internal edges.
ProvenanceGraph closure_oracle(const RandomDag& dag, const std::set<ImageId>& seeds) {
    const int n = dag.n;
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int v = 0; v < n; ++v) reach[v][v] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const MREdge& e : dag.edges) {
            const int u = static_cast<int>(e.src.value), v = static_cast<int>(e.dst.value);
            for (int s = 0; s < n; ++s)
                if (reach[s][u] && !reach[s][v]) {
                    reach[s][v] = true;
                    changed = true;
                }
        }
    }

    ProvenanceGraph g;
    for (const ImageId& seed : seeds) {
        g.add_node(seed);
        if (seed.value >= static_cast<std::uint64_t>(n)) continue; // unknown seed
        const int s = static_cast<int>(seed.value);
        std::set<int> up, down;
        for (int v = 0; v < n; ++v) {
            if (reach[v][s]) up.insert(v);
            if (reach[s][v]) down.insert(v);
        }
        for (int v : up) g.add_node(ImageId{static_cast<std::uint64_t>(v)});
        for (int v : down) g.add_node(ImageId{static_cast<std::uint64_t>(v)});
        for (const MREdge& e : dag.edges) {
            const int u = static_cast<int>(e.src.value), v = static_cast<int>(e.dst.value);
            if (up.count(u) && up.count(v)) g.add_edge(e);
            if (down.count(u) && down.count(v)) g.add_edge(e);
        }
    }
    return g;
}

} // namespace

TEST_SUITE("graphstore") {

TEST_CASE("adjacency maps mirror inserted edges") {
    MRStore s;
    s.add_edge({ImageId{1}, ImageId{2}});
    CHECK(s.successors(ImageId{1}) == std::set<ImageId>{ImageId{2}});
    CHECK(s.predecessors(ImageId{2}) == std::set<ImageId>{ImageId{1}});

    s.add_edge({ImageId{1}, ImageId{2}});
    CHECK(s.edge_count() == 1);

    CHECK_THROWS_AS(s.add_edge({ImageId{1}, ImageId{1}}), Error);
}

TEST_CASE("trace walks chains in both directions") {
    // chain c(3) -> b(2) -> a(1), seed {b}
    MRStore s;
    s.add_edge({ImageId{3}, ImageId{2}});
    s.add_edge({ImageId{2}, ImageId{1}});
    const ProvenanceGraph g = s.trace({ImageId{2}});
    CHECK(g.nodes == std::set<ImageId>{ImageId{1}, ImageId{2}, ImageId{3}});
    CHECK(g.edges == std::set<MREdge>{{ImageId{3}, ImageId{2}}, {ImageId{2}, ImageId{1}}});
}

TEST_CASE("trace excludes sibling branches") {
    // fork b -> a and b -> c, seed {a}: c is a co-descendant, not an ancestor
    MRStore s;
    s.add_edge({ImageId{2}, ImageId{1}});
    s.add_edge({ImageId{2}, ImageId{3}});
    const ProvenanceGraph g = s.trace({ImageId{1}});
    CHECK(g.nodes == std::set<ImageId>{ImageId{1}, ImageId{2}});
    CHECK(g.edges == std::set<MREdge>{{ImageId{2}, ImageId{1}}});
}

TEST_CASE("unknown seeds contribute only themselves") {
    MRStore s;
    const ProvenanceGraph g = s.trace({ImageId{7}});
    CHECK(g.nodes == std::set<ImageId>{ImageId{7}});
    CHECK(g.edges.empty());
}

TEST_CASE("trace equals the brute-force closure oracle on 500 random DAGs") {
    Rng rng(123);
    for (int trial = 0; trial < 500; ++trial) {
        const RandomDag dag = random_dag(rng, 50);
        MRStore s;
        for (const MREdge& e : dag.edges) s.add_edge(e);

        std::set<ImageId> seeds;
        const int k = static_cast<int>(rng.uniform_int(1, 3));
        for (int i = 0; i < k; ++i)
            seeds.insert(ImageId{static_cast<std::uint64_t>(rng.uniform_int(0, dag.n - 1))});
        if (trial % 7 == 0) seeds.insert(ImageId{static_cast<std::uint64_t>(dag.n) + 3}); // unknown

        const ProvenanceGraph got = s.trace(seeds);
        const ProvenanceGraph want = closure_oracle(dag, seeds);
        CHECK(got.nodes == want.nodes);
        CHECK(got.edges == want.edges);
    }
}

TEST_CASE("re-tracing the returned node set never shrinks the result") {
    Rng rng(321);
    for (int trial = 0; trial < 50; ++trial) {
        const RandomDag dag = random_dag(rng, 30);
        MRStore s;
        for (const MREdge& e : dag.edges) s.add_edge(e);
        const std::set<ImageId> seeds{ImageId{static_cast<std::uint64_t>(rng.uniform_int(0, dag.n - 1))}};
        const ProvenanceGraph once = s.trace(seeds);
        const ProvenanceGraph twice = s.trace(once.nodes);
        CHECK(std::includes(twice.nodes.begin(), twice.nodes.end(), once.nodes.begin(), once.nodes.end()));
        CHECK(std::includes(twice.edges.begin(), twice.edges.end(), once.edges.begin(), once.edges.end()));
    }
}

TEST_CASE("trace on a chain is exactly idempotent") {
    MRStore s;
    for (std::uint64_t i = 0; i + 1 < 10; ++i) s.add_edge({ImageId{i}, ImageId{i + 1}});
    const ProvenanceGraph once = s.trace({ImageId{4}});
    const ProvenanceGraph twice = s.trace(once.nodes);
    CHECK(once == twice);
}

TEST_CASE("tracing cost tracks the reached component, not the store size") {
    MRStore small, large;
    for (std::uint64_t i = 0; i + 1 < 6; ++i) {
        small.add_edge({ImageId{i}, ImageId{i + 1}});
        large.add_edge({ImageId{i}, ImageId{i + 1}});
    }
    // large gets 10k unrelated edges in foreign components
    for (std::uint64_t i = 0; i < 10000; ++i)
        large.add_edge({ImageId{1000 + 2 * i}, ImageId{1001 + 2 * i}});

    TraceStats a, b;
    small.trace({ImageId{3}}, &a);
    large.trace({ImageId{3}}, &b);
    CHECK(a.nodes_touched == b.nodes_touched);
    CHECK(a.edges_touched == b.edges_touched);
    CHECK(b.nodes_touched < 40);
}

TEST_CASE("transpose invariant holds on random stores") {
    Rng rng(77);
    const RandomDag dag = random_dag(rng, 40);
    MRStore s;
    for (const MREdge& e : dag.edges) s.add_edge(e);
    for (int u = 0; u < dag.n; ++u)
        for (int v = 0; v < dag.n; ++v) {
            const bool fwd = s.successors(ImageId{static_cast<std::uint64_t>(u)})
                                 .count(ImageId{static_cast<std::uint64_t>(v)}) > 0;
            const bool bwd = s.predecessors(ImageId{static_cast<std::uint64_t>(v)})
                                 .count(ImageId{static_cast<std::uint64_t>(u)}) > 0;
            CHECK(fwd == bwd);
        }
}

TEST_CASE("IPMR log round-trips 12000 edges in 16 bytes each") {
    const std::string dir = iprov::testing::scratch_dir("store_io");
    Rng rng(9);
    MRStore s;
    while (s.edge_count() < 12000) {
        const auto a = static_cast<std::uint64_t>(rng.uniform_int(0, 40000));
        const auto b = static_cast<std::uint64_t>(rng.uniform_int(0, 40000));
        if (a != b) s.add_edge({ImageId{a}, ImageId{b}});
    }
    const std::string path = dir + "/edges.ipmr";
    s.save(path);

    const auto size = std::filesystem::file_size(path);
    CHECK(size == 8 + 16 * s.edge_count());
    CHECK(size <= 2 * 1024 * 1024);

    const MRStore back = MRStore::load(path);
    CHECK(back.edges() == s.edges());
}

TEST_CASE("empty store round-trips") {
    const std::string dir = iprov::testing::scratch_dir("store_io_empty");
    MRStore s;
    s.save(dir + "/e.ipmr");
    CHECK(MRStore::load(dir + "/e.ipmr").edge_count() == 0);
}

TEST_CASE("duplicate log records collapse on load") {
    const std::string dir = iprov::testing::scratch_dir("store_io_dup");
    MRStore s;
    s.add_edge({ImageId{1}, ImageId{2}});
    const std::string path = dir + "/d.ipmr";
    s.save(path);
    {
        // append the same record again, as an interrupted writer might
        std::ofstream f(path, std::ios::binary | std::ios::app);
        const unsigned char rec[16] = {1, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0};
        f.write(reinterpret_cast<const char*>(rec), 16);
    }
    const MRStore back = MRStore::load(path);
    CHECK(back.edge_count() == 1);
}

TEST_CASE("truncated log reports the byte offset") {
    const std::string dir = iprov::testing::scratch_dir("store_io_trunc");
    MRStore s;
    s.add_edge({ImageId{1}, ImageId{2}});
    s.add_edge({ImageId{2}, ImageId{3}});
    const std::string path = dir + "/t.ipmr";
    s.save(path);
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 5);
    try {
        MRStore::load(path);
        FAIL("expected Truncated");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::Truncated);
        CHECK(std::string(e.what()).find("24") != std::string::npos);
    }
}

} // TEST_SUITE
