#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "iprov/eval.hpp"
#include "iprov/rng.hpp"

using namespace iprov;

namespace {

ProvenanceGraph random_graph(Rng& rng, int max_n) {
    ProvenanceGraph g;
    const int n = static_cast<int>(rng.uniform_int(1, max_n));
    for (int i = 0; i < n; ++i)
        if (rng.chance(0.8)) g.add_node(ImageId{static_cast<std::uint64_t>(rng.uniform_int(0, max_n))});
    const int m = static_cast<int>(rng.uniform_int(0, 2 * n));
    for (int i = 0; i < m; ++i) {
        const auto a = static_cast<std::uint64_t>(rng.uniform_int(0, max_n));
        const auto b = static_cast<std::uint64_t>(rng.uniform_int(0, max_n));
        if (a != b) g.add_edge({ImageId{a}, ImageId{b}});
    }
    if (g.nodes.empty()) g.add_node(ImageId{0});
    return g;
}

// Naive set-arithmetic oracle for every overlap metric.
struct OracleScores {
    double vo, eo, veo, eo_d, veo_d;
};

OracleScores overlap_oracle(const ProvenanceGraph& p, const ProvenanceGraph& r) {
    const auto f1 = [](double inter, double a, double b) {
        return (a + b) == 0 ? 1.0 : 2.0 * inter / (a + b);
    };
    std::vector<ImageId> vi;
    std::set_intersection(p.nodes.begin(), p.nodes.end(), r.nodes.begin(), r.nodes.end(),
                          std::back_inserter(vi));
    std::vector<MREdge> ei;
    std::set_intersection(p.edges.begin(), p.edges.end(), r.edges.begin(), r.edges.end(),
                          std::back_inserter(ei));

    const auto undirect = [](const std::set<MREdge>& edges) {
        std::set<std::pair<std::uint64_t, std::uint64_t>> u;
        for (const MREdge& e : edges)
            u.insert({std::min(e.src.value, e.dst.value), std::max(e.src.value, e.dst.value)});
        return u;
    };
    const auto pu = undirect(p.edges), ru = undirect(r.edges);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> ui;
    std::set_intersection(pu.begin(), pu.end(), ru.begin(), ru.end(), std::back_inserter(ui));

    OracleScores s{};
    const double nv = static_cast<double>(vi.size());
    s.vo = f1(nv, static_cast<double>(p.nodes.size()), static_cast<double>(r.nodes.size()));
    s.eo = f1(static_cast<double>(ui.size()), static_cast<double>(pu.size()), static_cast<double>(ru.size()));
    s.eo_d = f1(static_cast<double>(ei.size()), static_cast<double>(p.edges.size()),
                static_cast<double>(r.edges.size()));
    s.veo = f1(nv + static_cast<double>(ui.size()),
               static_cast<double>(p.nodes.size() + pu.size()),
               static_cast<double>(r.nodes.size() + ru.size()));
    s.veo_d = f1(nv + static_cast<double>(ei.size()),
                 static_cast<double>(p.nodes.size() + p.edges.size()),
                 static_cast<double>(r.nodes.size() + r.edges.size()));
    return s;
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("identical graphs score 1.0 everywhere") {
    ProvenanceGraph g;
    g.add_edge({ImageId{1}, ImageId{2}});
    g.add_edge({ImageId{2}, ImageId{3}});
    const GraphScore s = graph_overlap(g, g);
    CHECK(s.vo == doctest::Approx(1.0));
    CHECK(s.eo == doctest::Approx(1.0));
    CHECK(s.veo == doctest::Approx(1.0));
    CHECK(s.eo_directed == doctest::Approx(1.0));
    CHECK(s.veo_directed == doctest::Approx(1.0));
    CHECK_FALSE(s.empty_convention_used);
}

TEST_CASE("vertex overlap follows the F1 formula") {
    ProvenanceGraph p, r;
    for (std::uint64_t v : {1, 2, 3, 4}) p.add_node(ImageId{v});
    for (std::uint64_t v : {1, 2}) r.add_node(ImageId{v});
    CHECK(graph_overlap(p, r).vo == doctest::Approx(2.0 * 2 / 6));
}

TEST_CASE("directed and undirected edge overlap diverge on flipped edges") {
    ProvenanceGraph p, r;
    p.add_edge({ImageId{1}, ImageId{2}});
    p.add_edge({ImageId{2}, ImageId{3}});
    r.add_edge({ImageId{1}, ImageId{2}});
    r.add_edge({ImageId{3}, ImageId{2}});
    const GraphScore s = graph_overlap(p, r);
    CHECK(s.eo_directed == doctest::Approx(0.5));
    CHECK(s.eo == doctest::Approx(1.0));
}

TEST_CASE("empty edge sets trigger the flagged 1.0 convention") {
    ProvenanceGraph p, r;
    p.add_node(ImageId{1});
    r.add_node(ImageId{1});
    const GraphScore s = graph_overlap(p, r);
    CHECK(s.eo == doctest::Approx(1.0));
    CHECK(s.empty_convention_used);
}

TEST_CASE("overlap equals the naive oracle on 1000 random pairs") {
    Rng rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const ProvenanceGraph p = random_graph(rng, 30);
        const ProvenanceGraph r = random_graph(rng, 30);
        const GraphScore got = graph_overlap(p, r);
        const OracleScores want = overlap_oracle(p, r);
        CHECK(std::abs(got.vo - want.vo) < 1e-12);
        CHECK(std::abs(got.eo - want.eo) < 1e-12);
        CHECK(std::abs(got.veo - want.veo) < 1e-12);
        CHECK(std::abs(got.eo_directed - want.eo_d) < 1e-12);
        CHECK(std::abs(got.veo_directed - want.veo_d) < 1e-12);
    }
}

TEST_CASE("overlap is symmetric and relabeling invariant") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const ProvenanceGraph p = random_graph(rng, 20);
        const ProvenanceGraph r = random_graph(rng, 20);
        const GraphScore ab = graph_overlap(p, r);
        const GraphScore ba = graph_overlap(r, p);
        CHECK(ab.vo == ba.vo);
        CHECK(ab.eo == ba.eo);
        CHECK(ab.veo == ba.veo);
        CHECK(ab.eo_directed == ba.eo_directed);
        CHECK(ab.veo_directed == ba.veo_directed);

        // consistent relabeling: id -> id + 1000
        const auto relabel = [](const ProvenanceGraph& g) {
            ProvenanceGraph out;
            for (const ImageId& n : g.nodes) out.add_node(ImageId{n.value + 1000});
            for (const MREdge& e : g.edges)
                out.add_edge({ImageId{e.src.value + 1000}, ImageId{e.dst.value + 1000}});
            return out;
        };
        const GraphScore rl = graph_overlap(relabel(p), relabel(r));
        CHECK(rl.vo == ab.vo);
        CHECK(rl.eo == ab.eo);
        CHECK(rl.veo_directed == ab.veo_directed);
    }
}

TEST_CASE("veo lies between the vo/eo extremes") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const ProvenanceGraph p = random_graph(rng, 15);
        const ProvenanceGraph r = random_graph(rng, 15);
        const GraphScore s = graph_overlap(p, r);
        CHECK(s.veo >= std::min(s.vo, s.eo) - 1e-12);
        CHECK(s.veo <= std::max(s.vo, s.eo) + 1e-12);
    }
}

TEST_CASE("recall@k counts the first k returned against truth") {
    const std::set<ImageId> truth{ImageId{1}, ImageId{2}, ImageId{3}, ImageId{4}};
    CHECK(recall_at_k({ImageId{1}, ImageId{9}, ImageId{2}}, truth, 3) == doctest::Approx(0.5));
    CHECK(recall_at_k({ImageId{4}, ImageId{3}, ImageId{2}, ImageId{1}}, truth, 10) == doctest::Approx(1.0));
    CHECK(recall_at_k({ImageId{9}}, {}, 5) == doctest::Approx(1.0)); // nothing to find
    CHECK(recall_at_k({ImageId{1}, ImageId{2}}, truth, 1) == doctest::Approx(0.25));
}

TEST_CASE("journal closure matches the tracing rule") {
    Journal j;
    j.graph_id = "t";
    // fork: 1 -> 2, 1 -> 3, 2 -> 4
    j.graph.add_edge({ImageId{1}, ImageId{2}});
    j.graph.add_edge({ImageId{1}, ImageId{3}});
    j.graph.add_edge({ImageId{2}, ImageId{4}});
    j.edge_ops[{ImageId{1}, ImageId{2}}] = {};
    j.edge_ops[{ImageId{1}, ImageId{3}}] = {};
    j.edge_ops[{ImageId{2}, ImageId{4}}] = {};

    const ProvenanceGraph c4 = journal_closure(j, ImageId{4});
    CHECK(c4.nodes == std::set<ImageId>{ImageId{1}, ImageId{2}, ImageId{4}}); // sibling 3 excluded
    CHECK(c4.edges == std::set<MREdge>{{ImageId{1}, ImageId{2}}, {ImageId{2}, ImageId{4}}});

    const ProvenanceGraph c1 = journal_closure(j, ImageId{1});
    CHECK(c1.nodes.size() == 4); // root reaches everything
    CHECK(c1.edges.size() == 3);
}

} // TEST_SUITE
