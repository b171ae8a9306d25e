#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "iprov/core.hpp"
#include "iprov/rng.hpp"

using namespace iprov;

namespace {

void check_graph_invariants(const ProvenanceGraph& g) {
    for (const MREdge& e : g.edges) {
        CHECK(e.src != e.dst);
        CHECK(g.nodes.count(e.src) == 1);
        CHECK(g.nodes.count(e.dst) == 1);
    }
}

} // namespace

TEST_SUITE("core") {

TEST_CASE("add_edge inserts endpoints and is idempotent") {
    ProvenanceGraph g;
    g = graph_add_edge(g, {ImageId{1}, ImageId{2}});
    CHECK(g.nodes == std::set<ImageId>{ImageId{1}, ImageId{2}});
    CHECK(g.edges == std::set<MREdge>{{ImageId{1}, ImageId{2}}});

    g = graph_add_edge(g, {ImageId{1}, ImageId{2}});
    CHECK(g.edges.size() == 1);
}

TEST_CASE("add_edge rejects self loops") {
    ProvenanceGraph g;
    CHECK_THROWS_AS(g.add_edge({ImageId{3}, ImageId{3}}), Error);
    try {
        g.add_edge({ImageId{3}, ImageId{3}});
    } catch (const Error& e) {
        CHECK(e.code() == Errc::SelfLoop);
    }
}

TEST_CASE("validate: chains are acyclic, 2-cycles reported, orphans found") {
    ProvenanceGraph chain;
    chain.add_edge({ImageId{1}, ImageId{2}});
    chain.add_edge({ImageId{2}, ImageId{3}});
    CHECK(graph_validate(chain).cycles.empty());

    ProvenanceGraph loop;
    loop.add_edge({ImageId{1}, ImageId{2}});
    loop.add_edge({ImageId{2}, ImageId{1}});
    const ValidationReport r = graph_validate(loop);
    REQUIRE(r.cycles.size() == 1);
    CHECK(r.cycles[0] == std::vector<ImageId>{ImageId{1}, ImageId{2}});

    ProvenanceGraph orphaned;
    orphaned.add_node(ImageId{1});
    orphaned.add_node(ImageId{2});
    orphaned.add_node(ImageId{3});
    orphaned.add_edge({ImageId{1}, ImageId{2}});
    CHECK(graph_validate(orphaned).orphan_nodes == std::set<ImageId>{ImageId{3}});
}

TEST_CASE("validate enumerates elementary cycles up to the cap") {
    // two elementary cycles sharing node 1
    ProvenanceGraph g;
    g.add_edge({ImageId{1}, ImageId{2}});
    g.add_edge({ImageId{2}, ImageId{1}});
    g.add_edge({ImageId{1}, ImageId{3}});
    g.add_edge({ImageId{3}, ImageId{1}});
    CHECK(graph_validate(g).cycles.size() == 2);
    const ValidationReport capped = graph_validate(g, 1);
    CHECK(capped.cycles.size() == 1);
    CHECK(capped.cycle_cap_hit);
}

TEST_CASE("dot export lists nodes once and directed arrows") {
    ProvenanceGraph g;
    g.add_edge({ImageId{1}, ImageId{2}});
    const std::string dot = graph_to_dot(g);
    CHECK(dot.find("1 -> 2;") != std::string::npos);
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("  1;\n") != std::string::npos);
    CHECK(dot.find("  2;\n") != std::string::npos);
}

TEST_CASE("random mutations keep the edge/node invariants") {
    Rng rng(7);
    ProvenanceGraph g;
    for (int i = 0; i < 300; ++i) {
        const std::uint64_t a = static_cast<std::uint64_t>(rng.uniform_int(0, 40));
        const std::uint64_t b = static_cast<std::uint64_t>(rng.uniform_int(0, 40));
        if (a == b) continue;
        g.add_edge({ImageId{a}, ImageId{b}});
        check_graph_invariants(g);
    }
}

TEST_CASE("journal round-trips through its canonical text form") {
    Journal j;
    j.graph_id = "g000";
    j.graph.add_node(ImageId{0});
    j.graph.add_edge({ImageId{0}, ImageId{1}});
    j.graph.add_edge({ImageId{1}, ImageId{2}});
    j.node_files = {{ImageId{0}, "a.jpg"}, {ImageId{1}, "b.jpg"}, {ImageId{2}, "c.jpg"}};
    ModificationOp op;
    op.name = "brightness";
    op.params = {{"delta", 0.125}};
    j.edge_ops[{ImageId{0}, ImageId{1}}] = {op};
    j.edge_ops[{ImageId{1}, ImageId{2}}] = {};
    j.save_quality = {{ImageId{0}, 85}, {ImageId{1}, 90}, {ImageId{2}, 75}};

    const std::string text = journal_to_string(j);
    const Journal back = journal_from_string(text);
    CHECK(back == j);
    CHECK(journal_to_string(back) == text); // canonical form is a fixed point
}

TEST_CASE("journal file io and errors") {
    const std::string dir = iprov::testing::scratch_dir("core_journal");
    Journal j;
    j.graph_id = "g";
    j.graph.add_node(ImageId{5});
    j.node_files[ImageId{5}] = "x.jpg";
    journal_write(j, dir + "/j.json");
    CHECK(journal_read(dir + "/j.json") == j);

    SUBCASE("malformed text reports a parse error") {
        try {
            journal_from_string("{\"graph_id\": ");
            FAIL("expected ParseError");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::ParseError);
        }
    }

    SUBCASE("edge_ops key outside the edge set is inconsistent") {
        Journal bad = j;
        bad.edge_ops[{ImageId{5}, ImageId{6}}] = {};
        try {
            journal_to_string(bad);
            FAIL("expected InconsistentJournal");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::InconsistentJournal);
        }
    }

    SUBCASE("cyclic ground truth is rejected") {
        Journal bad = j;
        bad.graph.add_edge({ImageId{5}, ImageId{6}});
        bad.graph.add_edge({ImageId{6}, ImageId{5}});
        bad.edge_ops[{ImageId{5}, ImageId{6}}] = {};
        bad.edge_ops[{ImageId{6}, ImageId{5}}] = {};
        CHECK_THROWS_AS(journal_to_string(bad), Error);
    }
}

TEST_CASE("op catalog names the 21 operations plus the unrelated marker") {
    CHECK(op_catalog().size() == 22);
    CHECK(op_catalog_find("unrelated") != nullptr);
    CHECK(op_catalog_find("bogus") == nullptr);

    ModificationOp unknown;
    unknown.name = "bogus";
    CHECK_THROWS_AS(validate_op(unknown), Error);

    ModificationOp wrong_params;
    wrong_params.name = "brightness";
    wrong_params.params = {{"gain", 1.0}};
    CHECK_THROWS_AS(validate_op(wrong_params), Error);
}

} // TEST_SUITE
