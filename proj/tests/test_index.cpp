#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "iprov/index.hpp"
#include "iprov/rng.hpp"

using namespace iprov;

namespace {

GlobalDescriptor unit_vec(std::size_t dim, std::size_t axis) {
    GlobalDescriptor d;
    d.vector.assign(dim, 0.0f);
    d.vector[axis] = 1.0f;
    return d;
}

GlobalDescriptor random_unit(Rng& rng, std::size_t dim) {
    GlobalDescriptor d;
    d.vector.resize(dim);
    double norm2 = 0;
    for (float& v : d.vector) {
        v = static_cast<float>(rng.normal());
        norm2 += static_cast<double>(v) * v;
    }
    const double inv = 1.0 / std::sqrt(norm2 + 1e-12);
    for (float& v : d.vector) v = static_cast<float>(v * inv);
    return d;
}

// Independent oracle: full sort by (-score, id) over a naive similarity pass.
std::vector<SearchHit> naive_top_k(const std::vector<ImageId>& ids,
                                   const std::vector<GlobalDescriptor>& descs,
                                   const GlobalDescriptor& q, std::size_t k) {
    std::vector<SearchHit> all;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        double dot = 0;
        for (std::size_t d = 0; d < q.dim(); ++d)
            dot += static_cast<double>(descs[i].vector[d]) * q.vector[d];
        all.push_back({ids[i], dot});
    }
    std::sort(all.begin(), all.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    all.resize(std::min(k, all.size()));
    return all;
}

} // namespace

TEST_SUITE("index") {

TEST_CASE("insert then query ranks the stored descriptor first") {
    DescriptorIndex idx(8);
    const GlobalDescriptor d = unit_vec(8, 3);
    idx.insert(ImageId{42}, d);
    const auto hits = idx.top_k(d, 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].id == ImageId{42});
    CHECK(hits[0].score == doctest::Approx(1.0));
}

TEST_CASE("duplicate ids are rejected") {
    DescriptorIndex idx(8);
    idx.insert(ImageId{1}, unit_vec(8, 0));
    try {
        idx.insert(ImageId{1}, unit_vec(8, 1));
        FAIL("expected DuplicateId");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DuplicateId);
    }
}

TEST_CASE("bulk insert and k larger than the index") {
    Rng rng(3);
    DescriptorIndex idx(16);
    for (std::uint64_t i = 0; i < 1000; ++i) idx.insert(ImageId{i}, random_unit(rng, 16));
    CHECK(idx.size() == 1000);
    CHECK(idx.top_k(random_unit(rng, 16), 5000).size() == 1000);
    CHECK(idx.top_k(random_unit(rng, 16), 7).size() == 7);
}

TEST_CASE("orthogonal entries score exactly at the poles") {
    DescriptorIndex idx(4);
    for (std::size_t a = 0; a < 3; ++a) idx.insert(ImageId{a}, unit_vec(4, a));
    const auto hits = idx.top_k(unit_vec(4, 1), 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].id == ImageId{1});
    CHECK(hits[0].score == doctest::Approx(1.0));
    CHECK(hits[1].score == doctest::Approx(0.0));
    CHECK(hits[2].score == doctest::Approx(0.0));
    // score ties broken by ascending id
    CHECK(hits[1].id == ImageId{0});
    CHECK(hits[2].id == ImageId{2});
}

TEST_CASE("empty index yields an empty result") {
    DescriptorIndex idx(8);
    CHECK(idx.top_k(unit_vec(8, 0), 10).empty());
}

TEST_CASE("top_k equals the naive full-sort oracle on 5000 entries") {
    Rng rng(11);
    const std::size_t dim = 64; // keeps the 100-query oracle sweep quick
    DescriptorIndex idx(dim);
    std::vector<ImageId> ids;
    std::vector<GlobalDescriptor> descs;
    for (std::uint64_t i = 0; i < 5000; ++i) {
        ids.push_back(ImageId{i});
        descs.push_back(random_unit(rng, dim));
        idx.insert(ids.back(), descs.back());
    }
    for (int q = 0; q < 100; ++q) {
        const GlobalDescriptor query = random_unit(rng, dim);
        std::uint64_t evals = 0;
        const auto got = idx.top_k(query, 20, &evals);
        const auto want = naive_top_k(ids, descs, query, 20);
        CHECK(evals == 5000); // one similarity evaluation per stored entry
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].id == want[i].id);
            CHECK(got[i].score == want[i].score);
        }
    }
}

TEST_CASE("top_k(k) is a prefix of the full ranking") {
    Rng rng(19);
    DescriptorIndex idx(32);
    for (std::uint64_t i = 0; i < 200; ++i) idx.insert(ImageId{i}, random_unit(rng, 32));
    const GlobalDescriptor q = random_unit(rng, 32);
    const auto full = idx.top_k(q, 200);
    const auto part = idx.top_k(q, 13);
    REQUIRE(part.size() == 13);
    for (std::size_t i = 0; i < part.size(); ++i) CHECK(part[i].id == full[i].id);
}

TEST_CASE("IPDX persistence round-trips and rejects corruption") {
    const std::string dir = iprov::testing::scratch_dir("index_io");
    Rng rng(5);
    DescriptorIndex idx(24);
    for (std::uint64_t i = 0; i < 50; ++i) idx.insert(ImageId{i * 3}, random_unit(rng, 24));
    const std::string path = dir + "/d.ipdx";
    idx.save(path);

    const DescriptorIndex back = DescriptorIndex::load(path);
    CHECK(back.size() == idx.size());
    CHECK(back.dim() == idx.dim());
    const GlobalDescriptor q = random_unit(rng, 24);
    const auto a = idx.top_k(q, 50);
    const auto b = back.top_k(q, 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].score == b[i].score);
    }

    SUBCASE("empty index round-trips") {
        DescriptorIndex empty(24);
        empty.save(dir + "/empty.ipdx");
        CHECK(DescriptorIndex::load(dir + "/empty.ipdx").size() == 0);
    }

    SUBCASE("corrupt magic byte") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.put('X');
        f.close();
        try {
            DescriptorIndex::load(path);
            FAIL("expected BadMagic");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::BadMagic);
        }
    }

    SUBCASE("truncated file reports the offset") {
        const auto size = std::filesystem::file_size(path);
        std::filesystem::resize_file(path, size - 3);
        try {
            DescriptorIndex::load(path);
            FAIL("expected Truncated");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::Truncated);
            CHECK(std::string(e.what()).find("offset") != std::string::npos);
        }
    }
}

} // TEST_SUITE
