#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "iprov/descriptor.hpp"
#include "iprov/imageio.hpp"
#include "iprov/pairwise.hpp"
#include "iprov/synth.hpp"

using namespace iprov;
using iprov::testing::test_seed;

TEST_SUITE("descriptor") {

TEST_CASE("identical pixels give identical descriptors") {
    const ImageRecord img = test_seed(1);
    const GlobalDescriptor a = extract_global(img);
    const GlobalDescriptor b = extract_global(img);
    CHECK(a.vector == b.vector);
    CHECK(a.dim() == kGlobalDescriptorDim);
}

TEST_CASE("descriptors are unit norm, including for degenerate images") {
    const auto norm = [](const GlobalDescriptor& d) {
        double n = 0;
        for (float v : d.vector) n += static_cast<double>(v) * v;
        return std::sqrt(n);
    };
    CHECK(norm(extract_global(test_seed(2))) == doctest::Approx(1.0).epsilon(1e-6));

    ImageRecord flat = make_image(ImageId{0}, 64, 64);
    std::fill(flat.pixels.begin(), flat.pixels.end(), static_cast<std::uint8_t>(128));
    CHECK(norm(extract_global(flat)) == doctest::Approx(1.0).epsilon(1e-6));

    ImageRecord black = make_image(ImageId{0}, 32, 32);
    CHECK(norm(extract_global(black)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("similarity is cosine with exact poles") {
    const GlobalDescriptor v = extract_global(test_seed(3));
    CHECK(similarity(v, v) == doctest::Approx(1.0).epsilon(1e-6));

    GlobalDescriptor neg = v;
    for (float& x : neg.vector) x = -x;
    CHECK(similarity(v, neg) == doctest::Approx(-1.0).epsilon(1e-6));

    GlobalDescriptor e0, e1;
    e0.vector.assign(kGlobalDescriptorDim, 0.0f);
    e1.vector.assign(kGlobalDescriptorDim, 0.0f);
    e0.vector[0] = 1.0f;
    e1.vector[1] = 1.0f;
    CHECK(similarity(e0, e1) == doctest::Approx(0.0));

    GlobalDescriptor short_vec;
    short_vec.vector.assign(16, 0.25f);
    CHECK_THROWS_AS(similarity(v, short_vec), Error);
}

TEST_CASE("quality-90 resave keeps cosine above the regression floor") {
    const ImageRecord img = test_seed(4);
    const ImageRecord resaved = jpeg_roundtrip(img, 90);
    const double cos = similarity(extract_global(img), extract_global(resaved));
    CHECK(cos > 0.99); // measured ~0.9999 on these fixtures; frozen floor
}

TEST_CASE("mild modifications stay closer than distractors by a clear gap") {
    double sum_related = 0, sum_distractor = 0;
    const int pairs = 200;
    Rng rng(99);
    for (int i = 0; i < pairs; ++i) {
        const ImageRecord original = test_seed(1000 + i, 192, 192);
        Rng op_rng = rng.fork(i);
        const char* mild_ops[] = {"brightness", "contrast", "color_jitter", "saturation"};
        const ModificationOp op = draw_op(mild_ops[i % 4], op_rng);
        const ImageRecord modified = apply_modification(original, op, op_rng);
        const ImageRecord distractor = test_seed(500000 + i, 192, 192);

        const GlobalDescriptor d0 = extract_global(original);
        sum_related += similarity(d0, extract_global(modified));
        sum_distractor += similarity(d0, extract_global(distractor));
    }
    const double gap = (sum_related - sum_distractor) / pairs;
    CHECK(gap > 0.1);
}

TEST_CASE("extract_global requires 8x8, extract_local requires 32x32") {
    ImageRecord tiny = make_image(ImageId{0}, 4, 4);
    CHECK_THROWS_AS(extract_global(tiny), Error);
    ImageRecord small = make_image(ImageId{0}, 16, 16);
    CHECK_THROWS_AS(extract_local(small), Error);
}

TEST_CASE("local features: self-extraction is deterministic and in range") {
    const ImageRecord img = test_seed(5);
    const LocalFeatureSet a = extract_local(img);
    const LocalFeatureSet b = extract_local(img);
    REQUIRE(a.features.size() == b.features.size());
    CHECK(a.features.size() > 32);
    CHECK(a.features.size() <= 512);
    for (std::size_t i = 0; i < a.features.size(); ++i) {
        const LocalFeature& f = a.features[i];
        CHECK(f.x >= 0.0f);
        CHECK(f.x <= 1.0f);
        CHECK(f.y >= 0.0f);
        CHECK(f.y <= 1.0f);
        CHECK(f.scale >= 1.0f);
        double norm = 0;
        for (float v : f.descriptor) norm += static_cast<double>(v) * v;
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(std::equal(std::begin(f.descriptor), std::end(f.descriptor),
                         std::begin(b.features[i].descriptor)));
    }
}

TEST_CASE("flat image yields no features") {
    ImageRecord flat = make_image(ImageId{0}, 128, 128);
    std::fill(flat.pixels.begin(), flat.pixels.end(), static_cast<std::uint8_t>(77));
    CHECK(extract_local(flat).features.empty());
}

TEST_CASE("scaled copy matches better than an unrelated pair") {
    // inlier-fraction ordering measured through the relationship confidence
    double scaled_conf = 0, unrelated_conf = 0;
    for (int i = 0; i < 10; ++i) {
        ImageRecord original = test_seed(3000 + i);
        original.id = ImageId{1};
        ModificationOp op;
        op.name = "scale";
        op.params = {{"factor", 0.8}};
        Rng rng(1);
        ImageRecord scaled = apply_modification(original, op, rng);
        scaled.id = ImageId{2};
        ImageRecord unrelated = test_seed(700000 + i);
        unrelated.id = ImageId{3};

        scaled_conf += analyze_relationship(original, scaled).confidence;
        unrelated_conf += analyze_relationship(original, unrelated).confidence;
    }
    CHECK(scaled_conf > unrelated_conf);
}

} // TEST_SUITE
