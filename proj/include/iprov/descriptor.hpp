#pragma once

#include <cstddef>
#include <vector>

#include "iprov/core.hpp"

namespace iprov {

inline constexpr std::size_t kGlobalDescriptorDim = 256;

/// Unit-norm global image representation used for constant-time pairwise
/// similarity. Layout (fixed, version 1):
///   [0,96)    4x4 grid x 6-bin luminance-gradient-orientation histograms
///   [96,192)  4x4 grid x (mean RGB, std RGB), /255
///   [192,256) 8x8 area-downsampled luminance, mean-subtracted, /255
struct GlobalDescriptor {
    std::vector<float> vector;

    std::size_t dim() const { return vector.size(); }
};

GlobalDescriptor extract_global(const ImageRecord& img);

/// Cosine similarity of unit vectors; throws DimMismatch on unequal dims.
double similarity(const GlobalDescriptor& a, const GlobalDescriptor& b);

struct LocalFeature {
    float x = 0;     // normalized position in [0,1]
    float y = 0;
    float scale = 1; // 2^octave
    float response = 0;
    float descriptor[32] = {}; // unit norm
};

struct LocalFeatureSet {
    std::vector<LocalFeature> features;
};

struct LocalFeatureParams {
    int max_features = 512;
    int octaves = 3;
};

/// Corner keypoints on a luminance pyramid with 32-d gradient descriptors
/// (4x4 subcells x 2 gradient sums). Returns what exists when the image has
/// few corners; requires width, height >= 32.
LocalFeatureSet extract_local(const ImageRecord& img, const LocalFeatureParams& params = {});

} // namespace iprov
