#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "iprov/core.hpp"

namespace iprov {

inline std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0) + 0.5);
}

inline float luma_bt601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return 0.299f * r + 0.587f * g + 0.114f * b;
}

/// BT.601 luminance plane, matching JPEG's luma convention.
std::vector<float> luminance(const ImageRecord& img);

/// Bilinear sample with edge clamping; (x, y) in pixel coordinates.
void sample_bilinear(const ImageRecord& img, double x, double y, double out_rgb[3]);

/// Area-average resize.
ImageRecord resize(const ImageRecord& img, int new_width, int new_height);

} // namespace iprov
