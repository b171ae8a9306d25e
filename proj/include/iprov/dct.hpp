#pragma once

#include <array>
#include <vector>

namespace iprov::dct {

/// Orthonormal 8x8 DCT-II (the JPEG transform), separable.
void forward8x8(const float in[64], float out[64]);
void inverse8x8(const float in[64], float out[64]);

/// Annex-K luminance table scaled by the common libjpeg quality mapping
/// (scale = 5000/q below 50, else 200 - 2q), entries clamped to [1, 255].
std::array<int, 64> luma_quant_table(int quality);

/// Simulated JPEG luma pass: per 8x8 block, level-shift, DCT, quantize,
/// dequantize, inverse DCT. Partial edge blocks are replicate-padded. Output
/// clamped to [0, 255]; grid anchored at (0, 0).
std::vector<float> requantize_plane(const std::vector<float>& y, int w, int h, int quality);

} // namespace iprov::dct
