#include "iprov/dct.hpp"

#include <algorithm>
#include <cmath>

namespace iprov::dct {

namespace {

struct Basis {
    float c[8][8]; // c[u][x] = a(u) cos((2x+1) u pi / 16)
    Basis() {
        const double pi = 3.14159265358979323846;
        for (int u = 0; u < 8; ++u) {
            const double a = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int x = 0; x < 8; ++x)
                c[u][x] = static_cast<float>(a * std::cos((2 * x + 1) * u * pi / 16.0));
        }
    }
};

const Basis& basis() {
    static const Basis b;
    return b;
}

const int kAnnexKLuma[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  //
    12, 12, 14, 19, 26,  58,  60,  55,  //
    14, 13, 16, 24, 40,  57,  69,  56,  //
    14, 17, 22, 29, 51,  87,  80,  62,  //
    18, 22, 37, 56, 68,  109, 103, 77,  //
    24, 35, 55, 64, 81,  104, 113, 92,  //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
};

} // namespace

void forward8x8(const float in[64], float out[64]) {
    const Basis& b = basis();
    float tmp[64];
    // rows
    for (int r = 0; r < 8; ++r)
        for (int u = 0; u < 8; ++u) {
            float acc = 0;
            for (int x = 0; x < 8; ++x) acc += in[r * 8 + x] * b.c[u][x];
            tmp[r * 8 + u] = acc;
        }
    // columns
    for (int c = 0; c < 8; ++c)
        for (int u = 0; u < 8; ++u) {
            float acc = 0;
            for (int y = 0; y < 8; ++y) acc += tmp[y * 8 + c] * b.c[u][y];
            out[u * 8 + c] = acc;
        }
}

void inverse8x8(const float in[64], float out[64]) {
    const Basis& b = basis();
    float tmp[64];
    for (int c = 0; c < 8; ++c)
        for (int y = 0; y < 8; ++y) {
            float acc = 0;
            for (int u = 0; u < 8; ++u) acc += in[u * 8 + c] * b.c[u][y];
            tmp[y * 8 + c] = acc;
        }
    for (int r = 0; r < 8; ++r)
        for (int x = 0; x < 8; ++x) {
            float acc = 0;
            for (int u = 0; u < 8; ++u) acc += tmp[r * 8 + u] * b.c[u][x];
            out[r * 8 + x] = acc;
        }
}

std::array<int, 64> luma_quant_table(int quality) {
    quality = std::clamp(quality, 1, 100);
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<int, 64> table;
    for (int i = 0; i < 64; ++i)
        table[i] = std::clamp((kAnnexKLuma[i] * scale + 50) / 100, 1, 255);
    return table;
}

std::vector<float> requantize_plane(const std::vector<float>& y, int w, int h, int quality) {
    const std::array<int, 64> q = luma_quant_table(quality);
    std::vector<float> out(y.size());

    float block[64], coef[64], recon[64];
    for (int by = 0; by < h; by += 8) {
        for (int bx = 0; bx < w; bx += 8) {
            for (int r = 0; r < 8; ++r) {
                const int yy = std::min(by + r, h - 1);
                for (int c = 0; c < 8; ++c) {
                    const int xx = std::min(bx + c, w - 1);
                    block[r * 8 + c] = y[static_cast<std::size_t>(yy) * w + xx] - 128.0f;
                }
            }
            forward8x8(block, coef);
            for (int i = 0; i < 64; ++i)
                coef[i] = std::nearbyint(coef[i] / q[i]) * q[i];
            inverse8x8(coef, recon);
            const int rmax = std::min(8, h - by), cmax = std::min(8, w - bx);
            for (int r = 0; r < rmax; ++r)
                for (int c = 0; c < cmax; ++c)
                    out[static_cast<std::size_t>(by + r) * w + bx + c] =
                        std::clamp(recon[r * 8 + c] + 128.0f, 0.0f, 255.0f);
        }
    }
    return out;
}

} // namespace iprov::dct
