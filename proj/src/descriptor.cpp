#include "iprov/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iprov/pixels.hpp"

namespace iprov {

namespace {

constexpr double kPi = 3.14159265358979323846;

void l2_normalize(std::vector<float>& v) {
    double norm2 = 0;
    for (float x : v) norm2 += static_cast<double>(x) * x;
    if (norm2 < 1e-12) {
        // featureless content (e.g. an all-black raster): canonical uniform vector
        const float u = static_cast<float>(1.0 / std::sqrt(static_cast<double>(v.size())));
        std::fill(v.begin(), v.end(), u);
        return;
    }
    const double inv = 1.0 / std::sqrt(norm2 + 1e-12);
    for (float& x : v) x = static_cast<float>(x * inv);
}

} // namespace

GlobalDescriptor extract_global(const ImageRecord& img) {
    if (img.width < 8 || img.height < 8)
        raise(Errc::TooSmall, "extract_global needs at least 8x8 pixels");

    const int w = img.width, h = img.height;
    const std::vector<float> y = luminance(img);
    std::vector<float> v(kGlobalDescriptorDim, 0.0f);

    // Gradient-orientation histograms: 4x4 cells, 6 unsigned-orientation bins,
    // magnitude weighted, each cell L1-normalized.
    for (int cy = 0; cy < 4; ++cy) {
        for (int cx = 0; cx < 4; ++cx) {
            const int x0 = cx * w / 4, x1 = (cx + 1) * w / 4;
            const int y0 = cy * h / 4, y1 = (cy + 1) * h / 4;
            double hist[6] = {};
            for (int yy = std::max(1, y0); yy < std::min(h - 1, y1); ++yy) {
                for (int xx = std::max(1, x0); xx < std::min(w - 1, x1); ++xx) {
                    const double gx = y[yy * w + xx + 1] - y[yy * w + xx - 1];
                    const double gy = y[(yy + 1) * w + xx] - y[(yy - 1) * w + xx];
                    const double mag = std::sqrt(gx * gx + gy * gy);
                    if (mag <= 0) continue;
                    double angle = std::atan2(gy, gx); // [-pi, pi]
                    if (angle < 0) angle += kPi;       // unsigned orientation [0, pi)
                    int bin = static_cast<int>(angle / (kPi / 6.0));
                    if (bin > 5) bin = 5;
                    hist[bin] += mag;
                }
            }
            const double total = hist[0] + hist[1] + hist[2] + hist[3] + hist[4] + hist[5];
            const int base = (cy * 4 + cx) * 6;
            if (total > 0)
                for (int b = 0; b < 6; ++b) v[base + b] = static_cast<float>(hist[b] / total);
        }
    }

    // Color moments: 4x4 cells, per-channel mean and standard deviation.
    for (int cy = 0; cy < 4; ++cy) {
        for (int cx = 0; cx < 4; ++cx) {
            const int x0 = cx * w / 4, x1 = (cx + 1) * w / 4;
            const int y0 = cy * h / 4, y1 = (cy + 1) * h / 4;
            double sum[3] = {}, sum2[3] = {};
            int count = 0;
            for (int yy = y0; yy < y1; ++yy)
                for (int xx = x0; xx < x1; ++xx) {
                    const std::uint8_t* p = img.at(xx, yy);
                    for (int c = 0; c < 3; ++c) {
                        sum[c] += p[c];
                        sum2[c] += static_cast<double>(p[c]) * p[c];
                    }
                    ++count;
                }
            const int base = 96 + (cy * 4 + cx) * 6;
            for (int c = 0; c < 3; ++c) {
                const double mean = sum[c] / count;
                const double var = std::max(0.0, sum2[c] / count - mean * mean);
                v[base + c] = static_cast<float>(mean / 255.0);
                v[base + 3 + c] = static_cast<float>(std::sqrt(var) / 255.0);
            }
        }
    }

    // 8x8 downsampled luminance, mean subtracted.
    double lum_mean = 0;
    float cells[64];
    for (int cy = 0; cy < 8; ++cy) {
        for (int cx = 0; cx < 8; ++cx) {
            const int x0 = cx * w / 8, x1 = std::max(x0 + 1, (cx + 1) * w / 8);
            const int y0 = cy * h / 8, y1 = std::max(y0 + 1, (cy + 1) * h / 8);
            double acc = 0;
            for (int yy = y0; yy < y1; ++yy)
                for (int xx = x0; xx < x1; ++xx) acc += y[yy * w + xx];
            cells[cy * 8 + cx] = static_cast<float>(acc / ((x1 - x0) * (y1 - y0)) / 255.0);
            lum_mean += cells[cy * 8 + cx];
        }
    }
    lum_mean /= 64.0;
    for (int i = 0; i < 64; ++i) v[192 + i] = static_cast<float>(cells[i] - lum_mean);

    GlobalDescriptor d;
    d.vector = std::move(v);
    l2_normalize(d.vector);
    return d;
}

double similarity(const GlobalDescriptor& a, const GlobalDescriptor& b) {
    if (a.dim() != b.dim()) raise(Errc::DimMismatch, "descriptor dimensions differ");
    double dot = 0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += static_cast<double>(a.vector[i]) * b.vector[i];
    return std::clamp(dot, -1.0, 1.0);
}

namespace {

struct Candidate {
    int x, y, octave;
    float response;
};

// Harris corner response on one pyramid level.
void detect_level(const std::vector<float>& y, int w, int h, int octave,
                  std::vector<Candidate>* out) {
    if (w < 16 || h < 16) return;
    std::vector<float> ix(static_cast<std::size_t>(w) * h, 0.0f);
    std::vector<float> iy(ix.size(), 0.0f);
    for (int r = 1; r < h - 1; ++r)
        for (int c = 1; c < w - 1; ++c) {
            ix[r * w + c] = 0.5f * (y[r * w + c + 1] - y[r * w + c - 1]);
            iy[r * w + c] = 0.5f * (y[(r + 1) * w + c] - y[(r - 1) * w + c]);
        }

    std::vector<float> resp(ix.size(), 0.0f);
    float max_resp = 0;
    for (int r = 2; r < h - 2; ++r) {
        for (int c = 2; c < w - 2; ++c) {
            double sxx = 0, syy = 0, sxy = 0;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const float gx = ix[(r + dr) * w + c + dc];
                    const float gy = iy[(r + dr) * w + c + dc];
                    sxx += gx * gx;
                    syy += gy * gy;
                    sxy += gx * gy;
                }
            const double det = sxx * syy - sxy * sxy;
            const double tr = sxx + syy;
            const double hr = det - 0.06 * tr * tr;
            resp[r * w + c] = static_cast<float>(hr);
            if (hr > max_resp) max_resp = static_cast<float>(hr);
        }
    }
    if (max_resp <= 0) return;

    const float threshold = 0.0005f * max_resp;
    for (int r = 2; r < h - 2; ++r) {
        for (int c = 2; c < w - 2; ++c) {
            const float v = resp[r * w + c];
            if (v < threshold) continue;
            bool is_max = true;
            for (int dr = -1; dr <= 1 && is_max; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    if (resp[(r + dr) * w + c + dc] > v) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) out->push_back({c, r, octave, v});
        }
    }
}

std::vector<float> halve(const std::vector<float>& y, int w, int h, int* nw, int* nh) {
    *nw = w / 2;
    *nh = h / 2;
    std::vector<float> out(static_cast<std::size_t>(*nw) * *nh);
    for (int r = 0; r < *nh; ++r)
        for (int c = 0; c < *nw; ++c)
            out[r * *nw + c] = 0.25f * (y[2 * r * w + 2 * c] + y[2 * r * w + 2 * c + 1] +
                                        y[(2 * r + 1) * w + 2 * c] + y[(2 * r + 1) * w + 2 * c + 1]);
    return out;
}

// 32-d patch descriptor: 16x16 neighborhood, 4x4 subcells, per-subcell
// (sum gx, sum gy) centered on the patch-mean gradient, L2-normalized.
// Centering removes the smooth background gradient that would otherwise
// dominate every subcell and collapse descriptor distinctiveness.
bool describe(const std::vector<float>& y, int w, int h, int px, int py, float out[32]) {
    double acc[32] = {};
    for (int sr = 0; sr < 4; ++sr) {
        for (int sc = 0; sc < 4; ++sc) {
            double gx_sum = 0, gy_sum = 0;
            for (int dr = 0; dr < 4; ++dr) {
                for (int dc = 0; dc < 4; ++dc) {
                    const int r = std::clamp(py - 8 + sr * 4 + dr, 1, h - 2);
                    const int c = std::clamp(px - 8 + sc * 4 + dc, 1, w - 2);
                    gx_sum += y[r * w + c + 1] - y[r * w + c - 1];
                    gy_sum += y[(r + 1) * w + c] - y[(r - 1) * w + c];
                }
            }
            acc[(sr * 4 + sc) * 2] = gx_sum;
            acc[(sr * 4 + sc) * 2 + 1] = gy_sum;
        }
    }
    double mean_gx = 0, mean_gy = 0;
    for (int i = 0; i < 16; ++i) {
        mean_gx += acc[2 * i];
        mean_gy += acc[2 * i + 1];
    }
    mean_gx /= 16.0;
    mean_gy /= 16.0;
    for (int i = 0; i < 16; ++i) {
        acc[2 * i] -= mean_gx;
        acc[2 * i + 1] -= mean_gy;
    }
    double norm2 = 0;
    for (double a : acc) norm2 += a * a;
    if (norm2 < 1e-9) return false; // textureless or purely linear patch
    const double inv = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < 32; ++i) out[i] = static_cast<float>(acc[i] * inv);
    return true;
}

} // namespace

LocalFeatureSet extract_local(const ImageRecord& img, const LocalFeatureParams& params) {
    if (img.width < 32 || img.height < 32)
        raise(Errc::TooSmall, "extract_local needs at least 32x32 pixels");

    std::vector<Candidate> candidates;
    std::vector<std::vector<float>> levels;
    std::vector<int> widths, heights;

    levels.push_back(luminance(img));
    widths.push_back(img.width);
    heights.push_back(img.height);
    for (int o = 1; o < params.octaves; ++o) {
        int nw = 0, nh = 0;
        auto next = halve(levels.back(), widths.back(), heights.back(), &nw, &nh);
        if (nw < 16 || nh < 16) break;
        levels.push_back(std::move(next));
        widths.push_back(nw);
        heights.push_back(nh);
    }
    for (std::size_t o = 0; o < levels.size(); ++o)
        detect_level(levels[o], widths[o], heights[o], static_cast<int>(o), &candidates);

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.octave != b.octave) return a.octave < b.octave;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    LocalFeatureSet set;
    for (const Candidate& c : candidates) {
        if (static_cast<int>(set.features.size()) >= params.max_features) break;
        LocalFeature f;
        const int w = widths[c.octave], h = heights[c.octave];
        if (!describe(levels[c.octave], w, h, c.x, c.y, f.descriptor)) continue;
        const float scale = static_cast<float>(1 << c.octave);
        f.x = std::clamp((c.x * scale) / (img.width - 1), 0.0f, 1.0f);
        f.y = std::clamp((c.y * scale) / (img.height - 1), 0.0f, 1.0f);
        f.scale = scale;
        f.response = c.response;
        set.features.push_back(f);
    }
    return set;
}

} // namespace iprov
