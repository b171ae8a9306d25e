#include "iprov/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "iprov/config.hpp"
#include "iprov/imageio.hpp"
#include "iprov/pixels.hpp"

namespace iprov {

namespace fs = std::filesystem;

// --- procedural seed images ---------------------------------------------------

namespace {

void blend_px(ImageRecord& img, int x, int y, const double rgb[3], double alpha) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    std::uint8_t* p = img.at(x, y);
    for (int c = 0; c < 3; ++c) p[c] = clamp_u8(p[c] * (1 - alpha) + rgb[c] * alpha);
}

// single-octave bilinear lattice noise
std::vector<float> value_noise(int w, int h, int cell, Rng& rng) {
    const int gw = w / cell + 2, gh = h / cell + 2;
    std::vector<float> lattice(static_cast<std::size_t>(gw) * gh);
    for (float& v : lattice) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    std::vector<float> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const int gy = y / cell;
        const float fy = static_cast<float>(y % cell) / cell;
        for (int x = 0; x < w; ++x) {
            const int gx = x / cell;
            const float fx = static_cast<float>(x % cell) / cell;
            const float v00 = lattice[gy * gw + gx], v10 = lattice[gy * gw + gx + 1];
            const float v01 = lattice[(gy + 1) * gw + gx], v11 = lattice[(gy + 1) * gw + gx + 1];
            out[static_cast<std::size_t>(y) * w + x] =
                (v00 * (1 - fx) + v10 * fx) * (1 - fy) + (v01 * (1 - fx) + v11 * fx) * fy;
        }
    }
    return out;
}

} // namespace

ImageRecord make_seed_image(int width, int height, Rng& rng, ImageId id) {
    ImageRecord img = make_image(id, width, height, ImageFormat::Other);

    double c0[3], c1[3], c2[3];
    for (int c = 0; c < 3; ++c) {
        c0[c] = rng.uniform(20, 235);
        c1[c] = rng.uniform(20, 235);
        c2[c] = rng.uniform(20, 235);
    }
    for (int y = 0; y < height; ++y) {
        const double fy = static_cast<double>(y) / (height - 1);
        for (int x = 0; x < width; ++x) {
            const double fx = static_cast<double>(x) / (width - 1);
            std::uint8_t* p = img.at(x, y);
            for (int c = 0; c < 3; ++c)
                p[c] = clamp_u8(c0[c] * (1 - fx) + c1[c] * fx + (c2[c] - c0[c]) * fy * 0.5);
        }
    }

    // multi-octave texture, per-image cell sizes
    const int base_cell = static_cast<int>(rng.uniform_int(20, 44));
    const std::vector<float> n0 = value_noise(width, height, base_cell, rng);
    const std::vector<float> n1 = value_noise(width, height, std::max(4, base_cell / 2), rng);
    const std::vector<float> n2 = value_noise(width, height, std::max(3, base_cell / 4), rng);
    const double amp = rng.uniform(16.0, 28.0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            const double t = amp * n0[i] + 0.5 * amp * n1[i] + 0.25 * amp * n2[i];
            std::uint8_t* p = img.at(x, y);
            for (int c = 0; c < 3; ++c) p[c] = clamp_u8(p[c] + t);
        }

    // rotated boxes, ellipses and triangles; varied styles keep corner
    // neighborhoods distinctive across independently drawn seeds
    const int shapes = static_cast<int>(rng.uniform_int(8, 14));
    for (int s = 0; s < shapes; ++s) {
        double rgb[3] = {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
        const double alpha = rng.uniform(0.55, 1.0);
        const double cx = rng.uniform(0, width - 1);
        const double cy = rng.uniform(0, height - 1);
        const double rx = rng.uniform(width / 16.0, width / 4.0);
        const double ry = rng.uniform(height / 16.0, height / 4.0);
        const double theta = rng.uniform(0.0, 3.141592653589793);
        const double ux = std::cos(theta), uy = std::sin(theta);
        const int kind = static_cast<int>(rng.uniform_int(0, 2));
        const double span = std::max(rx, ry) + 1;
        for (int y = static_cast<int>(cy - span); y <= static_cast<int>(cy + span); ++y) {
            for (int x = static_cast<int>(cx - span); x <= static_cast<int>(cx + span); ++x) {
                const double dx = x - cx, dy = y - cy;
                const double u = dx * ux + dy * uy;   // rotated frame
                const double v = -dx * uy + dy * ux;
                bool inside = false;
                switch (kind) {
                    case 0: inside = std::abs(u) <= rx && std::abs(v) <= ry; break;
                    case 1: inside = (u * u) / (rx * rx) + (v * v) / (ry * ry) <= 1.0; break;
                    default: inside = v >= -ry && std::abs(u) <= rx * (ry - v) / (2 * ry); break;
                }
                if (inside) blend_px(img, x, y, rgb, alpha);
            }
        }
    }
    return img;
}

// --- op catalog: parameter draws ----------------------------------------------

ModificationOp draw_op(const std::string& name, Rng& rng) {
    if (!op_catalog_find(name)) raise(Errc::UnknownOp, "'" + name + "'");
    ModificationOp op;
    op.name = name;
    auto& p = op.params;
    if (name == "color_jitter") {
        p["gain_r"] = rng.uniform(0.8, 1.2);
        p["gain_g"] = rng.uniform(0.8, 1.2);
        p["gain_b"] = rng.uniform(0.8, 1.2);
    } else if (name == "contrast") {
        p["factor"] = rng.uniform(0.7, 1.3);
    } else if (name == "brightness") {
        p["delta"] = rng.uniform(-0.3, 0.3);
    } else if (name == "saturation") {
        p["factor"] = rng.uniform(0.5, 1.5);
    } else if (name == "perspective_warp") {
        p["jitter"] = rng.uniform(0.02, 0.08);
    } else if (name == "aspect_ratio") {
        p["factor"] = rng.uniform(0.8, 1.25);
    } else if (name == "pad") {
        p["frac"] = rng.uniform(0.02, 0.10);
        p["r"] = rng.uniform(0, 255);
        p["g"] = rng.uniform(0, 255);
        p["b"] = rng.uniform(0, 255);
    } else if (name == "scale") {
        p["factor"] = rng.uniform(0.6, 1.4);
    } else if (name == "rotate") {
        p["degrees"] = rng.uniform(-30.0, 30.0);
    } else if (name == "pixelize") {
        p["block"] = static_cast<double>(4 * rng.uniform_int(1, 4));
    } else if (name == "quality_encode") {
        p["quality"] = static_cast<double>(rng.uniform_int(40, 90));
    } else if (name == "gaussian_noise") {
        p["sigma"] = rng.uniform(2.0, 10.0);
    } else if (name == "sharpen") {
        p["amount"] = rng.uniform(0.3, 1.0);
    } else if (name == "opacity") {
        p["alpha"] = rng.uniform(0.7, 0.95);
    } else if (name == "shuffle") {
        p["grid"] = static_cast<double>(rng.uniform_int(2, 4));
    } else if (name == "crop") {
        p["area"] = rng.uniform(0.6, 0.9);
        p["cx"] = rng.uniform(0.0, 1.0);
        p["cy"] = rng.uniform(0.0, 1.0);
    } else if (name == "tamper_splice") {
        p["area"] = rng.uniform(0.10, 0.25);
        p["x"] = rng.uniform(0.0, 1.0);
        p["y"] = rng.uniform(0.0, 1.0);
    } else if (name == "meme_text") {
        p["height_frac"] = rng.uniform(0.08, 0.15);
    }
    // grayscale / hflip / vflip / unrelated carry no parameters
    return op;
}

// --- op implementations ---------------------------------------------------------

namespace {

ImageRecord map_pixels(const ImageRecord& img, const std::function<void(const std::uint8_t*, std::uint8_t*)>& fn) {
    ImageRecord out = img;
    const std::uint8_t* src = img.pixels.data();
    std::uint8_t* dst = out.pixels.data();
    for (std::size_t i = 0; i < img.pixel_count(); ++i, src += 3, dst += 3) fn(src, dst);
    return out;
}

// 8x8 homography solve from 4 point correspondences (dst -> src), h33 = 1.
bool solve_homography(const double dst[4][2], const double src[4][2], double h[9]) {
    double a[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        const double x = dst[i][0], y = dst[i][1];
        const double u = src[i][0], v = src[i][1];
        double* r0 = a[2 * i];
        double* r1 = a[2 * i + 1];
        r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -u * x; r0[7] = -u * y; r0[8] = u;
        r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -v * x; r1[7] = -v * y; r1[8] = v;
    }
    for (int col = 0; col < 8; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 8; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) return false;
        std::swap_ranges(a[col], a[col] + 9, a[pivot]);
        for (int r = 0; r < 8; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 9; ++c) a[r][c] -= f * a[col][c];
        }
    }
    for (int i = 0; i < 8; ++i) h[i] = a[i][8] / a[i][i];
    h[8] = 1.0;
    return true;
}

ImageRecord warp_homography(const ImageRecord& img, const double h[9]) {
    ImageRecord out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double wdiv = h[6] * x + h[7] * y + h[8];
            const double sx = (h[0] * x + h[1] * y + h[2]) / wdiv;
            const double sy = (h[3] * x + h[4] * y + h[5]) / wdiv;
            double rgb[3];
            sample_bilinear(img, sx, sy, rgb);
            std::uint8_t* p = out.at(x, y);
            for (int c = 0; c < 3; ++c) p[c] = clamp_u8(rgb[c]);
        }
    return out;
}

ImageRecord op_shuffle(const ImageRecord& img, int grid, Rng& rng) {
    std::vector<int> perm(static_cast<std::size_t>(grid) * grid);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    rng.shuffle(perm);
    ImageRecord out = img;
    for (int ty = 0; ty < grid; ++ty)
        for (int tx = 0; tx < grid; ++tx) {
            const int s = perm[ty * grid + tx];
            const int sx0 = (s % grid) * img.width / grid, sy0 = (s / grid) * img.height / grid;
            const int dx0 = tx * img.width / grid, dy0 = ty * img.height / grid;
            const int tw = std::min((tx + 1) * img.width / grid, img.width) - dx0;
            const int th = std::min((ty + 1) * img.height / grid, img.height) - dy0;
            for (int y = 0; y < th; ++y)
                for (int x = 0; x < tw; ++x) {
                    const int sx = std::min(sx0 + x, img.width - 1);
                    const int sy = std::min(sy0 + y, img.height - 1);
                    std::copy_n(img.at(sx, sy), 3, out.at(dx0 + x, dy0 + y));
                }
        }
    return out;
}

ImageRecord op_meme_text(const ImageRecord& img, double height_frac, Rng& rng) {
    ImageRecord out = img;
    const int band = std::max(8, static_cast<int>(height_frac * img.height));
    const bool top = rng.chance(0.5);
    const int y0 = top ? 0 : img.height - band;
    for (int y = y0; y < y0 + band; ++y)
        for (int x = 0; x < img.width; ++x) {
            std::uint8_t* p = out.at(x, y);
            p[0] = p[1] = p[2] = 24;
        }
    // light word-like blocks
    const int word_h = std::max(4, band * 2 / 5);
    const int wy = y0 + (band - word_h) / 2;
    int x = img.width / 20;
    while (x < img.width * 19 / 20) {
        const int word_w = static_cast<int>(rng.uniform_int(img.width / 14, img.width / 6));
        for (int yy = wy; yy < wy + word_h; ++yy)
            for (int xx = x; xx < std::min(x + word_w, img.width * 19 / 20); ++xx) {
                std::uint8_t* p = out.at(xx, yy);
                p[0] = p[1] = p[2] = 236;
            }
        x += word_w + img.width / 30;
    }
    return out;
}

} // namespace

ImageRecord apply_splice(const ImageRecord& img, const ImageRecord& donor, double area, double x,
                         double y) {
    ImageRecord out = img;
    const double side = std::sqrt(std::clamp(area, 0.01, 0.9));
    const int rw = std::max(4, static_cast<int>(side * img.width));
    const int rh = std::max(4, static_cast<int>(side * img.height));
    const int x0 = static_cast<int>(x * std::max(0, img.width - rw));
    const int y0 = static_cast<int>(y * std::max(0, img.height - rh));
    for (int yy = 0; yy < rh && y0 + yy < img.height; ++yy)
        for (int xx = 0; xx < rw && x0 + xx < img.width; ++xx) {
            const int sx = std::min(xx * donor.width / std::max(1, rw), donor.width - 1);
            const int sy = std::min(yy * donor.height / std::max(1, rh), donor.height - 1);
            std::copy_n(donor.at(sx, sy), 3, out.at(x0 + xx, y0 + yy));
        }
    return out;
}

ImageRecord apply_modification(const ImageRecord& img, const ModificationOp& op, Rng& rng) {
    validate_op(op);
    const auto& p = op.params;
    const auto param = [&](const char* key) { return p.at(key); };

    if (op.name == "color_jitter") {
        const double gr = param("gain_r"), gg = param("gain_g"), gb = param("gain_b");
        return map_pixels(img, [&](const std::uint8_t* s, std::uint8_t* d) {
            d[0] = clamp_u8(s[0] * gr);
            d[1] = clamp_u8(s[1] * gg);
            d[2] = clamp_u8(s[2] * gb);
        });
    }
    if (op.name == "contrast") {
        const double f = param("factor");
        return map_pixels(img, [&](const std::uint8_t* s, std::uint8_t* d) {
            for (int c = 0; c < 3; ++c) d[c] = clamp_u8((s[c] - 128.0) * f + 128.0);
        });
    }
    if (op.name == "brightness") {
        const double delta = param("delta") * 255.0;
        return map_pixels(img, [&](const std::uint8_t* s, std::uint8_t* d) {
            for (int c = 0; c < 3; ++c) d[c] = clamp_u8(s[c] + delta);
        });
    }
    if (op.name == "saturation") {
        const double f = param("factor");
        return map_pixels(img, [&](const std::uint8_t* s, std::uint8_t* d) {
            const double y = luma_bt601(s[0], s[1], s[2]);
            for (int c = 0; c < 3; ++c) d[c] = clamp_u8(y + (s[c] - y) * f);
        });
    }
    if (op.name == "grayscale") {
        return map_pixels(img, [&](const std::uint8_t* s, std::uint8_t* d) {
            const std::uint8_t y = clamp_u8(luma_bt601(s[0], s[1], s[2]));
            d[0] = d[1] = d[2] = y;
        });
    }
    if (op.name == "perspective_warp") {
        const double j = param("jitter") * std::min(img.width, img.height);
        const double w = img.width - 1.0, h = img.height - 1.0;
        double dst[4][2] = {{0, 0}, {w, 0}, {w, h}, {0, h}};
        double src[4][2];
        for (int i = 0; i < 4; ++i) {
            src[i][0] = dst[i][0] + rng.uniform(-j, j);
            src[i][1] = dst[i][1] + rng.uniform(-j, j);
        }
        double hm[9];
        if (!solve_homography(dst, src, hm)) return img;
        return warp_homography(img, hm);
    }
    if (op.name == "aspect_ratio") {
        const int nw = std::max(16, static_cast<int>(img.width * param("factor") + 0.5));
        return resize(img, nw, img.height);
    }
    if (op.name == "pad") {
        const double frac = param("frac");
        const int bx = std::max(1, static_cast<int>(frac * img.width));
        const int by = std::max(1, static_cast<int>(frac * img.height));
        ImageRecord out = make_image(img.id, img.width + 2 * bx, img.height + 2 * by, img.format);
        const std::uint8_t fill[3] = {clamp_u8(param("r")), clamp_u8(param("g")), clamp_u8(param("b"))};
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
                std::uint8_t* d = out.at(x, y);
                if (x >= bx && x < bx + img.width && y >= by && y < by + img.height)
                    std::copy_n(img.at(x - bx, y - by), 3, d);
                else
                    std::copy_n(fill, 3, d);
            }
        return out;
    }
    if (op.name == "scale") {
        const double f = param("factor");
        const int nw = std::max(16, static_cast<int>(img.width * f + 0.5));
        const int nh = std::max(16, static_cast<int>(img.height * f + 0.5));
        return resize(img, nw, nh);
    }
    if (op.name == "hflip") {
        ImageRecord out = img;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                std::copy_n(img.at(img.width - 1 - x, y), 3, out.at(x, y));
        return out;
    }
    if (op.name == "vflip") {
        ImageRecord out = img;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                std::copy_n(img.at(x, img.height - 1 - y), 3, out.at(x, y));
        return out;
    }
    if (op.name == "rotate") {
        const double rad = param("degrees") * 3.14159265358979323846 / 180.0;
        const double cs = std::cos(rad), sn = std::sin(rad);
        const double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
        ImageRecord out = img;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const double dx = x - cx, dy = y - cy;
                const double sx = cs * dx + sn * dy + cx;
                const double sy = -sn * dx + cs * dy + cy;
                double rgb[3];
                sample_bilinear(img, sx, sy, rgb);
                std::uint8_t* d = out.at(x, y);
                for (int c = 0; c < 3; ++c) d[c] = clamp_u8(rgb[c]);
            }
        return out;
    }
    if (op.name == "pixelize") {
        const int block = std::max(2, static_cast<int>(param("block")));
        ImageRecord out = img;
        for (int by = 0; by < img.height; by += block)
            for (int bx = 0; bx < img.width; bx += block) {
                const int ymax = std::min(by + block, img.height);
                const int xmax = std::min(bx + block, img.width);
                double acc[3] = {};
                int count = 0;
                for (int y = by; y < ymax; ++y)
                    for (int x = bx; x < xmax; ++x) {
                        const std::uint8_t* s = img.at(x, y);
                        for (int c = 0; c < 3; ++c) acc[c] += s[c];
                        ++count;
                    }
                std::uint8_t fill[3];
                for (int c = 0; c < 3; ++c) fill[c] = clamp_u8(acc[c] / count);
                for (int y = by; y < ymax; ++y)
                    for (int x = bx; x < xmax; ++x) std::copy_n(fill, 3, out.at(x, y));
            }
        return out;
    }
    if (op.name == "quality_encode") {
        return jpeg_roundtrip(img, static_cast<int>(param("quality")));
    }
    if (op.name == "gaussian_noise") {
        const double sigma = param("sigma");
        ImageRecord out = img;
        std::uint8_t* d = out.pixels.data();
        for (std::size_t i = 0; i < out.pixels.size(); ++i)
            d[i] = clamp_u8(d[i] + rng.normal(0.0, sigma));
        return out;
    }
    if (op.name == "sharpen") {
        const double amount = param("amount");
        ImageRecord out = img;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                double blur[3] = {};
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const std::uint8_t* s = img.at(std::clamp(x + dx, 0, img.width - 1),
                                                       std::clamp(y + dy, 0, img.height - 1));
                        for (int c = 0; c < 3; ++c) blur[c] += s[c];
                    }
                const std::uint8_t* s = img.at(x, y);
                std::uint8_t* d = out.at(x, y);
                for (int c = 0; c < 3; ++c) d[c] = clamp_u8(s[c] + amount * (s[c] - blur[c] / 9.0));
            }
        return out;
    }
    if (op.name == "opacity") {
        const double alpha = param("alpha");
        return map_pixels(img, [&](const std::uint8_t* s, std::uint8_t* d) {
            for (int c = 0; c < 3; ++c) d[c] = clamp_u8(alpha * s[c] + (1 - alpha) * 128.0);
        });
    }
    if (op.name == "shuffle") {
        return op_shuffle(img, static_cast<int>(param("grid")), rng);
    }
    if (op.name == "crop") {
        const double side = std::sqrt(param("area"));
        const int cw = std::max(32, static_cast<int>(side * img.width));
        const int ch = std::max(32, static_cast<int>(side * img.height));
        const int x0 = static_cast<int>(param("cx") * (img.width - cw));
        const int y0 = static_cast<int>(param("cy") * (img.height - ch));
        ImageRecord out = make_image(img.id, cw, ch, img.format);
        for (int y = 0; y < ch; ++y)
            for (int x = 0; x < cw; ++x) std::copy_n(img.at(x0 + x, y0 + y), 3, out.at(x, y));
        return out;
    }
    if (op.name == "tamper_splice") {
        Rng donor_rng = rng.fork(0x51CEULL);
        const ImageRecord donor = make_seed_image(std::max(64, img.width / 2),
                                                  std::max(64, img.height / 2), donor_rng);
        return apply_splice(img, donor, param("area"), param("x"), param("y"));
    }
    if (op.name == "meme_text") {
        return op_meme_text(img, param("height_frac"), rng);
    }
    if (op.name == "unrelated") {
        // distractor marker: replaces content entirely
        return make_seed_image(img.width, img.height, rng, img.id);
    }
    raise(Errc::UnknownOp, "'" + op.name + "'");
}

// --- graph generation -----------------------------------------------------------

namespace {

std::vector<std::string> default_op_pool() {
    std::vector<std::string> pool;
    for (const auto& e : op_catalog())
        if (e.name != "unrelated") pool.push_back(e.name);
    return pool;
}

std::string node_filename(const std::string& graph_id, std::size_t i) {
    std::ostringstream s;
    s << graph_id << "_n" << (i < 10 ? "0" : "") << i << ".jpg";
    return s.str();
}

} // namespace

GeneratedGraph generate_graph(const ImageRecord& seed, const GenSpec& spec, Rng& rng,
                              std::uint64_t first_id, const std::string& graph_id) {
    if (seed.width < 128 || seed.height < 128)
        raise(Errc::TooSmall, "seed image must be at least 128x128");
    const std::vector<std::string> pool = spec.op_pool.empty() ? default_op_pool() : spec.op_pool;

    const int n = static_cast<int>(rng.uniform_int(spec.nodes_min, spec.nodes_max));

    // tree shape: per-node child quotas, filled in BFS order
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    {
        std::vector<int> quota(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            quota[i] = static_cast<int>(rng.uniform_int(spec.branching_min, spec.branching_max));
        std::size_t open = 0; // earliest node with remaining quota
        for (int i = 1; i < n; ++i) {
            while (open < static_cast<std::size_t>(i) && quota[open] == 0) ++open;
            if (open >= static_cast<std::size_t>(i)) open = static_cast<std::size_t>(i) - 1;
            parent[i] = static_cast<int>(open);
            --quota[open];
        }
    }

    // optional splice edge: donor d < c, d not already c's parent nor an ancestor
    int splice_child = -1, splice_donor = -1;
    if (n >= 3 && rng.chance(spec.splice_probability)) {
        const int c = static_cast<int>(rng.uniform_int(2, n - 1));
        std::vector<bool> ancestor(static_cast<std::size_t>(n), false);
        for (int a = parent[c]; a >= 0; a = parent[a]) ancestor[a] = true;
        std::vector<int> eligible;
        for (int d = 0; d < c; ++d)
            if (!ancestor[d]) eligible.push_back(d);
        if (!eligible.empty()) {
            splice_child = c;
            splice_donor = eligible[rng.uniform_int(0, static_cast<std::int64_t>(eligible.size()) - 1)];
        }
    }

    GeneratedGraph out;
    out.journal.graph_id = graph_id;
    out.images.resize(static_cast<std::size_t>(n));
    out.files.resize(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        const ImageId id{first_id + static_cast<std::uint64_t>(i)};
        ImageRecord raw;
        std::vector<ModificationOp> ops;
        if (i == 0) {
            raw = seed;
        } else {
            raw = out.images[static_cast<std::size_t>(parent[i])];
            const int op_count = static_cast<int>(rng.uniform_int(spec.ops_per_edge_min, spec.ops_per_edge_max));
            for (int o = 0; o < op_count; ++o) {
                const ModificationOp op = draw_op(rng.pick(pool), rng);
                raw = apply_modification(raw, op, rng);
                ops.push_back(op);
            }
        }
        std::vector<ModificationOp> splice_ops;
        if (i == splice_child) {
            ModificationOp sp = draw_op("tamper_splice", rng);
            raw = apply_splice(raw, out.images[static_cast<std::size_t>(splice_donor)],
                               sp.params.at("area"), sp.params.at("x"), sp.params.at("y"));
            splice_ops.push_back(sp);
        }

        const int quality = spec.quality_pool[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(spec.quality_pool.size()) - 1))];
        raw.id = id;
        std::vector<std::uint8_t> bytes = encode_jpeg(raw, quality);
        ImageRecord record = decode_image(bytes, id);
        record.source_path = node_filename(graph_id, static_cast<std::size_t>(i));

        out.journal.graph.add_node(id);
        out.journal.node_files[id] = record.source_path;
        out.journal.save_quality[id] = quality;
        if (i > 0) {
            const MREdge e{ImageId{first_id + static_cast<std::uint64_t>(parent[i])}, id};
            out.journal.graph.add_edge(e);
            out.journal.edge_ops[e] = ops;
        }
        if (i == splice_child) {
            const MREdge e{ImageId{first_id + static_cast<std::uint64_t>(splice_donor)}, id};
            out.journal.graph.add_edge(e);
            out.journal.edge_ops[e] = splice_ops;
        }

        out.images[static_cast<std::size_t>(i)] = std::move(record);
        out.files[static_cast<std::size_t>(i)] = std::move(bytes);
    }

    out.journal.check();
    return out;
}

// --- dataset emission -------------------------------------------------------------

void manifest_write(const Manifest& m, const std::string& path) {
    nlohmann::json root;
    nlohmann::json images = nlohmann::json::array();
    for (const auto& e : m.images)
        images.push_back({{"id", e.id.value}, {"file", e.file}, {"graph", e.graph_id}});
    root["images"] = std::move(images);
    root["journals"] = m.journals;
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::Io, "cannot open for writing: " + path);
    out << root.dump(2) << "\n";
}

Manifest manifest_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::Io, "cannot open: " + path);
    nlohmann::json root;
    try {
        in >> root;
        Manifest m;
        for (const auto& e : root.at("images"))
            m.images.push_back({ImageId{e.at("id").get<std::uint64_t>()},
                                e.at("file").get<std::string>(), e.at("graph").get<std::string>()});
        for (const auto& j : root.at("journals")) m.journals.push_back(j.get<std::string>());
        return m;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::ParseError, std::string("manifest: ") + e.what());
    }
}

DatasetPaths generate_dataset(const GenSpec& spec, const std::string& out_dir) {
    fs::create_directories(out_dir);
    Manifest manifest;
    std::uint64_t next_id = 0;
    Rng master(spec.master_seed);

    for (int g = 0; g < spec.n_graphs; ++g) {
        Rng graph_rng = master.fork(static_cast<std::uint64_t>(g));
        std::ostringstream gid;
        gid << "g" << (g < 100 ? "0" : "") << (g < 10 ? "0" : "") << g;
        const ImageRecord seed = make_seed_image(spec.seed_width, spec.seed_height, graph_rng);
        GeneratedGraph gg = generate_graph(seed, spec, graph_rng, next_id, gid.str());

        for (std::size_t i = 0; i < gg.images.size(); ++i) {
            const std::string& file = gg.journal.node_files.at(gg.images[i].id);
            save_image_bytes(gg.files[i], (fs::path(out_dir) / file).string());
            manifest.images.push_back({gg.images[i].id, file, gid.str()});
        }
        const std::string journal_file = gid.str() + ".journal.json";
        journal_write(gg.journal, (fs::path(out_dir) / journal_file).string());
        manifest.journals.push_back(journal_file);
        next_id += gg.images.size();
    }

    for (int d = 0; d < spec.distractor_count; ++d) {
        Rng rng = master.fork(0x00d15000ULL + static_cast<std::uint64_t>(d));
        const ImageRecord seed = make_seed_image(spec.seed_width, spec.seed_height, rng, ImageId{next_id});
        const int quality = spec.quality_pool[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(spec.quality_pool.size()) - 1))];
        std::ostringstream name;
        name << "d" << (d < 1000 ? "0" : "") << (d < 100 ? "0" : "") << (d < 10 ? "0" : "") << d
             << ".jpg";
        save_image_bytes(encode_jpeg(seed, quality), (fs::path(out_dir) / name.str()).string());
        manifest.images.push_back({ImageId{next_id}, name.str(), ""});
        ++next_id;
    }

    const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    manifest_write(manifest, manifest_path);
    return {out_dir, manifest_path};
}

GenSpec genspec_from_file(const std::string& path) {
    const KeyValues kv = KeyValues::parse_file(path);
    GenSpec spec;
    spec.n_graphs = static_cast<int>(kv.get_int("n_graphs", spec.n_graphs));
    spec.nodes_min = static_cast<int>(kv.get_int("nodes_min", spec.nodes_min));
    spec.nodes_max = static_cast<int>(kv.get_int("nodes_max", spec.nodes_max));
    spec.branching_min = static_cast<int>(kv.get_int("branching_min", spec.branching_min));
    spec.branching_max = static_cast<int>(kv.get_int("branching_max", spec.branching_max));
    spec.distractor_count = static_cast<int>(kv.get_int("distractor_count", spec.distractor_count));
    spec.master_seed = static_cast<std::uint64_t>(kv.get_int("master_seed", static_cast<long long>(spec.master_seed)));
    spec.seed_width = static_cast<int>(kv.get_int("seed_width", spec.seed_width));
    spec.seed_height = static_cast<int>(kv.get_int("seed_height", spec.seed_height));
    spec.splice_probability = kv.get_double("splice_probability", spec.splice_probability);
    spec.ops_per_edge_min = static_cast<int>(kv.get_int("ops_per_edge_min", spec.ops_per_edge_min));
    spec.ops_per_edge_max = static_cast<int>(kv.get_int("ops_per_edge_max", spec.ops_per_edge_max));
    if (kv.has("op_pool")) spec.op_pool = kv.get_string_list("op_pool");
    if (kv.has("quality_pool")) {
        spec.quality_pool.clear();
        for (long long q : kv.get_int_list("quality_pool")) spec.quality_pool.push_back(static_cast<int>(q));
    }
    for (const std::string& name : spec.op_pool)
        if (!op_catalog_find(name)) raise(Errc::UnknownOp, "op_pool entry '" + name + "'");
    return spec;
}

} // namespace iprov
