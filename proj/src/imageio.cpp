#include "iprov/imageio.hpp"

#include <cmath>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "iprov/pixels.hpp"

namespace iprov {

namespace {

cv::Mat to_bgr_mat(const ImageRecord& img) {
    cv::Mat bgr(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        const std::uint8_t* src = img.at(0, y);
        std::uint8_t* dst = bgr.ptr(y);
        for (int x = 0; x < img.width; ++x, src += 3, dst += 3) {
            dst[0] = src[2];
            dst[1] = src[1];
            dst[2] = src[0];
        }
    }
    return bgr;
}

ImageRecord from_bgr_mat(const cv::Mat& bgr, ImageId id, ImageFormat format) {
    ImageRecord img = make_image(id, bgr.cols, bgr.rows, format);
    for (int y = 0; y < bgr.rows; ++y) {
        const std::uint8_t* src = bgr.ptr(y);
        std::uint8_t* dst = img.at(0, y);
        for (int x = 0; x < bgr.cols; ++x, src += 3, dst += 3) {
            dst[0] = src[2];
            dst[1] = src[1];
            dst[2] = src[0];
        }
    }
    return img;
}

ImageFormat sniff_format(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF)
        return ImageFormat::Jpeg;
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G')
        return ImageFormat::Png;
    return ImageFormat::Other;
}

} // namespace

std::vector<std::uint8_t> encode_jpeg(const ImageRecord& img, int quality) {
    std::vector<std::uint8_t> out;
    std::vector<int> params = {cv::IMWRITE_JPEG_QUALITY, std::clamp(quality, 1, 100),
                               cv::IMWRITE_JPEG_OPTIMIZE, 0};
    if (!cv::imencode(".jpg", to_bgr_mat(img), out, params))
        raise(Errc::Io, "JPEG encode failed");
    return out;
}

std::vector<std::uint8_t> encode_png(const ImageRecord& img) {
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", to_bgr_mat(img), out)) raise(Errc::Io, "PNG encode failed");
    return out;
}

ImageRecord decode_image(const std::vector<std::uint8_t>& bytes, ImageId id) {
    const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1,
                      const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat bgr = cv::imdecode(raw, cv::IMREAD_COLOR);
    if (bgr.empty()) raise(Errc::ParseError, "undecodable image bytes");
    return from_bgr_mat(bgr, id, sniff_format(bytes));
}

ImageRecord load_image(const std::string& path, ImageId id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::Io, "cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    ImageRecord img = decode_image(bytes, id);
    img.source_path = path;
    return img;
}

void save_image_bytes(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::Io, "cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(Errc::Io, "write failed: " + path);
}

ImageRecord jpeg_roundtrip(const ImageRecord& img, int quality) {
    ImageRecord out = decode_image(encode_jpeg(img, quality), img.id);
    out.source_path = img.source_path;
    return out;
}

std::vector<float> luminance(const ImageRecord& img) {
    std::vector<float> y(img.pixel_count());
    const std::uint8_t* p = img.pixels.data();
    for (std::size_t i = 0; i < y.size(); ++i, p += 3) y[i] = luma_bt601(p[0], p[1], p[2]);
    return y;
}

void sample_bilinear(const ImageRecord& img, double x, double y, double out_rgb[3]) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    const auto cx = [&](int v) { return std::clamp(v, 0, img.width - 1); };
    const auto cy = [&](int v) { return std::clamp(v, 0, img.height - 1); };
    const std::uint8_t* p00 = img.at(cx(x0), cy(y0));
    const std::uint8_t* p10 = img.at(cx(x0 + 1), cy(y0));
    const std::uint8_t* p01 = img.at(cx(x0), cy(y0 + 1));
    const std::uint8_t* p11 = img.at(cx(x0 + 1), cy(y0 + 1));
    for (int c = 0; c < 3; ++c) {
        const double top = p00[c] * (1 - fx) + p10[c] * fx;
        const double bot = p01[c] * (1 - fx) + p11[c] * fx;
        out_rgb[c] = top * (1 - fy) + bot * fy;
    }
}

ImageRecord resize(const ImageRecord& img, int new_width, int new_height) {
    ImageRecord out = make_image(img.id, new_width, new_height, img.format);
    const double sx = static_cast<double>(img.width) / new_width;
    const double sy = static_cast<double>(img.height) / new_height;
    for (int y = 0; y < new_height; ++y) {
        const int y0 = static_cast<int>(y * sy);
        const int y1 = std::max(y0 + 1, std::min(static_cast<int>((y + 1) * sy + 0.9999), img.height));
        for (int x = 0; x < new_width; ++x) {
            const int x0 = static_cast<int>(x * sx);
            const int x1 = std::max(x0 + 1, std::min(static_cast<int>((x + 1) * sx + 0.9999), img.width));
            double acc[3] = {0, 0, 0};
            int count = 0;
            for (int yy = y0; yy < y1; ++yy)
                for (int xx = x0; xx < x1; ++xx) {
                    const std::uint8_t* p = img.at(xx, yy);
                    acc[0] += p[0];
                    acc[1] += p[1];
                    acc[2] += p[2];
                    ++count;
                }
            std::uint8_t* q = out.at(x, y);
            for (int c = 0; c < 3; ++c) q[c] = clamp_u8(acc[c] / count);
        }
    }
    return out;
}

} // namespace iprov
