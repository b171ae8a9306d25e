#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iprov/core.hpp"

namespace iprov {

// Container encode/decode (JPEG/PNG) sits on OpenCV's imgcodecs; everything
// downstream works on the decoded RGB raster only.

std::vector<std::uint8_t> encode_jpeg(const ImageRecord& img, int quality);
std::vector<std::uint8_t> encode_png(const ImageRecord& img);

/// Decodes JPEG or PNG bytes; format tag set from the container magic.
ImageRecord decode_image(const std::vector<std::uint8_t>& bytes, ImageId id = ImageId{0});

ImageRecord load_image(const std::string& path, ImageId id = ImageId{0});
void save_image_bytes(const std::vector<std::uint8_t>& bytes, const std::string& path);

/// Round-trips the image through a JPEG encode at the given quality.
ImageRecord jpeg_roundtrip(const ImageRecord& img, int quality);

} // namespace iprov
