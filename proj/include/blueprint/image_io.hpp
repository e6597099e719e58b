#pragma once

#include <string>

#include "blueprint/raster.hpp"

namespace bp {

/// Decodes PNG, JPEG or PGM (P5) by file magic. Alpha is composited onto
/// white; 16-bit samples are rescaled to 8-bit; palette images expand to RGB.
RasterImage load_image(const std::string& path);

/// Encodes by extension: .png or .pgm (.pgm requires a 1-channel image).
void save_image(const RasterImage& img, const std::string& path);
void save_image(const BinaryImage& img, const std::string& path);

/// PNG bytes in memory (gray or RGB), for the recognizer subprocess protocol.
std::vector<std::uint8_t> encode_png(const RasterImage& img);

}  // namespace bp
