#pragma once

// 8-bit RGB PNG files via libpng's simplified API. Alpha and grayscale
// inputs are converted to RGB by libpng on read.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "stegainr/errors.hpp"
#include "stegainr/image.hpp"

namespace stegainr {

inline ImageBuffer read_image(const std::filesystem::path& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str()))
        throw IoError("cannot decode '" + path.string() + "': " + png.message);
    png.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, raw.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw IoError("cannot decode '" + path.string() + "': " + msg);
    }
    ImageBuffer img(png.height, png.width);
    for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i] / 255.0;
    return img;
}

inline void write_image(const std::filesystem::path& path, const ImageBuffer& img) {
    if (img.height < 1 || img.width < 1 || img.pixels.size() != img.height * img.width * 3)
        throw ContractError("cannot write an empty or malformed image");
    std::vector<std::uint8_t> raw(img.pixels.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<std::uint8_t>(to_byte(img.pixels[i]));
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, raw.data(), 0, nullptr))
        throw IoError("cannot write '" + path.string() + "': " + png.message);
}

} // namespace stegainr
