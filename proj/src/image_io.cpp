#include "blueprint/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>

namespace bp {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        if (mode[0] == 'r' && !std::filesystem::exists(path)) {
            throw Error(ErrorKind::FileNotFound, path);
        }
        throw Error(ErrorKind::IoError, "cannot open " + path);
    }
    return f;
}

// ---- PNG ----

RasterImage load_png(std::FILE* fp, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::IoError, "libpng init failed");
    }
    RasterImage img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::CorruptImage, path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (png_get_bit_depth(png, info) == 16) png_set_scale_16(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int ch = png_get_channels(png, info);

    std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h * ch);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = raw.data() + static_cast<std::size_t>(y) * w * ch;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const bool has_alpha = (ch == 2 || ch == 4);
    const int out_ch = (ch <= 2) ? 1 : 3;
    img = RasterImage::create(w, h, out_ch);
    for (std::size_t p = 0; p < static_cast<std::size_t>(w) * h; ++p) {
        const std::uint8_t* s = raw.data() + p * ch;
        const int a = has_alpha ? s[ch - 1] : 255;
        for (int c = 0; c < out_ch; ++c) {
            // composite onto white
            img.pixels[p * out_ch + c] = static_cast<std::uint8_t>((s[c] * a + 255 * (255 - a) + 127) / 255);
        }
    }
    return img;
}

void write_png_impl(const RasterImage& img, png_structp png, png_infop info) {
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(
                               img.pixels.data() + static_cast<std::size_t>(y) * img.width * img.channels));
    }
    png_write_end(png, nullptr);
}

void save_png(const RasterImage& img, const std::string& path) {
    FilePtr fp = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::IoError, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::IoError, "png write failed: " + path);
    }
    png_init_io(png, fp.get());
    write_png_impl(img, png, info);
    png_destroy_write_struct(&png, &info);
}

void png_mem_write(png_structp png, png_bytep data, png_size_t len) {
    auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    buf->insert(buf->end(), data, data + len);
}

// ---- JPEG ----

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

RasterImage load_jpeg(std::FILE* fp, const std::string& path) {
    jpeg_decompress_struct cinfo{};
    JpegErrorMgr jerr{};
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw Error(ErrorKind::CorruptImage, path);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);

    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    const int ch = cinfo.output_components;
    RasterImage img = RasterImage::create(w, h, ch == 1 ? 1 : 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * ch;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

// ---- PGM (P5) ----

int pgm_read_value(std::FILE* fp) {
    int c = std::fgetc(fp);
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = std::fgetc(fp);
        }
        c = std::fgetc(fp);
    }
    if (c == EOF || !std::isdigit(c)) return -1;
    int v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = std::fgetc(fp);
    }
    return v;
}

RasterImage load_pgm(std::FILE* fp, const std::string& path) {
    std::fseek(fp, 2, SEEK_SET);
    const int w = pgm_read_value(fp);
    const int h = pgm_read_value(fp);
    const int maxval = pgm_read_value(fp);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw Error(ErrorKind::CorruptImage, path);

    RasterImage img = RasterImage::create(w, h, 1);
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (maxval < 256) {
        if (std::fread(img.pixels.data(), 1, n, fp) != n) throw Error(ErrorKind::CorruptImage, path);
        if (maxval != 255) {
            for (auto& v : img.pixels) v = static_cast<std::uint8_t>(v * 255 / maxval);
        }
    } else {
        std::vector<std::uint8_t> raw(n * 2);
        if (std::fread(raw.data(), 1, raw.size(), fp) != raw.size()) {
            throw Error(ErrorKind::CorruptImage, path);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const int v = raw[2 * i] << 8 | raw[2 * i + 1];
            img.pixels[i] = static_cast<std::uint8_t>(v * 255 / maxval);
        }
    }
    return img;
}

void save_pgm(const RasterImage& img, const std::string& path) {
    if (img.channels != 1) throw Error(ErrorKind::UnsupportedFormat, "PGM requires a 1-channel image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path);
}

std::string lower_ext(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

}  // namespace

RasterImage load_image(const std::string& path) {
    FilePtr fp = open_file(path, "rb");
    unsigned char magic[2] = {0, 0};
    if (std::fread(magic, 1, 2, fp.get()) != 2) throw Error(ErrorKind::CorruptImage, path);
    std::rewind(fp.get());
    if (magic[0] == 0x89 && magic[1] == 'P') return load_png(fp.get(), path);
    if (magic[0] == 0xFF && magic[1] == 0xD8) return load_jpeg(fp.get(), path);
    if (magic[0] == 'P' && magic[1] == '5') return load_pgm(fp.get(), path);
    throw Error(ErrorKind::UnsupportedFormat, path);
}

void save_image(const RasterImage& img, const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") {
        save_png(img, path);
    } else if (ext == ".pgm") {
        save_pgm(img, path);
    } else {
        throw Error(ErrorKind::UnsupportedFormat, "cannot encode " + ext);
    }
}

void save_image(const BinaryImage& img, const std::string& path) { save_image(img.to_raster(), path); }

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
    std::vector<std::uint8_t> buf;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::IoError, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::IoError, "png encode failed");
    }
    png_set_write_fn(png, &buf, png_mem_write, nullptr);
    write_png_impl(img, png, info);
    png_destroy_write_struct(&png, &info);
    return buf;
}

}  // namespace bp
