#include "core/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>

#include "core/errors.hpp"

namespace addunet {

namespace {

constexpr double kLumaR = 0.299, kLumaG = 0.587, kLumaB = 0.114;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

int pgm_next_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') { // comment to end of line
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) break;
    }
    if (c == EOF) return -1;
    do {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    } while (c != EOF && !std::isspace(c));
    return 0;
}

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string tok;
    if (pgm_next_token(in, tok) < 0 || tok != "P5")
        throw DataError("'" + path + "' is not a binary PGM (P5) file");
    long w = 0, h = 0, maxval = 0;
    auto next_int = [&](long& out, const char* what) {
        if (pgm_next_token(in, tok) < 0) throw DataError("'" + path + "': truncated PGM header");
        try {
            out = std::stol(tok);
        } catch (...) {
            throw DataError("'" + path + "': bad PGM " + what + " '" + tok + "'");
        }
    };
    next_int(w, "width");
    next_int(h, "height");
    next_int(maxval, "maxval");
    if (w <= 0 || h <= 0) throw DataError("'" + path + "': bad PGM dimensions");
    if (maxval <= 0 || maxval > 65535) throw DataError("'" + path + "': bad PGM maxval");
    // header ends with exactly one whitespace byte (already consumed by tokenizer)

    GrayImage img(static_cast<int>(h), static_cast<int>(w));
    const std::size_t n = img.size();
    const double scale = 1.0 / static_cast<double>(maxval);
    if (maxval < 256) {
        std::vector<unsigned char> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw DataError("'" + path + "': truncated PGM pixel data");
        for (std::size_t i = 0; i < n; ++i) img.pixels[i] = buf[i] * scale;
    } else {
        std::vector<unsigned char> buf(n * 2);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 2));
        if (static_cast<std::size_t>(in.gcount()) != n * 2)
            throw DataError("'" + path + "': truncated PGM pixel data");
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned v = (static_cast<unsigned>(buf[2 * i]) << 8) | buf[2 * i + 1]; // big-endian
            img.pixels[i] = v * scale;
        }
    }
    return img;
}

GrayImage load_png_file(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw DataError("cannot open '" + path + "'");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng: failed to allocate read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("libpng: failed to allocate info struct");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<unsigned char> storage;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("'" + path + "': corrupt or truncated PNG");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    int bit_depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    bit_depth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    storage.resize(rowbytes * h);
    row_ptrs.resize(h);
    for (png_uint_32 r = 0; r < h; ++r) row_ptrs[r] = storage.data() + r * rowbytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    GrayImage img(static_cast<int>(h), static_cast<int>(w));
    const double scale = bit_depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
    for (png_uint_32 r = 0; r < h; ++r) {
        const unsigned char* row = storage.data() + r * rowbytes;
        for (png_uint_32 c = 0; c < w; ++c) {
            double sample[4] = {0, 0, 0, 0};
            for (int ch = 0; ch < channels; ++ch) {
                if (bit_depth == 16) {
                    const unsigned char* p = row + (c * channels + ch) * 2;
                    sample[ch] = ((static_cast<unsigned>(p[0]) << 8) | p[1]) * scale; // PNG is big-endian
                } else {
                    sample[ch] = row[c * channels + ch] * scale;
                }
            }
            double v;
            if (channels >= 3)
                v = kLumaR * sample[0] + kLumaG * sample[1] + kLumaB * sample[2];
            else
                v = sample[0];
            img.at(static_cast<int>(r), static_cast<int>(c)) = std::clamp(v, 0.0, 1.0);
        }
    }
    return img;
}

unsigned char quantize8(double v) {
    const double q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
    return static_cast<unsigned char>(q);
}

} // namespace

GrayImage load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw DataError("cannot open '" + path + "'");
    unsigned char magic[8] = {0};
    probe.read(reinterpret_cast<char*>(magic), 8);
    probe.close();
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (std::memcmp(magic, png_sig, 8) == 0) return load_png_file(path);
    if (magic[0] == 'P' && magic[1] == '5') return load_pgm(path);
    throw DataError("'" + path + "': unsupported image format (expected PNG or binary PGM)");
}

void save_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> buf(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) buf[i] = quantize8(img.pixels[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("write failed for '" + path + "'");
}

void save_png(const std::string& path, const GrayImage& img) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw DataError("cannot write '" + path + "'");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng: failed to allocate write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("libpng: failed to allocate info struct");
    }
    std::vector<unsigned char> buf(img.size());
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng: write failed for '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
                 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    for (std::size_t i = 0; i < img.size(); ++i) buf[i] = quantize8(img.pixels[i]);
    for (int r = 0; r < img.height; ++r)
        rows[static_cast<std::size_t>(r)] = buf.data() + static_cast<std::size_t>(r) * img.width;
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
}

void save_image(const std::string& path, const GrayImage& img) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png")
        save_png(path, img);
    else if (ext == ".pgm")
        save_pgm(path, img);
    else
        throw UsageError("save_image: unsupported extension '" + ext + "' (use .png or .pgm)");
}

std::vector<std::string> list_image_files(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("'" + dir + "' is not a directory");
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png" || ext == ".pgm") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string image_id_from_path(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

} // namespace addunet
