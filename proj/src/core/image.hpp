#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace addunet {

// Grayscale image with pixels in [0,1], row-major.
struct GrayImage {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int h, int w, double fill = 0.0)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

    double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
    std::size_t size() const { return pixels.size(); }
};

// Loads PNG or binary PGM (P5), dispatching on the file's magic bytes.
// 8/16-bit samples map to [0,1]; RGB converts via luma 0.299/0.587/0.114.
GrayImage load_image(const std::string& path);

void save_pgm(const std::string& path, const GrayImage& img); // 8-bit binary P5
void save_png(const std::string& path, const GrayImage& img); // 8-bit grayscale

// Picks the writer from the extension (.png / .pgm).
void save_image(const std::string& path, const GrayImage& img);

// Lexicographically sorted *.png / *.pgm paths in a directory.
std::vector<std::string> list_image_files(const std::string& dir);

// Filename without directory or extension; stable per-image report ids.
std::string image_id_from_path(const std::string& path);

} // namespace addunet
