#include "core/data.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace addunet {

namespace {

constexpr std::uint64_t kNoiseTag = 0x6e6f697365ULL;  // "noise"
constexpr std::uint64_t kPatchTag = 0x7061746368ULL;  // "patch"
constexpr std::uint64_t kSynthTag = 0x73796e7468ULL;  // "synth"

void check_synth_dims(int h, int w) {
    if (h < 16 || w < 16) throw UsageError("synth_image: dimensions must be >= 16");
}

} // namespace

SynthKind synth_kind_from_name(const std::string& s) {
    if (s == "gradient") return SynthKind::Gradient;
    if (s == "checkers") return SynthKind::Checkers;
    if (s == "gaussian_blobs") return SynthKind::GaussianBlobs;
    if (s == "stripes") return SynthKind::Stripes;
    throw UsageError("unknown synth kind '" + s + "'");
}

std::string synth_kind_name(SynthKind k) {
    switch (k) {
        case SynthKind::Gradient: return "gradient";
        case SynthKind::Checkers: return "checkers";
        case SynthKind::GaussianBlobs: return "gaussian_blobs";
        case SynthKind::Stripes: return "stripes";
    }
    throw UsageError("synth_kind_name: bad enum");
}

GrayImage synth_gradient(int h, int w) {
    GrayImage img(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            img.at(r, c) = (static_cast<double>(r) / (h - 1) + static_cast<double>(c) / (w - 1)) / 2.0;
    return img;
}

GrayImage synth_checkers(int h, int w, int period, double lo, double hi, int phase_r, int phase_c) {
    if (period < 1) throw UsageError("synth_checkers: period must be >= 1");
    GrayImage img(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const int cell = ((r + phase_r) / period + (c + phase_c) / period) % 2;
            img.at(r, c) = cell ? hi : lo;
        }
    return img;
}

GrayImage synth_blobs(int h, int w, std::uint64_t seed, int count) {
    GrayImage img(h, w, 0.0);
    Rng rng(mix_seed({seed, kSynthTag, 2}));
    for (int b = 0; b < count; ++b) {
        const double cy = rng.uniform(0.0, h - 1.0);
        const double cx = rng.uniform(0.0, w - 1.0);
        const double s = rng.uniform(std::min(h, w) / 20.0, std::min(h, w) / 5.0);
        const double amp = rng.uniform(-1.0, 1.0);
        const double inv = 1.0 / (2.0 * s * s);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                const double d2 = (r - cy) * (r - cy) + (c - cx) * (c - cx);
                img.at(r, c) += amp * std::exp(-d2 * inv);
            }
    }
    // rescale into [0.1, 0.9] so noise stays approximately Gaussian at the edges
    const auto [mn, mx] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    const double span = *mx - *mn;
    if (span > 1e-12) {
        for (double& v : img.pixels) v = 0.1 + 0.8 * (v - *mn) / span;
    } else {
        std::fill(img.pixels.begin(), img.pixels.end(), 0.5);
    }
    return img;
}

GrayImage synth_stripes(int h, int w, double freq_cpp, double angle_rad, double phase) {
    GrayImage img(h, w);
    const double kx = std::cos(angle_rad), ky = std::sin(angle_rad);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double t = 2.0 * M_PI * freq_cpp * (c * kx + r * ky) + phase;
            img.at(r, c) = 0.5 + 0.35 * std::sin(t);
        }
    return img;
}

GrayImage synth_image(SynthKind kind, int h, int w, std::uint64_t seed) {
    check_synth_dims(h, w);
    Rng rng(mix_seed({seed, kSynthTag, static_cast<std::uint64_t>(kind)}));
    switch (kind) {
        case SynthKind::Gradient:
            return synth_gradient(h, w);
        case SynthKind::Checkers: {
            const double lo = rng.uniform(0.05, 0.35);
            const double hi = rng.uniform(0.65, 0.95);
            const int phase_r = static_cast<int>(rng.below(8));
            const int phase_c = static_cast<int>(rng.below(8));
            return synth_checkers(h, w, 8, lo, hi, phase_r, phase_c);
        }
        case SynthKind::GaussianBlobs:
            return synth_blobs(h, w, seed, 5 + static_cast<int>(rng.below(8)));
        case SynthKind::Stripes: {
            const double f = rng.uniform(1.0 / 16.0, 0.35);
            const double ang = rng.uniform(0.0, M_PI);
            const double ph = rng.uniform(0.0, 2.0 * M_PI);
            return synth_stripes(h, w, f, ang, ph);
        }
    }
    throw UsageError("synth_image: bad kind");
}

std::vector<GrayImage> synth_dataset(int count, int h, int w, std::uint64_t seed) {
    static constexpr SynthKind kinds[] = {SynthKind::Gradient, SynthKind::Checkers,
                                          SynthKind::GaussianBlobs, SynthKind::Stripes};
    std::vector<GrayImage> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.push_back(synth_image(kinds[i % 4], h, w, mix_seed({seed, kSynthTag, static_cast<std::uint64_t>(i)})));
    return out;
}

std::vector<GrayImage> extract_patches(const GrayImage& img, int size, int count,
                                       std::uint64_t seed) {
    if (size < 1) throw UsageError("extract_patches: size must be >= 1");
    if (size > img.height || size > img.width)
        throw UsageError("extract_patches: patch size " + std::to_string(size) +
                         " exceeds image " + std::to_string(img.height) + "x" +
                         std::to_string(img.width));
    Rng rng(mix_seed({seed, kPatchTag}));
    std::vector<GrayImage> out;
    out.reserve(static_cast<std::size_t>(count));
    const std::uint64_t rmax = static_cast<std::uint64_t>(img.height - size + 1);
    const std::uint64_t cmax = static_cast<std::uint64_t>(img.width - size + 1);
    for (int p = 0; p < count; ++p) {
        const int r0 = static_cast<int>(rng.below(rmax));
        const int c0 = static_cast<int>(rng.below(cmax));
        GrayImage patch(size, size);
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c) patch.at(r, c) = img.at(r0 + r, c0 + c);
        out.push_back(std::move(patch));
    }
    return out;
}

std::vector<GrayImage> extract_patches(const std::vector<GrayImage>& images, int size,
                                       int count, std::uint64_t seed) {
    if (images.empty()) throw UsageError("extract_patches: empty image list");
    for (const GrayImage& img : images)
        if (size > img.height || size > img.width)
            throw UsageError("extract_patches: patch size exceeds an image in the set");
    Rng rng(mix_seed({seed, kPatchTag}));
    std::vector<GrayImage> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int p = 0; p < count; ++p) {
        const GrayImage& img = images[rng.below(images.size())];
        const int r0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height - size + 1)));
        const int c0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width - size + 1)));
        GrayImage patch(size, size);
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c) patch.at(r, c) = img.at(r0 + r, c0 + c);
        out.push_back(std::move(patch));
    }
    return out;
}

Tensor image_to_tensor(const GrayImage& img) {
    return Tensor::from_data({1, 1, img.height, img.width}, img.pixels);
}

Tensor stack_batch(const std::vector<const GrayImage*>& imgs) {
    if (imgs.empty()) throw UsageError("stack_batch: empty batch");
    const int h = imgs[0]->height, w = imgs[0]->width;
    std::vector<double> buf;
    buf.reserve(imgs.size() * imgs[0]->size());
    for (const GrayImage* img : imgs) {
        if (img->height != h || img->width != w)
            throw UsageError("stack_batch: mixed patch sizes");
        buf.insert(buf.end(), img->pixels.begin(), img->pixels.end());
    }
    return Tensor::from_data({static_cast<std::int64_t>(imgs.size()), 1, h, w}, std::move(buf));
}

GrayImage tensor_to_image(const Tensor& t, int batch_index, bool clip) {
    if (t.ndim() != 4 || t.dim(1) != 1)
        throw UsageError("tensor_to_image: expected [B,1,H,W]");
    if (batch_index < 0 || batch_index >= t.dim(0))
        throw UsageError("tensor_to_image: batch index out of range");
    const int h = static_cast<int>(t.dim(2)), w = static_cast<int>(t.dim(3));
    GrayImage img(h, w);
    const double* src = t.data().data() + static_cast<std::size_t>(batch_index) * h * w;
    for (std::size_t i = 0; i < img.size(); ++i)
        img.pixels[i] = clip ? std::clamp(src[i], 0.0, 1.0) : src[i];
    return img;
}

Tensor add_awgn(const Tensor& clean, double sigma_255, std::uint64_t seed) {
    if (!(sigma_255 > 0.0)) throw UsageError("add_awgn: sigma must be > 0");
    const double sigma01 = sigma_255 / 255.0;
    Tensor noisy = Tensor::from_data(clean.shape(), clean.data());
    Rng rng(mix_seed({seed, kNoiseTag}));
    for (double& v : noisy.data()) v += sigma01 * rng.gaussian();
    return noisy;
}

PatchBatch corrupt(const Tensor& clean, double sigma_255, std::uint64_t seed) {
    PatchBatch b;
    b.clean = clean;
    b.noisy = add_awgn(clean, sigma_255, seed);
    b.sigma_255 = sigma_255;
    b.seed = seed;
    return b;
}

std::vector<PatchBatch> corrupt_k(const Tensor& clean, double sigma_255, int realizations_k,
                                  std::uint64_t seed) {
    if (realizations_k < 1) throw UsageError("corrupt_k: K must be >= 1");
    std::vector<PatchBatch> out;
    out.reserve(static_cast<std::size_t>(realizations_k));
    for (int k = 0; k < realizations_k; ++k)
        out.push_back(corrupt(clean, sigma_255, mix_seed({seed, static_cast<std::uint64_t>(k)})));
    return out;
}

GrayImage corrupt_image(const GrayImage& clean, double sigma_255, std::uint64_t seed) {
    if (!(sigma_255 > 0.0)) throw UsageError("corrupt_image: sigma must be > 0");
    const double sigma01 = sigma_255 / 255.0;
    GrayImage noisy = clean;
    Rng rng(mix_seed({seed, kNoiseTag}));
    for (double& v : noisy.pixels) v += sigma01 * rng.gaussian();
    return noisy;
}

} // namespace addunet
