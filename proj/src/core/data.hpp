#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/tensor.hpp"

namespace addunet {

enum class SynthKind { Gradient, Checkers, GaussianBlobs, Stripes };

SynthKind synth_kind_from_name(const std::string&);
std::string synth_kind_name(SynthKind);

// Parametric generators (deterministic; tests target these directly).
GrayImage synth_gradient(int h, int w);
GrayImage synth_checkers(int h, int w, int period, double lo, double hi,
                         int phase_r = 0, int phase_c = 0);
GrayImage synth_blobs(int h, int w, std::uint64_t seed, int count = 8);
GrayImage synth_stripes(int h, int w, double freq_cpp, double angle_rad, double phase);

// Seeded dispatcher: kind-specific parameters are drawn from the seed. Images
// mix low- and high-frequency content; h,w >= 16.
GrayImage synth_image(SynthKind kind, int h, int w, std::uint64_t seed);

// Deterministic dataset cycling through all four kinds.
std::vector<GrayImage> synth_dataset(int count, int h, int w, std::uint64_t seed);

// Uniformly random size x size crops; corners drawn (row, col) per patch from
// the seeded stream. Throws if size exceeds the image.
std::vector<GrayImage> extract_patches(const GrayImage& img, int size, int count,
                                       std::uint64_t seed);

// Multi-image variant: draws (image index, row, col) per patch.
std::vector<GrayImage> extract_patches(const std::vector<GrayImage>& images, int size,
                                       int count, std::uint64_t seed);

// --- tensor bridging ---------------------------------------------------------

Tensor image_to_tensor(const GrayImage& img);                    // [1,1,H,W]
Tensor stack_batch(const std::vector<const GrayImage*>& imgs);   // [B,1,P,P]
GrayImage tensor_to_image(const Tensor& t, int batch_index = 0, bool clip = true);

// --- AWGN corruption ----------------------------------------------------------

// sigma_255 is quoted on the 0-255 scale; noise std in [0,1] units is
// sigma_255/255. The noisy tensor is NOT clipped.
struct PatchBatch {
    Tensor clean;
    Tensor noisy;
    double sigma_255 = 0.0;
    std::uint64_t seed = 0;
};

Tensor add_awgn(const Tensor& clean, double sigma_255, std::uint64_t seed);
PatchBatch corrupt(const Tensor& clean, double sigma_255, std::uint64_t seed);
std::vector<PatchBatch> corrupt_k(const Tensor& clean, double sigma_255, int realizations_k,
                                  std::uint64_t seed);

GrayImage corrupt_image(const GrayImage& clean, double sigma_255, std::uint64_t seed);

} // namespace addunet
