#pragma once

#include <string>
#include <vector>

#include "core/image.hpp"

namespace addunet {

// 10*log10(1/MSE) on the [0,1] range (MAX=1); +inf when MSE == 0.
double psnr(const GrayImage& ref, const GrayImage& test);

// Mean local SSIM, 11x11 Gaussian window sigma=1.5, C1=0.01^2, C2=0.03^2,
// dynamic range 1, windows fully inside the image (valid-region).
double ssim(const GrayImage& ref, const GrayImage& test);

// "inf" for +inf, fixed decimals otherwise; keeps CSVs byte-stable.
std::string format_psnr(double v);
std::string format_ssim(double v);

struct MetricsRow {
    std::string model_id;
    double sigma = 0.0;
    std::string image_id;
    double psnr_db = 0.0;
    double ssim = 0.0;
};

struct AggregateRow {
    std::string model_id;
    double sigma = 0.0;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    int image_count = 0;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;

    void add(MetricsRow row) { rows.push_back(std::move(row)); }

    // Arithmetic means per (model_id, sigma), first-appearance order.
    std::vector<AggregateRow> aggregates() const;

    std::string per_image_csv() const;  // model_id,sigma,image_id,psnr_db,ssim
    std::string aggregate_csv() const;  // model_id,sigma,mean_psnr,mean_ssim,images
};

std::string format_sigma(double sigma); // 25 -> "25", 12.5 -> "12.5"
std::string csv_field(const std::string& s); // RFC-4180 quoting when needed

} // namespace addunet
