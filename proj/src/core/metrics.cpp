#include "core/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "core/errors.hpp"

namespace addunet {

namespace {

constexpr int kWin = 11;
constexpr double kWinSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

// 11-tap Gaussian, normalized so the 2-D (outer product) window sums to 1.
const std::vector<double>& window_1d() {
    static const std::vector<double> w = [] {
        std::vector<double> v(kWin);
        double sum = 0.0;
        for (int i = 0; i < kWin; ++i) {
            const double d = i - (kWin - 1) / 2.0;
            v[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kWinSigma * kWinSigma));
            sum += v[static_cast<std::size_t>(i)];
        }
        for (double& x : v) x /= sum;
        return v;
    }();
    return w;
}

// Separable valid-region Gaussian filter: out is (h-10) x (w-10).
std::vector<double> gaussian_valid(const std::vector<double>& img, int h, int w) {
    const std::vector<double>& g = window_1d();
    const int oh = h - kWin + 1, ow = w - kWin + 1;
    std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
    for (int r = 0; r < h; ++r) {
        const double* row = img.data() + static_cast<std::size_t>(r) * w;
        double* trow = tmp.data() + static_cast<std::size_t>(r) * ow;
        for (int c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (int i = 0; i < kWin; ++i) acc += g[static_cast<std::size_t>(i)] * row[c + i];
            trow[c] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int r = 0; r < oh; ++r) {
        double* orow = out.data() + static_cast<std::size_t>(r) * ow;
        for (int c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (int i = 0; i < kWin; ++i)
                acc += g[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(r + i) * ow + c];
            orow[c] = acc;
        }
    }
    return out;
}

void check_shapes(const GrayImage& a, const GrayImage& b, const char* op) {
    if (a.height != b.height || a.width != b.width)
        throw UsageError(std::string(op) + ": image shapes differ (" + std::to_string(a.height) +
                         "x" + std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                         std::to_string(b.width) + ")");
}

} // namespace

double psnr(const GrayImage& ref, const GrayImage& test) {
    check_shapes(ref, test, "psnr");
    if (ref.size() == 0) throw UsageError("psnr: empty image");
    double mse = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = ref.pixels[i] - test.pixels[i];
        mse += d * d;
    }
    mse /= static_cast<double>(ref.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const GrayImage& ref, const GrayImage& test) {
    check_shapes(ref, test, "ssim");
    if (ref.height < kWin || ref.width < kWin)
        throw UsageError("ssim: image smaller than the 11x11 window");
    const int h = ref.height, w = ref.width;

    std::vector<double> xy(ref.size()), xx(ref.size()), yy(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        xy[i] = ref.pixels[i] * test.pixels[i];
        xx[i] = ref.pixels[i] * ref.pixels[i];
        yy[i] = test.pixels[i] * test.pixels[i];
    }
    const std::vector<double> mu_x = gaussian_valid(ref.pixels, h, w);
    const std::vector<double> mu_y = gaussian_valid(test.pixels, h, w);
    const std::vector<double> m_xx = gaussian_valid(xx, h, w);
    const std::vector<double> m_yy = gaussian_valid(yy, h, w);
    const std::vector<double> m_xy = gaussian_valid(xy, h, w);

    double acc = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double var_x = m_xx[i] - mu_x[i] * mu_x[i];
        const double var_y = m_yy[i] - mu_y[i] * mu_y[i];
        const double cov = m_xy[i] - mu_x[i] * mu_y[i];
        const double num = (2.0 * mu_x[i] * mu_y[i] + kC1) * (2.0 * cov + kC2);
        const double den = (mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + kC1) * (var_x + var_y + kC2);
        acc += num / den;
    }
    return acc / static_cast<double>(mu_x.size());
}

std::string format_psnr(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string format_ssim(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string format_sigma(double sigma) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", sigma);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<AggregateRow> MetricsReport::aggregates() const {
    std::vector<AggregateRow> out;
    for (const MetricsRow& r : rows) {
        AggregateRow* slot = nullptr;
        for (AggregateRow& a : out)
            if (a.model_id == r.model_id && a.sigma == r.sigma) slot = &a;
        if (!slot) {
            out.push_back({r.model_id, r.sigma, 0.0, 0.0, 0});
            slot = &out.back();
        }
        slot->mean_psnr += r.psnr_db;
        slot->mean_ssim += r.ssim;
        slot->image_count += 1;
    }
    for (AggregateRow& a : out) {
        a.mean_psnr /= a.image_count;
        a.mean_ssim /= a.image_count;
    }
    return out;
}

std::string MetricsReport::per_image_csv() const {
    std::ostringstream os;
    os << "model_id,sigma,image_id,psnr_db,ssim\n";
    for (const MetricsRow& r : rows)
        os << csv_field(r.model_id) << "," << format_sigma(r.sigma) << "," << r.image_id << ","
           << format_psnr(r.psnr_db) << "," << format_ssim(r.ssim) << "\n";
    return os.str();
}

std::string MetricsReport::aggregate_csv() const {
    std::ostringstream os;
    os << "model_id,sigma,mean_psnr,mean_ssim,images\n";
    for (const AggregateRow& a : aggregates())
        os << csv_field(a.model_id) << "," << format_sigma(a.sigma) << "," << format_psnr(a.mean_psnr) << ","
           << format_ssim(a.mean_ssim) << "," << a.image_count << "\n";
    return os.str();
}

} // namespace addunet
