#include "splat/kf/features.hpp"

#include <cmath>
#include <stdexcept>

namespace splat {

namespace {

constexpr int kCell = 8;
constexpr int kHistBins = 8;

// bin layout: 64 patch values, 32 histogram (2x2 subgrid x 8 bins), 6 color
// stats, rest zero
constexpr int kPatchOff = 0;
constexpr int kHistOff = 64;
constexpr int kColorOff = 96;

double luma(const ImageD& rgb, int y, int x) {
    return 0.299 * rgb.at(y, x, 0) + 0.587 * rgb.at(y, x, 1) + 0.114 * rgb.at(y, x, 2);
}

} // namespace

FeatureMap extract_features(const ImageD& rgb) {
    const int h = rgb.height(), w = rgb.width();
    if (h < kCell || w < kCell || rgb.channels() != 3)
        throw std::invalid_argument("extract_features: need an HxWx3 image, H,W >= 8");

    const int rows = h / kCell, cols = w / kCell;

    // grayscale + image-wide central differences (one-sided at borders)
    ImageD gray(h, w, 1), gx(h, w, 1), gy(h, w, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) gray.at(y, x) = luma(rgb, y, x);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (x == 0)
                gx.at(y, x) = gray.at(y, 1) - gray.at(y, 0);
            else if (x == w - 1)
                gx.at(y, x) = gray.at(y, x) - gray.at(y, x - 1);
            else
                gx.at(y, x) = 0.5 * (gray.at(y, x + 1) - gray.at(y, x - 1));
            if (y == 0)
                gy.at(y, x) = gray.at(1, x) - gray.at(0, x);
            else if (y == h - 1)
                gy.at(y, x) = gray.at(y, x) - gray.at(y - 1, x);
            else
                gy.at(y, x) = 0.5 * (gray.at(y + 1, x) - gray.at(y - 1, x));
        }
    }

    FeatureMap fm;
    fm.rows = rows;
    fm.cols = cols;
    fm.data.assign(static_cast<std::size_t>(rows) * cols * FeatureMap::kDim, 0.f);

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            float* d = fm.at(r, c);
            const int y0 = r * kCell, x0 = c * kCell;

            double mean = 0.0;
            for (int y = 0; y < kCell; ++y)
                for (int x = 0; x < kCell; ++x) mean += gray.at(y0 + y, x0 + x);
            mean /= kCell * kCell;
            for (int y = 0; y < kCell; ++y)
                for (int x = 0; x < kCell; ++x)
                    d[kPatchOff + y * kCell + x] =
                        static_cast<float>(gray.at(y0 + y, x0 + x) - mean);

            // magnitude-weighted orientation histograms per 4x4 sub-block
            for (int y = 0; y < kCell; ++y) {
                for (int x = 0; x < kCell; ++x) {
                    const double dx = gx.at(y0 + y, x0 + x), dy = gy.at(y0 + y, x0 + x);
                    const double mag = std::sqrt(dx * dx + dy * dy);
                    if (mag < 1e-12) continue;
                    int bin = static_cast<int>((std::atan2(dy, dx) + M_PI) / (2.0 * M_PI) * kHistBins);
                    if (bin >= kHistBins) bin = kHistBins - 1;
                    if (bin < 0) bin = 0;
                    const int sub = (y / 4) * 2 + (x / 4);
                    d[kHistOff + sub * kHistBins + bin] += static_cast<float>(mag);
                }
            }

            for (int ch = 0; ch < 3; ++ch) {
                double s = 0.0, s2 = 0.0;
                for (int y = 0; y < kCell; ++y) {
                    for (int x = 0; x < kCell; ++x) {
                        const double v = rgb.at(y0 + y, x0 + x, ch);
                        s += v;
                        s2 += v * v;
                    }
                }
                const double n = kCell * kCell;
                const double mu = s / n;
                d[kColorOff + ch] = static_cast<float>(mu);
                d[kColorOff + 3 + ch] =
                    static_cast<float>(std::sqrt(std::max(0.0, s2 / n - mu * mu)));
            }

            double norm2 = 0.0;
            for (int k = 0; k < FeatureMap::kDim; ++k) norm2 += double(d[k]) * d[k];
            if (norm2 < 1e-24) {
                d[0] = 1.f; // degenerate cell: unit basis vector
            } else {
                const float inv = static_cast<float>(1.0 / std::sqrt(norm2));
                for (int k = 0; k < FeatureMap::kDim; ++k) d[k] *= inv;
            }
        }
    }
    return fm;
}

} // namespace splat
