#include "splat/compact/ssim.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace splat {

namespace {

constexpr int kWin = 11;
constexpr int kHalf = kWin / 2;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

struct Window {
    double taps[kWin];
    Window() {
        double sum = 0.0;
        for (int i = 0; i < kWin; ++i) {
            const double d = i - kHalf;
            taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += taps[i];
        }
        for (double& t : taps) t /= sum;
    }
};

const Window kWindow;

// Zero-padded separable convolution with the (symmetric) window.
void conv_zero(const ImageD& src, ImageD& tmp, ImageD& dst) {
    const int h = src.height(), w = src.width(), ch = src.channels();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                const int k0 = std::max(0, kHalf - x), k1 = std::min(kWin, w - x + kHalf);
                for (int k = k0; k < k1; ++k) acc += kWindow.taps[k] * src.at(y, x + k - kHalf, c);
                tmp.at(y, x, c) = acc;
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                const int k0 = std::max(0, kHalf - y), k1 = std::min(kWin, h - y + kHalf);
                for (int k = k0; k < k1; ++k) acc += kWindow.taps[k] * tmp.at(y + k - kHalf, x, c);
                dst.at(y, x, c) = acc;
            }
        }
    }
}

// Window mass inside the image, separable: mass(y, x) = rm[y] * cm[x].
std::vector<double> edge_mass(int n) {
    std::vector<double> m(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        const int k0 = std::max(0, kHalf - i), k1 = std::min(kWin, n - i + kHalf);
        for (int k = k0; k < k1; ++k) acc += kWindow.taps[k];
        m[i] = acc;
    }
    return m;
}

} // namespace

double ssim(const ImageD& a, const ImageD& b, ImageD* d_a) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
    const int h = a.height(), w = a.width(), ch = a.channels();
    if (h == 0 || w == 0) throw std::invalid_argument("ssim: empty image");

    const auto rm = edge_mass(h);
    const auto cm = edge_mass(w);

    ImageD tmp(h, w, ch), mu_a(h, w, ch), mu_b(h, w, ch);
    ImageD maa(h, w, ch), mbb(h, w, ch), mab(h, w, ch);
    ImageD prod(h, w, ch);

    conv_zero(a, tmp, mu_a);
    conv_zero(b, tmp, mu_b);
    for (std::size_t i = 0; i < a.size(); ++i) prod.data()[i] = a.data()[i] * a.data()[i];
    conv_zero(prod, tmp, maa);
    for (std::size_t i = 0; i < a.size(); ++i) prod.data()[i] = b.data()[i] * b.data()[i];
    conv_zero(prod, tmp, mbb);
    for (std::size_t i = 0; i < a.size(); ++i) prod.data()[i] = a.data()[i] * b.data()[i];
    conv_zero(prod, tmp, mab);

    // normalize by in-image window mass
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double inv = 1.0 / (rm[y] * cm[x]);
            for (int c = 0; c < ch; ++c) {
                mu_a.at(y, x, c) *= inv;
                mu_b.at(y, x, c) *= inv;
                maa.at(y, x, c) *= inv;
                mbb.at(y, x, c) *= inv;
                mab.at(y, x, c) *= inv;
            }
        }
    }

    const double up = 1.0 / static_cast<double>(a.size());
    double total = 0.0;
    ImageD g_mu, g_maa, g_mab;
    if (d_a) {
        g_mu = ImageD(h, w, ch);
        g_maa = ImageD(h, w, ch);
        g_mab = ImageD(h, w, ch);
    }

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                const double mx = mu_a.at(y, x, c), my = mu_b.at(y, x, c);
                const double sxx = maa.at(y, x, c) - mx * mx;
                const double syy = mbb.at(y, x, c) - my * my;
                const double sxy = mab.at(y, x, c) - mx * my;
                const double a1 = 2.0 * mx * my + kC1, a2 = 2.0 * sxy + kC2;
                const double b1 = mx * mx + my * my + kC1, b2 = sxx + syy + kC2;
                total += (a1 * a2) / (b1 * b2);

                if (d_a) {
                    const double denom = b1 * b2;
                    const double da1 = up * a2 / denom;
                    const double da2 = up * a1 / denom;
                    const double db1 = -up * a1 * a2 / (b1 * denom);
                    const double db2 = -up * a1 * a2 / (b2 * denom);
                    const double dsxy = 2.0 * da2;
                    const double dsxx = db2;
                    g_mu.at(y, x, c) =
                        da1 * 2.0 * my + db1 * 2.0 * mx - dsxx * 2.0 * mx - dsxy * my;
                    g_maa.at(y, x, c) = dsxx;
                    g_mab.at(y, x, c) = dsxy;
                }
            }
        }
    }

    if (d_a) {
        // adjoint of the normalized convolution: conv(u / mass)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double inv = 1.0 / (rm[y] * cm[x]);
                for (int c = 0; c < ch; ++c) {
                    g_mu.at(y, x, c) *= inv;
                    g_maa.at(y, x, c) *= inv;
                    g_mab.at(y, x, c) *= inv;
                }
            }
        }
        *d_a = ImageD(h, w, ch);
        ImageD back(h, w, ch);
        conv_zero(g_mu, tmp, back);
        for (std::size_t i = 0; i < a.size(); ++i) d_a->data()[i] = back.data()[i];
        conv_zero(g_maa, tmp, back);
        for (std::size_t i = 0; i < a.size(); ++i) d_a->data()[i] += back.data()[i] * 2.0 * a.data()[i];
        conv_zero(g_mab, tmp, back);
        for (std::size_t i = 0; i < a.size(); ++i) d_a->data()[i] += back.data()[i] * b.data()[i];
    }

    return total * up;
}

} // namespace splat
