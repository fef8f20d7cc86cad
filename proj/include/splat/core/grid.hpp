#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace splat {

// Dense row-major H x W x C buffer. Used for images, per-pixel gradients and
// small lookup volumes alike.
template <typename T>
class Grid {
public:
    Grid() = default;

    Grid(int height, int width, int channels = 1, T fill = T{})
        : height_(height), width_(width), channels_(channels),
          data_(static_cast<std::size_t>(height) * width * channels, fill) {
        if (height < 0 || width < 0 || channels <= 0)
            throw std::invalid_argument("Grid: bad shape");
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }
    std::size_t size() const { return data_.size(); }

    T& at(int y, int x, int c = 0) {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    const T& at(int y, int x, int c = 0) const {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    void fill(T v) { data_.assign(data_.size(), v); }

    bool same_shape(const Grid& o) const {
        return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 1;
    std::vector<T> data_;
};

using ImageD = Grid<double>;
using ImageF = Grid<float>;

} // namespace splat
