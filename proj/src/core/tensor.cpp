#include "ltr/core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ltr/core/errors.hpp"

namespace ltr {

namespace {

std::string shape_string(std::size_t h, std::size_t w, std::size_t c) {
    return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
}

void require_positive(std::size_t h, std::size_t w, std::size_t c) {
    if (h == 0 || w == 0 || c == 0) {
        throw DimensionError("tensor dimensions must be positive, got " + shape_string(h, w, c));
    }
}

}  // namespace

Tensor3::Tensor3(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : height_(height), width_(width), channels_(channels) {
    require_positive(height, width, channels);
    values_.assign(height * width * channels, fill);
}

Tensor3::Tensor3(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> values)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
    require_positive(height, width, channels);
    if (values_.size() != height * width * channels) {
        throw DimensionError("tensor " + shape_string(height, width, channels) + " needs " +
                             std::to_string(height * width * channels) + " values, got " +
                             std::to_string(values_.size()));
    }
}

std::size_t Tensor3::index(std::size_t row, std::size_t column, std::size_t channel) const {
    if (row >= height_ || column >= width_ || channel >= channels_) {
        throw DimensionError("index (" + std::to_string(row) + "," + std::to_string(column) + "," +
                             std::to_string(channel) + ") out of range for tensor " +
                             shape_string(height_, width_, channels_));
    }
    return (row * width_ + column) * channels_ + channel;
}

double Tensor3::at(std::size_t row, std::size_t column, std::size_t channel) const {
    return values_[index(row, column, channel)];
}

double& Tensor3::at(std::size_t row, std::size_t column, std::size_t channel) {
    return values_[index(row, column, channel)];
}

std::vector<double> reshape_to_vector(const Tensor3& t) {
    return {t.values().begin(), t.values().end()};
}

Tensor3 reshape_to_tensor(std::span<const double> values, std::size_t height, std::size_t width,
                          std::size_t channels) {
    return Tensor3(height, width, channels, std::vector<double>(values.begin(), values.end()));
}

Image::Image(Tensor3 data, double p_max) : data_(std::move(data)), p_max_(p_max) {
    if (!(p_max > 0.0) || !std::isfinite(p_max)) {
        throw DomainError("p_max must be positive and finite");
    }
    for (double v : data_.values()) {
        if (!(v >= 0.0 && v <= p_max)) {
            throw DomainError("pixel value " + std::to_string(v) + " outside [0, " + std::to_string(p_max) + "]");
        }
    }
}

Image clamp_to_image(Tensor3 t, double p_max) {
    for (double& v : t.values()) {
        v = std::clamp(v, 0.0, p_max);
    }
    return Image(std::move(t), p_max);
}

double linf_distance(const Tensor3& a, const Tensor3& b) {
    if (!a.same_shape(b)) {
        throw DimensionError("linf_distance: shape mismatch " +
                             shape_string(a.height(), a.width(), a.channels()) + " vs " +
                             shape_string(b.height(), b.width(), b.channels()));
    }
    double best = 0.0;
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        best = std::max(best, std::abs(av[i] - bv[i]));
    }
    return best;
}

double linf_distance(const Image& a, const Image& b) { return linf_distance(a.data(), b.data()); }

}  // namespace ltr
