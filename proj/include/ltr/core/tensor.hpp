#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ltr {

/// Dense height x width x channels array of doubles.
///
/// Flat layout (used everywhere a tensor is viewed as a vector, including the
/// MILP variable layout): index = (row * width + column) * channels + channel.
/// Coordinates are 0-based.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);
    Tensor3(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> values);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    /// Flat index of (row, column, channel); throws DimensionError when out of range.
    std::size_t index(std::size_t row, std::size_t column, std::size_t channel) const;

    double at(std::size_t row, std::size_t column, std::size_t channel) const;
    double& at(std::size_t row, std::size_t column, std::size_t channel);

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool same_shape(const Tensor3& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<double> values_;
};

/// Flattens in the global (row, column, channel) order.
std::vector<double> reshape_to_vector(const Tensor3& t);

/// Inverse of reshape_to_vector.
Tensor3 reshape_to_tensor(std::span<const double> values, std::size_t height, std::size_t width,
                          std::size_t channels);

/// Pixel tensor plus its maximum value. Every pixel lies in [0, p_max].
class Image {
public:
    Image() = default;
    /// Throws DomainError if p_max <= 0 or any pixel falls outside [0, p_max].
    Image(Tensor3 data, double p_max);

    const Tensor3& data() const noexcept { return data_; }
    double p_max() const noexcept { return p_max_; }

    std::size_t height() const noexcept { return data_.height(); }
    std::size_t width() const noexcept { return data_.width(); }
    std::size_t channels() const noexcept { return data_.channels(); }

    double at(std::size_t row, std::size_t column, std::size_t channel) const {
        return data_.at(row, column, channel);
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    Tensor3 data_;
    double p_max_ = 1.0;
};

/// Clamps every value of `t` into [0, p_max] and wraps it as an Image.
Image clamp_to_image(Tensor3 t, double p_max);

/// Max absolute coordinate difference. Throws DimensionError on shape mismatch.
double linf_distance(const Image& a, const Image& b);
double linf_distance(const Tensor3& a, const Tensor3& b);

}  // namespace ltr
