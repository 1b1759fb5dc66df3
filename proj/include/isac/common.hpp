#pragma once

/**
 * @file common.hpp
 * @brief Shared geometry, complex grid and random stream types.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace isac {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kPi = std::numbers::pi;

inline double wavelength_from_carrier(double carrier_hz)
{
    if (!(carrier_hz > 0.0)) {
        throw std::invalid_argument("carrier frequency must be positive");
    }
    return kSpeedOfLight / carrier_hz;
}

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

    [[nodiscard]] constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    [[nodiscard]] constexpr Vec3 cross(const Vec3& o) const
    {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    [[nodiscard]] double norm() const { return std::sqrt(dot(*this)); }
    [[nodiscard]] bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

    /// Throws std::invalid_argument for the zero vector.
    [[nodiscard]] Vec3 normalized() const
    {
        const double n = norm();
        if (!(n > 0.0)) {
            throw std::invalid_argument("cannot normalize a zero-length vector");
        }
        return {x / n, y / n, z / n};
    }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Azimuth/zenith pair in radians (zenith measured from +z).
struct Angles {
    double azimuth = 0.0;
    double zenith = 0.0;
};

inline Angles direction_angles(const Vec3& unit)
{
    return {std::atan2(unit.y, unit.x), std::acos(std::clamp(unit.z, -1.0, 1.0))};
}

/// Dense row-major complex matrix. Rows index subcarriers, columns slow-time repetitions.
class ComplexGrid {
public:
    ComplexGrid() = default;
    ComplexGrid(std::size_t rows, std::size_t cols, cplx fill = {})
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<cplx> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const cplx> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<cplx>& data() { return data_; }
    [[nodiscard]] const std::vector<cplx>& data() const { return data_; }

    ComplexGrid& operator+=(const ComplexGrid& o)
    {
        if (o.rows_ != rows_ || o.cols_ != cols_) {
            throw std::invalid_argument("grid dimensions differ");
        }
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] += o.data_[i];
        }
        return *this;
    }

    [[nodiscard]] double energy() const
    {
        double e = 0.0;
        for (const auto& v : data_) {
            e += std::norm(v);
        }
        return e;
    }

    friend bool operator==(const ComplexGrid&, const ComplexGrid&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

using Rng = std::mt19937_64;

/// Independent stream for (seed, purpose, index). Identical triples give identical streams.
inline Rng make_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(purpose >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

} // namespace isac
