#pragma once

// Independent reference implementations used to check the library.

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "isac/common.hpp"

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr double c0 = 299792458.0;

/// Direct O(N^2) DFT. sign = -1 forward, +1 inverse; no scaling.
inline std::vector<cplx> dft(const std::vector<cplx>& x, int sign)
{
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t i = 0; i < n; ++i) {
            const double ang = sign * 2.0 * pi * static_cast<double>((k * i) % n) / static_cast<double>(n);
            acc += x[i] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

inline double sinc(double x)
{
    return x == 0.0 ? 1.0 : std::sin(x) / x;
}

/// Monostatic physical-optics plate, tilt theta in the plane of edge a.
inline double plate_rcs(double a, double b, double lambda, double theta)
{
    const double k = 2.0 * pi / lambda;
    const double s = sinc(k * a * std::sin(theta));
    const double area = a * b;
    return 4.0 * pi * area * area / (lambda * lambda) * std::pow(std::cos(theta), 2) * s * s;
}

inline double circular_plate_rcs(double r, double lambda, double theta)
{
    const double k = 2.0 * pi / lambda;
    const double x = 2.0 * k * r * std::sin(theta);
    const double j = x == 0.0 ? 1.0 : 2.0 * std::cyl_bessel_j(1.0, x) / x;
    const double area = pi * r * r;
    return 4.0 * pi * area * area / (lambda * lambda) * std::pow(std::cos(theta), 2) * j * j;
}

inline double db(double x)
{
    return 10.0 * std::log10(x);
}

/// Bistatic radar-equation loss in dB.
inline double radar_pathloss_db(double d_tx, double d_rx, double lambda, double sigma)
{
    return db(std::pow(4.0 * pi, 3) * d_tx * d_tx * d_rx * d_rx / (lambda * lambda * sigma));
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("isac_chansim_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace oracle
