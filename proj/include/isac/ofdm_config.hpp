#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "isac/common.hpp"

namespace isac {

enum class DopplerWindow { rectangular, hann };

/// Sensing numerology. Defaults reproduce the reference link-level setup:
/// 3.5 GHz carrier, 30 kHz spacing, 18 MHz (600 subcarriers), one sensing
/// symbol every 14-symbol slot, 50 repetitions, 30 dB SNR.
struct OfdmConfig {
    double carrier_hz = 3.5e9;
    double scs_hz = 30e3;
    double bandwidth_hz = 18e6;
    std::size_t pri_symbols = 14;
    std::size_t n_reps = 50;
    double snr_db = 30.0; ///< +inf disables noise
    DopplerWindow doppler_window = DopplerWindow::rectangular;

    [[nodiscard]] std::size_t n_sc() const { return static_cast<std::size_t>(std::llround(bandwidth_hz / scs_hz)); }
    [[nodiscard]] double wavelength() const { return wavelength_from_carrier(carrier_hz); }

    /// Normal-CP symbol duration including its share of the slot: 14 symbols per (15 kHz / scs) ms.
    [[nodiscard]] double symbol_duration_s() const { return 1e-3 * (15e3 / scs_hz) / 14.0; }
    [[nodiscard]] double pri_s() const { return static_cast<double>(pri_symbols) * symbol_duration_s(); }
    [[nodiscard]] double prf_hz() const { return 1.0 / pri_s(); }
    [[nodiscard]] double delay_resolution_s() const { return 1.0 / (static_cast<double>(n_sc()) * scs_hz); }
    [[nodiscard]] double doppler_resolution_hz() const { return prf_hz() / static_cast<double>(n_reps); }
    [[nodiscard]] bool noiseless() const { return std::isinf(snr_db) && snr_db > 0.0; }

    void validate() const
    {
        if (!(carrier_hz > 0.0) || !(scs_hz > 0.0) || !(bandwidth_hz > 0.0)) {
            throw std::invalid_argument("carrier, subcarrier spacing and bandwidth must be positive");
        }
        if (n_sc() == 0 || pri_symbols == 0 || n_reps == 0) {
            throw std::invalid_argument("subcarrier count, PRI and repetition count must be positive");
        }
        if (std::isnan(snr_db)) {
            throw std::invalid_argument("SNR must be a number");
        }
    }
};

} // namespace isac
