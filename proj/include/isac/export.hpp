#pragma once

/**
 * @file export.hpp
 * @brief CSV and binary PGM writers plus SHA-256 run manifests.
 *
 * Numbers are printed with a fixed format so that identical inputs give
 * byte-identical files.
 */

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "isac/common.hpp"
#include "isac/microdoppler.hpp"
#include "isac/rcs.hpp"
#include "isac/sensing.hpp"

namespace isac::io {

class WriteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RcsRow {
    double angle_deg = 0.0;
    double sigma_m2 = 0.0;
    double slow_dbsm = 0.0;
    double fast_db = 0.0;
};

/// Header: angle_deg,sigma_m2,sigma_dbsm,slow_dbsm,fast_db
void write_rcs_csv(const std::filesystem::path& path, std::span<const RcsRow> rows);

/// First row holds the frequency axis, first column the frame time; cells in dB.
void write_spectrogram_csv(const std::filesystem::path& path, const micro::Spectrogram& s);
/// 8-bit image, frequency on rows (highest first), 40 dB dynamic range.
void write_spectrogram_pgm(const std::filesystem::path& path, const micro::Spectrogram& s);

/// First row holds the Doppler axis, first column the delay; cells in dB.
void write_delay_doppler_csv(const std::filesystem::path& path, const sensing::DelayDopplerMap& map);
/// 8-bit image, delay on rows, 60 dB dynamic range.
void write_delay_doppler_pgm(const std::filesystem::path& path, const sensing::DelayDopplerMap& map);

/// Header: delay_s,doppler_hz,range_m,velocity_mps,power_db
void write_detections_csv(const std::filesystem::path& path, std::span<const sensing::Detection> detections,
                          const OfdmConfig& config, bool monostatic);

/// One row per subcarrier; each repetition contributes adjacent re/im columns.
void write_channel_csv(const std::filesystem::path& path, const ComplexGrid& h);

/// Writes raw text, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

std::string sha256_hex(const std::filesystem::path& path);

/// Writes `manifest.tsv` in `dir` listing `<relative path>\t<sha256>` for every
/// given file, sorted by path. Returns the manifest path.
std::filesystem::path write_manifest(const std::filesystem::path& dir, std::vector<std::filesystem::path> files);

} // namespace isac::io
