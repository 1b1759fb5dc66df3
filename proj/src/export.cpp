#include "isac/export.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace isac::io {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw WriteError(fmt::format("cannot create directory '{}': {}", path.parent_path().string(), ec.message()));
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw WriteError(fmt::format("cannot open '{}' for writing", path.string()));
    }
    return out;
}

void close_checked(std::ofstream& out, const fs::path& path)
{
    out.close();
    if (!out) {
        throw WriteError(fmt::format("failed writing '{}'", path.string()));
    }
}

std::string num(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (std::isnan(v)) {
        return "nan";
    }
    return fmt::format("{:.9g}", v);
}

double db_mag(double magnitude)
{
    return magnitude > 0.0 ? 20.0 * std::log10(magnitude) : -300.0;
}

/// Maps dB values to 0..255 over [max - range, max].
std::vector<unsigned char> to_gray(const std::vector<double>& db, double range_db)
{
    const double top = db.empty() ? 0.0 : *std::max_element(db.begin(), db.end());
    std::vector<unsigned char> px(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
        const double v = std::clamp((db[i] - (top - range_db)) / range_db, 0.0, 1.0);
        px[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    return px;
}

void write_pgm(const fs::path& path, std::size_t width, std::size_t height, const std::vector<unsigned char>& px)
{
    auto out = open_out(path);
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    close_checked(out, path);
}

} // namespace

void write_rcs_csv(const fs::path& path, std::span<const RcsRow> rows)
{
    auto out = open_out(path);
    out << "angle_deg,sigma_m2,sigma_dbsm,slow_dbsm,fast_db\n";
    for (const auto& r : rows) {
        const double dbsm = r.sigma_m2 > 0.0 ? std::max(to_db(r.sigma_m2), rcs::kFloorDbsm) : rcs::kFloorDbsm;
        out << num(r.angle_deg) << ',' << num(r.sigma_m2) << ',' << num(dbsm) << ',' << num(r.slow_dbsm) << ','
            << num(r.fast_db) << '\n';
    }
    close_checked(out, path);
}

void write_spectrogram_csv(const fs::path& path, const micro::Spectrogram& s)
{
    auto out = open_out(path);
    out << "time_s";
    for (double f : s.freq_hz) {
        out << ',' << num(f);
    }
    out << '\n';
    for (std::size_t t = 0; t < s.frames(); ++t) {
        out << num(s.time_s[t]);
        for (std::size_t b = 0; b < s.bins(); ++b) {
            out << ',' << num(db_mag(s.at(t, b)));
        }
        out << '\n';
    }
    close_checked(out, path);
}

void write_spectrogram_pgm(const fs::path& path, const micro::Spectrogram& s)
{
    const std::size_t w = s.frames();
    const std::size_t h = s.bins();
    std::vector<double> db(w * h);
    for (std::size_t row = 0; row < h; ++row) {
        const std::size_t bin = h - 1 - row;
        for (std::size_t t = 0; t < w; ++t) {
            db[row * w + t] = db_mag(s.at(t, bin));
        }
    }
    write_pgm(path, w, h, to_gray(db, 40.0));
}

void write_delay_doppler_csv(const fs::path& path, const sensing::DelayDopplerMap& map)
{
    auto out = open_out(path);
    out << "delay_s";
    for (double f : map.doppler_axis_hz()) {
        out << ',' << num(f);
    }
    out << '\n';
    for (std::size_t d = 0; d < map.n_delay(); ++d) {
        out << num(map.delay_axis_s()[d]);
        for (std::size_t c = 0; c < map.n_doppler(); ++c) {
            out << ',' << num(db_mag(map.magnitude(d, c)));
        }
        out << '\n';
    }
    close_checked(out, path);
}

void write_delay_doppler_pgm(const fs::path& path, const sensing::DelayDopplerMap& map)
{
    std::vector<double> db;
    db.reserve(map.magnitudes().size());
    for (double m : map.magnitudes()) {
        db.push_back(db_mag(m));
    }
    write_pgm(path, map.n_doppler(), map.n_delay(), to_gray(db, 60.0));
}

void write_detections_csv(const fs::path& path, std::span<const sensing::Detection> detections,
                          const OfdmConfig& config, bool monostatic)
{
    auto out = open_out(path);
    out << "delay_s,doppler_hz,range_m,velocity_mps,power_db\n";
    for (const auto& d : detections) {
        const auto rv = sensing::to_range_velocity(d, config, monostatic);
        out << num(rv.delay_s) << ',' << num(rv.doppler_hz) << ',' << num(rv.range_m) << ',' << num(rv.velocity_mps)
            << ',' << num(d.power > 0.0 ? to_db(d.power) : -300.0) << '\n';
    }
    close_checked(out, path);
}

void write_channel_csv(const fs::path& path, const ComplexGrid& h)
{
    auto out = open_out(path);
    out << "subcarrier";
    for (std::size_t m = 0; m < h.cols(); ++m) {
        out << ",re_" << m << ",im_" << m;
    }
    out << '\n';
    for (std::size_t k = 0; k < h.rows(); ++k) {
        out << k;
        for (std::size_t m = 0; m < h.cols(); ++m) {
            out << ',' << num(h(k, m).real()) << ',' << num(h(k, m).imag());
        }
        out << '\n';
    }
    close_checked(out, path);
}

void write_text(const fs::path& path, const std::string& text)
{
    auto out = open_out(path);
    out << text;
    close_checked(out, path);
}

std::string sha256_hex(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw WriteError(fmt::format("cannot read '{}' for hashing", path.string()));
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw WriteError("SHA-256 initialisation failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) {
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
        }
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex += fmt::format("{:02x}", md[i]);
    }
    return hex;
}

fs::path write_manifest(const fs::path& dir, std::vector<fs::path> files)
{
    std::vector<std::string> rel;
    rel.reserve(files.size());
    for (const auto& f : files) {
        rel.push_back(fs::relative(f, dir).generic_string());
    }
    std::sort(rel.begin(), rel.end());
    std::string text;
    for (const auto& r : rel) {
        text += r + '\t' + sha256_hex(dir / r) + '\n';
    }
    const fs::path manifest = dir / "manifest.tsv";
    write_text(manifest, text);
    return manifest;
}

} // namespace isac::io
