#include "isac/rcs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace isac::rcs {

namespace {

double sinc(double x)
{
    return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
}

/// 2 J1(x) / x, the circular-aperture pattern.
double jinc(double x)
{
    return std::abs(x) < 1e-12 ? 1.0 : 2.0 * std::cyl_bessel_j(1.0, x) / x;
}

void require_wavelength(double wavelength)
{
    if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
        throw std::invalid_argument(fmt::format("wavelength must be positive, got {}", wavelength));
    }
}

struct Frame {
    Vec3 u;
    Vec3 v;
    Vec3 n;
};

Frame make_frame(const Vec3& normal, const Vec3& u_hint)
{
    const Vec3 n = normal.normalized();
    Vec3 u = u_hint - n * u_hint.dot(n);
    if (u.norm() < 1e-9) {
        // hint parallel to the normal; pick any perpendicular direction
        u = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} - n * n.x : Vec3{0, 1, 0} - n * n.y;
    }
    u = u.normalized();
    return {u, n.cross(u), n};
}

Segment make_segment(const PrimitiveShape& shape, const Vec3& center, const Frame& f, double wavelength)
{
    return {shape, center, f.n, f.u, primitive_rcs(shape, wavelength, AspectAngles::monostatic(0.0))};
}

} // namespace

PrimitiveShape::PrimitiveShape(ShapeKind kind, double reflectivity) : kind_(kind), reflectivity_(reflectivity)
{
    if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) {
        throw std::invalid_argument(fmt::format("reflectivity must lie in [0,1], got {}", reflectivity));
    }
    const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    const bool ok = std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RectPlate>) {
                return positive(s.a) && positive(s.b);
            } else if constexpr (std::is_same_v<T, Cylinder>) {
                return positive(s.radius) && positive(s.height);
            } else {
                return positive(s.radius);
            }
        },
        kind_);
    if (!ok) {
        throw std::invalid_argument("shape dimensions must be strictly positive");
    }
}

double PrimitiveShape::max_dimension() const
{
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RectPlate>) {
                return std::hypot(s.a, s.b);
            } else if constexpr (std::is_same_v<T, Cylinder>) {
                return std::hypot(2.0 * s.radius, s.height);
            } else {
                return 2.0 * s.radius;
            }
        },
        kind_);
}

std::string PrimitiveShape::describe() const
{
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RectPlate>) {
                return fmt::format("rect-plate({}x{} m)", s.a, s.b);
            } else if constexpr (std::is_same_v<T, CircularPlate>) {
                return fmt::format("circular-plate(r={} m)", s.radius);
            } else if constexpr (std::is_same_v<T, Sphere>) {
                return fmt::format("sphere(r={} m)", s.radius);
            } else {
                return fmt::format("cylinder(r={} m, h={} m)", s.radius, s.height);
            }
        },
        kind_);
}

bool AspectAngles::shadowed() const
{
    return incidence > kPi / 2 || scattering > kPi / 2;
}

void AspectAngles::check() const
{
    const auto in_range = [](double a) { return a >= 0.0 && a <= kPi; };
    if (!in_range(incidence) || !in_range(scattering)) {
        throw std::invalid_argument(
            fmt::format("aspect angles must lie in [0, pi], got ({}, {})", incidence, scattering));
    }
}

SegmentedObject::SegmentedObject(std::vector<Segment> segments, double d_max, std::size_t grid)
    : segments_(std::move(segments)), d_max_(d_max), grid_(grid)
{
    if (segments_.empty()) {
        throw std::invalid_argument("a segmented object needs at least one segment");
    }
    for (const auto& s : segments_) {
        if (std::abs(s.normal.norm() - 1.0) > 1e-9) {
            throw std::invalid_argument("segment normal must be a unit vector");
        }
        if (!(s.sigma_i >= 0.0)) {
            throw std::invalid_argument("segment RCS must be non-negative");
        }
    }
}

SegmentedObject SegmentedObject::merge(const SegmentedObject& a, const SegmentedObject& b)
{
    std::vector<Segment> all = a.segments_;
    all.insert(all.end(), b.segments_.begin(), b.segments_.end());
    // Envelope of both objects: farthest pair of segment extremities.
    double d_max = std::max(a.d_max_, b.d_max_);
    for (const auto& sa : a.segments_) {
        for (const auto& sb : b.segments_) {
            d_max = std::max(d_max, distance(sa.center, sb.center) + 0.5 * (sa.shape.max_dimension() +
                                                                             sb.shape.max_dimension()));
        }
    }
    return SegmentedObject(std::move(all), d_max, 1);
}

double RcsDecomposition::fast_gain(double aspect) const
{
    if (fast_db.empty()) {
        return 1.0;
    }
    std::vector<std::size_t> order(aspect_rad.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return aspect_rad[i] < aspect_rad[j]; });

    if (aspect <= aspect_rad[order.front()]) {
        return from_db(fast_db[order.front()]);
    }
    if (aspect >= aspect_rad[order.back()]) {
        return from_db(fast_db[order.back()]);
    }
    for (std::size_t i = 1; i < order.size(); ++i) {
        const double x0 = aspect_rad[order[i - 1]];
        const double x1 = aspect_rad[order[i]];
        if (aspect <= x1) {
            const double w = x1 > x0 ? (aspect - x0) / (x1 - x0) : 0.0;
            return from_db((1.0 - w) * fast_db[order[i - 1]] + w * fast_db[order[i]]);
        }
    }
    return from_db(fast_db[order.back()]);
}

SegmentationInfeasible::SegmentationInfeasible(std::size_t n_min_, std::size_t n_max_)
    : std::runtime_error(fmt::format("segmentation infeasible: plane-wave criterion needs N >= {}, "
                                     "wavelength limit allows N <= {}",
                                     n_min_, n_max_)),
      n_min(n_min_), n_max(n_max_)
{
}

FarFieldViolation::FarFieldViolation(std::size_t segment_, double min_range, double required)
    : std::runtime_error(fmt::format("segment {} violates the plane-wave criterion: min range {} m <= {} m",
                                     segment_, min_range, required)),
      segment(segment_)
{
}

double far_field_distance(double d_max, double wavelength)
{
    require_wavelength(wavelength);
    if (!(d_max >= 0.0)) {
        throw std::invalid_argument(fmt::format("object dimension must be non-negative, got {}", d_max));
    }
    return 2.0 * d_max * d_max / wavelength;
}

bool plane_wave_valid(double r_tx, double r_rx, double d_max, double wavelength)
{
    if (!(r_tx > 0.0) || !(r_rx > 0.0)) {
        throw std::invalid_argument(fmt::format("ranges must be positive, got ({}, {})", r_tx, r_rx));
    }
    return std::min(r_tx, r_rx) > far_field_distance(d_max, wavelength);
}

double primitive_rcs_local(const PrimitiveShape& shape, double wavelength, const Vec3& bisector_local)
{
    require_wavelength(wavelength);
    const Vec3 b = bisector_local.normalized();
    const double k = 2.0 * kPi / wavelength;
    const double lambda2 = wavelength * wavelength;
    const double cos_n = std::abs(b.z);

    const double sigma = std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RectPlate>) {
                const double area = s.a * s.b;
                const double fu = sinc(k * s.a * b.x);
                const double fv = sinc(k * s.b * b.y);
                return 4.0 * kPi * area * area / lambda2 * cos_n * cos_n * fu * fu * fv * fv;
            } else if constexpr (std::is_same_v<T, CircularPlate>) {
                const double area = kPi * s.radius * s.radius;
                const double sin_t = std::hypot(b.x, b.y);
                const double f = jinc(2.0 * k * s.radius * sin_t);
                return 4.0 * kPi * area * area / lambda2 * cos_n * cos_n * f * f;
            } else if constexpr (std::is_same_v<T, Sphere>) {
                return kPi * s.radius * s.radius;
            } else {
                const double axial = b.x;
                const double cos_t = std::sqrt(std::max(0.0, 1.0 - axial * axial));
                const double f = sinc(k * s.height * axial);
                return k * s.radius * s.height * s.height * cos_t * f * f;
            }
        },
        shape.kind());
    const double rho = shape.reflectivity();
    return sigma * rho * rho;
}

double primitive_rcs(const PrimitiveShape& shape, double wavelength, const AspectAngles& aspect)
{
    require_wavelength(wavelength);
    aspect.check();
    const bool sphere = std::holds_alternative<Sphere>(shape.kind());
    if (aspect.shadowed() && !sphere) {
        return 0.0;
    }
    const double theta = 0.5 * (aspect.incidence + aspect.scattering);
    if (theta >= kPi / 2 && !sphere) {
        return 0.0;
    }
    return primitive_rcs_local(shape, wavelength, {std::sin(theta), 0.0, std::cos(theta)});
}

SegmentedObject segment_grid(const PrimitiveShape& shape, std::size_t grid, double wavelength, const Pose& pose)
{
    require_wavelength(wavelength);
    if (grid == 0) {
        throw std::invalid_argument("grid must be at least 1");
    }
    const Frame f = make_frame(pose.normal, pose.u_axis);
    const double d_max = shape.max_dimension();

    const auto* plate = std::get_if<RectPlate>(&shape.kind());
    if (plate == nullptr) {
        if (grid != 1) {
            throw std::invalid_argument(fmt::format("{} cannot be split into a uniform grid", shape.describe()));
        }
        return SegmentedObject({make_segment(shape, pose.center, f, wavelength)}, d_max, 1);
    }

    const double da = plate->a / static_cast<double>(grid);
    const double db = plate->b / static_cast<double>(grid);
    const PrimitiveShape cell(RectPlate{da, db}, shape.reflectivity());
    std::vector<Segment> segments;
    segments.reserve(grid * grid);
    for (std::size_t i = 0; i < grid; ++i) {
        for (std::size_t j = 0; j < grid; ++j) {
            const double ou = -0.5 * plate->a + (static_cast<double>(i) + 0.5) * da;
            const double ov = -0.5 * plate->b + (static_cast<double>(j) + 0.5) * db;
            segments.push_back(make_segment(cell, pose.center + f.u * ou + f.v * ov, f, wavelength));
        }
    }
    return SegmentedObject(std::move(segments), d_max, grid);
}

SegmentedObject segment_object(const PrimitiveShape& shape, double wavelength, double r_min, const Pose& pose)
{
    require_wavelength(wavelength);
    if (!(r_min > 0.0)) {
        throw std::invalid_argument(fmt::format("r_min must be positive, got {}", r_min));
    }
    const double d = shape.max_dimension();
    const auto far_ok = [&](std::size_t n) {
        return plane_wave_valid(r_min, r_min, d / static_cast<double>(n), wavelength);
    };
    const auto size_ok = [&](std::size_t n) { return d / static_cast<double>(n) > wavelength; };

    if (!std::holds_alternative<RectPlate>(shape.kind())) {
        if (far_ok(1) && size_ok(1)) {
            return segment_grid(shape, 1, wavelength, pose);
        }
        throw SegmentationInfeasible(far_ok(1) ? 1 : 0, size_ok(1) ? 1 : 0);
    }

    // Largest grid with cells still above one wavelength.
    std::size_t max_grid = 0;
    if (size_ok(1)) {
        max_grid = static_cast<std::size_t>(std::ceil(d / wavelength));
        while (max_grid > 1 && !size_ok(max_grid)) {
            --max_grid;
        }
    }
    // Smallest grid meeting the plane-wave criterion.
    const double cell_limit = std::sqrt(r_min * wavelength / 2.0);
    auto min_grid = static_cast<std::size_t>(std::max(1.0, std::floor(d / cell_limit)));
    while (min_grid > 1 && far_ok(min_grid - 1)) {
        --min_grid;
    }
    while (!far_ok(min_grid)) {
        ++min_grid;
    }

    if (max_grid == 0 || min_grid > max_grid) {
        throw SegmentationInfeasible(min_grid * min_grid, max_grid * max_grid);
    }
    return segment_grid(shape, min_grid, wavelength, pose);
}

double object_rcs(const SegmentedObject& obj, const Vec3& tx_pos, const Vec3& rx_pos, double wavelength,
                  Aggregation mode)
{
    require_wavelength(wavelength);
    cplx field{};
    double power = 0.0;
    const auto& segs = obj.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Segment& s = segs[i];
        const Vec3 to_tx = tx_pos - s.center;
        const Vec3 to_rx = rx_pos - s.center;
        const double r_tx = to_tx.norm();
        const double r_rx = to_rx.norm();
        const double seg_d = s.shape.max_dimension();
        if (r_tx <= 0.0 || r_rx <= 0.0 || !plane_wave_valid(r_tx, r_rx, seg_d, wavelength)) {
            throw FarFieldViolation(i, std::min(r_tx, r_rx), far_field_distance(seg_d, wavelength));
        }

        const Frame f = make_frame(s.normal, s.u_axis);
        const Vec3 h = to_tx * (1.0 / r_tx) + to_rx * (1.0 / r_rx);
        double sigma = 0.0;
        if (h.norm() < 1e-12) {
            // forward scatter: bisector lies in the surface plane
            sigma = primitive_rcs_local(s.shape, wavelength, {0.0, 1.0, 0.0});
        } else {
            sigma = primitive_rcs_local(s.shape, wavelength, {h.dot(f.u), h.dot(f.v), h.dot(f.n)});
        }

        power += sigma;
        const double phase = 2.0 * kPi * (r_tx + r_rx) / wavelength;
        field += std::sqrt(sigma) * std::polar(1.0, phase);
    }
    // a lone segment has no interference term
    if (mode == Aggregation::incoherent || segs.size() == 1) {
        return power;
    }
    return std::norm(field);
}

RcsDecomposition decompose_slow_fast(std::span<const SweepSample> sweep)
{
    if (sweep.empty()) {
        throw std::invalid_argument("RCS sweep is empty");
    }
    RcsDecomposition out;
    out.aspect_rad.reserve(sweep.size());
    out.fast_db.reserve(sweep.size());
    double sum = 0.0;
    for (const auto& s : sweep) {
        if (!(s.sigma >= 0.0)) {
            throw std::invalid_argument(fmt::format("RCS samples must be non-negative, got {}", s.sigma));
        }
        const double db = s.sigma > 0.0 ? std::max(to_db(s.sigma), kFloorDbsm) : kFloorDbsm;
        out.aspect_rad.push_back(s.aspect.incidence);
        out.fast_db.push_back(db);
        sum += db;
    }
    out.slow_db = sum / static_cast<double>(sweep.size());
    for (auto& v : out.fast_db) {
        v -= out.slow_db;
    }
    return out;
}

} // namespace isac::rcs
