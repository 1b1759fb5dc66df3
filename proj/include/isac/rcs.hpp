#pragma once

/**
 * @file rcs.hpp
 * @brief Radar cross section of primitive shapes and segmented composite objects.
 *
 * Primitive shapes use optical-region / physical-optics closed forms. Large
 * objects are split into a uniform grid of segments, each small enough that
 * the incident and scattered waves are planar across it, and the object RCS
 * is aggregated from the per-segment values.
 */

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "isac/common.hpp"

namespace isac::rcs {

struct RectPlate {
    double a = 0.0; ///< edge along the local u axis, m
    double b = 0.0; ///< edge along the local v axis, m
};

struct CircularPlate {
    double radius = 0.0;
};

struct Sphere {
    double radius = 0.0;
};

/// Axis along local u, broadside along the local normal.
struct Cylinder {
    double radius = 0.0;
    double height = 0.0;
};

using ShapeKind = std::variant<RectPlate, CircularPlate, Sphere, Cylinder>;

class PrimitiveShape {
public:
    /// Throws std::invalid_argument on non-positive dimensions or reflectivity outside [0,1].
    explicit PrimitiveShape(ShapeKind kind, double reflectivity = 1.0);

    [[nodiscard]] const ShapeKind& kind() const { return kind_; }
    [[nodiscard]] double reflectivity() const { return reflectivity_; }

    /// Largest physical extent (plate diagonal, sphere diameter, cylinder body diagonal).
    [[nodiscard]] double max_dimension() const;

    [[nodiscard]] std::string describe() const;

private:
    ShapeKind kind_;
    double reflectivity_;
};

/// Incidence/scattering angles measured from the outward normal. Angles in
/// (pi/2, pi] mean the surface is shadowed.
struct AspectAngles {
    double incidence = 0.0;
    double scattering = 0.0;

    [[nodiscard]] bool shadowed() const;
    /// Throws std::invalid_argument for NaN or angles outside [0, pi].
    void check() const;

    static AspectAngles monostatic(double theta) { return {theta, theta}; }
};

/// Placement of a primitive: center, outward normal and in-plane u axis (orthogonalized).
struct Pose {
    Vec3 center{};
    Vec3 normal{0.0, 0.0, 1.0};
    Vec3 u_axis{1.0, 0.0, 0.0};
};

struct Segment {
    PrimitiveShape shape;
    Vec3 center;
    Vec3 normal;
    Vec3 u_axis;
    double sigma_i = 0.0; ///< normal-incidence RCS at the segmentation wavelength, m^2
};

class SegmentedObject {
public:
    SegmentedObject(std::vector<Segment> segments, double d_max, std::size_t grid = 1);

    [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }
    [[nodiscard]] std::size_t size() const { return segments_.size(); }
    [[nodiscard]] double d_max() const { return d_max_; }
    /// Cells per edge for a plate grid; 1 for unsplit shapes and merged objects.
    [[nodiscard]] std::size_t grid() const { return grid_; }

    /// Union of two objects, e.g. a sign plate on a cylindrical pole.
    [[nodiscard]] static SegmentedObject merge(const SegmentedObject& a, const SegmentedObject& b);

private:
    std::vector<Segment> segments_;
    double d_max_;
    std::size_t grid_;
};

enum class Aggregation { coherent, incoherent };

struct SweepSample {
    AspectAngles aspect;
    double sigma = 0.0; ///< m^2
};

struct RcsDecomposition {
    double slow_db = 0.0;             ///< dBsm, orientation average
    std::vector<double> aspect_rad;   ///< incidence angle of each sample
    std::vector<double> fast_db;      ///< dB relative to slow_db

    /// Linear power gain of the fast component at an aspect angle (linear
    /// interpolation in dB, clamped at the sweep ends).
    [[nodiscard]] double fast_gain(double aspect_rad) const;
};

class SegmentationInfeasible : public std::runtime_error {
public:
    SegmentationInfeasible(std::size_t n_min, std::size_t n_max);
    /// Smallest segment count meeting the plane-wave criterion (0 when none exists).
    std::size_t n_min;
    /// Largest segment count keeping every segment larger than the wavelength (0 when none).
    std::size_t n_max;
};

class FarFieldViolation : public std::runtime_error {
public:
    FarFieldViolation(std::size_t segment, double min_range, double required);
    std::size_t segment;
};

inline constexpr double kFloorDbsm = -100.0;

double far_field_distance(double d_max, double wavelength);
bool plane_wave_valid(double r_tx, double r_rx, double d_max, double wavelength);

double primitive_rcs(const PrimitiveShape& shape, double wavelength, const AspectAngles& aspect);

/// RCS for an arbitrary bistatic bisector direction given in the shape's local
/// frame (components along u, v and the normal).
double primitive_rcs_local(const PrimitiveShape& shape, double wavelength, const Vec3& bisector_local);

/// Uniform grid x grid split of a rectangular plate; other shapes accept grid == 1 only.
SegmentedObject segment_grid(const PrimitiveShape& shape, std::size_t grid, double wavelength, const Pose& pose = {});

/// Smallest square grid meeting the plane-wave criterion at r_min while every
/// segment stays larger than the wavelength.
SegmentedObject segment_object(const PrimitiveShape& shape, double wavelength, double r_min, const Pose& pose = {});

double object_rcs(const SegmentedObject& obj, const Vec3& tx_pos, const Vec3& rx_pos, double wavelength,
                  Aggregation mode = Aggregation::coherent);

RcsDecomposition decompose_slow_fast(std::span<const SweepSample> sweep);

} // namespace isac::rcs
