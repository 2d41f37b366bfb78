#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace softbio {

/// Pixel coordinate. v grows downward. May lie outside the image bounds.
struct ImagePoint {
    double u = 0.0;
    double v = 0.0;
};

/// World coordinate in meters. The ground is the plane f = 0 and f grows
/// upward (right-handed frame).
struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
    double f = 0.0;
};

/// Calibrated camera: pinhole intrinsics, world-to-camera extrinsics and a
/// two-coefficient radial distortion applied in normalized coordinates.
struct CameraModel {
    std::string id;
    int image_width = 0;
    int image_height = 0;
    double focal_x = 0.0;
    double focal_y = 0.0;
    double principal_x = 0.0;
    double principal_y = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Matrix3d intrinsics() const;

    /// T = K [R | t].
    Eigen::Matrix<double, 3, 4> projection() const;

    /// Camera center in world coordinates, -R^T t.
    Eigen::Vector3d center() const;

    /// Throws softbio::Error naming the first violated invariant.
    void validate() const;
};

/// Estimated-minus-annotated height offset fitted on training data.
struct HeightBias {
    double bias = 0.0;
    std::size_t sample_count = 0;
};

/// One training observation for bias fitting.
struct HeightSample {
    double estimated = 0.0;
    double annotated = 0.0;
};

/// World point -> distorted pixel. Throws GeometryError(BehindCamera) for
/// non-positive depth.
ImagePoint project(const CameraModel& camera, const WorldPoint& p);

/// Applies the radial model to an ideal (undistorted) pixel.
ImagePoint distort(const CameraModel& camera, const ImagePoint& ideal);

/// Inverts the radial model by fixed-point iteration in normalized
/// coordinates (tolerance 1e-12, at most 50 iterations).
ImagePoint undistort(const CameraModel& camera, const ImagePoint& distorted);

/// Intersects the viewing ray of an undistorted pixel with the ground plane.
WorldPoint backproject_ground(const CameraModel& camera, const ImagePoint& p);

/// Height in meters of a vertical segment whose undistorted endpoints are
/// `head` and `feet`. The feet are placed on the ground, the head directly
/// above them, and the height solves both head projection equations in the
/// least-squares sense.
double estimate_height(const CameraModel& camera, const ImagePoint& head, const ImagePoint& feet);

HeightBias fit_height_bias(const std::vector<HeightSample>& samples);

/// est - bias, clamped at zero.
double corrected_height(double estimated, const HeightBias& bias);

/// Per-camera biases with a global fallback for cameras that have fewer than
/// `min_camera_samples` training samples.
class HeightBiasTable {
public:
    static constexpr std::size_t kDefaultMinCameraSamples = 5;

    HeightBiasTable() = default;

    static HeightBiasTable fit(const std::vector<std::pair<std::string, HeightSample>>& samples,
                               std::size_t min_camera_samples = kDefaultMinCameraSamples);

    const HeightBias& for_camera(const std::string& camera_id) const;
    const HeightBias& global() const { return global_; }
    const std::map<std::string, HeightBias>& per_camera() const { return per_camera_; }

private:
    HeightBias global_;
    std::map<std::string, HeightBias> per_camera_;
};

/// Parses the key-value calibration document. Errors carry `source:line`.
CameraModel parse_calibration(const std::string& text, const std::string& source = "<calibration>");
CameraModel load_calibration(const std::string& path);
std::string format_calibration(const CameraModel& camera);

}  // namespace softbio
