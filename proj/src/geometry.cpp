#include "softbio/geometry.hpp"

#include "softbio/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace softbio {

namespace {

constexpr double kUndistortTolerance = 1e-12;
constexpr int kUndistortMaxIterations = 50;
constexpr double kParallelRayEpsilon = 1e-12;

double radial_factor(const CameraModel& camera, double r2) {
    return 1.0 + camera.k1 * r2 + camera.k2 * r2 * r2;
}

}  // namespace

Eigen::Matrix3d CameraModel::intrinsics() const {
    Eigen::Matrix3d k;
    k << focal_x, 0.0, principal_x,
         0.0, focal_y, principal_y,
         0.0, 0.0, 1.0;
    return k;
}

Eigen::Matrix<double, 3, 4> CameraModel::projection() const {
    Eigen::Matrix<double, 3, 4> extrinsic;
    extrinsic.leftCols<3>() = rotation;
    extrinsic.col(3) = translation;
    return intrinsics() * extrinsic;
}

Eigen::Vector3d CameraModel::center() const { return -rotation.transpose() * translation; }

void CameraModel::validate() const {
    if (!(focal_x > 0.0) || !(focal_y > 0.0)) {
        throw Error("focal lengths must be positive");
    }
    if (!std::isfinite(principal_x) || !std::isfinite(principal_y) || !std::isfinite(k1) ||
        !std::isfinite(k2) || !translation.allFinite() || !rotation.allFinite()) {
        throw Error("camera parameters must be finite");
    }
    const Eigen::Matrix3d gram = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    if (gram.cwiseAbs().maxCoeff() >= 1e-9) {
        throw Error("rotation is not orthonormal");
    }
    if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
        throw Error("rotation determinant is not +1");
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 3, 4>> lu(projection());
    if (lu.rank() != 3) {
        throw Error("projection matrix is rank deficient");
    }
    if (image_width <= 0 || image_height <= 0) {
        throw Error("image dimensions must be positive");
    }
}

ImagePoint distort(const CameraModel& camera, const ImagePoint& ideal) {
    const double xn = (ideal.u - camera.principal_x) / camera.focal_x;
    const double yn = (ideal.v - camera.principal_y) / camera.focal_y;
    const double factor = radial_factor(camera, xn * xn + yn * yn);
    return {camera.principal_x + camera.focal_x * xn * factor,
            camera.principal_y + camera.focal_y * yn * factor};
}

ImagePoint project(const CameraModel& camera, const WorldPoint& p) {
    const Eigen::Vector3d cam = camera.rotation * Eigen::Vector3d(p.x, p.y, p.f) + camera.translation;
    if (!(cam.z() > 0.0)) {
        throw GeometryError(GeometryError::Kind::BehindCamera, "behind camera");
    }
    const double xn = cam.x() / cam.z();
    const double yn = cam.y() / cam.z();
    const double factor = radial_factor(camera, xn * xn + yn * yn);
    return {camera.principal_x + camera.focal_x * xn * factor,
            camera.principal_y + camera.focal_y * yn * factor};
}

ImagePoint undistort(const CameraModel& camera, const ImagePoint& distorted) {
    const double xd = (distorted.u - camera.principal_x) / camera.focal_x;
    const double yd = (distorted.v - camera.principal_y) / camera.focal_y;
    if (camera.k1 == 0.0 && camera.k2 == 0.0) {
        return distorted;
    }
    double x = xd;
    double y = yd;
    double residual = 0.0;
    for (int iter = 0; iter < kUndistortMaxIterations; ++iter) {
        const double factor = radial_factor(camera, x * x + y * y);
        residual = std::max(std::abs(x * factor - xd), std::abs(y * factor - yd));
        if (residual <= kUndistortTolerance) {
            return {camera.principal_x + camera.focal_x * x, camera.principal_y + camera.focal_y * y};
        }
        x = xd / factor;
        y = yd / factor;
    }
    std::ostringstream msg;
    msg << "undistortion did not converge after " << kUndistortMaxIterations
        << " iterations (residual " << residual << ")";
    throw GeometryError(GeometryError::Kind::NonConvergence, msg.str());
}

WorldPoint backproject_ground(const CameraModel& camera, const ImagePoint& p) {
    const Eigen::Matrix3d k = camera.intrinsics();
    const Eigen::Vector3d pixel(p.u, p.v, 1.0);
    const Eigen::Vector3d ray = (camera.rotation.transpose() * k.inverse() * pixel).normalized();
    if (std::abs(ray.z()) <= kParallelRayEpsilon) {
        throw GeometryError(GeometryError::Kind::DegenerateRay, "degenerate ray");
    }
    const Eigen::Vector3d center = camera.center();
    const double lambda = -center.z() / ray.z();
    if (!(lambda > 0.0)) {
        throw GeometryError(GeometryError::Kind::BehindCamera, "behind camera");
    }

    // Ground-plane homography: columns r1, r2, t of [R|t] under K.
    Eigen::Matrix3d homography;
    homography.col(0) = camera.rotation.col(0);
    homography.col(1) = camera.rotation.col(1);
    homography.col(2) = camera.translation;
    homography = k * homography;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(homography);
    if (!lu.isInvertible()) {
        throw GeometryError(GeometryError::Kind::DegenerateRay, "degenerate ray");
    }
    const Eigen::Vector3d ground = lu.solve(pixel);
    if (std::abs(ground.z()) <= kParallelRayEpsilon * ground.head<2>().norm()) {
        throw GeometryError(GeometryError::Kind::DegenerateRay, "degenerate ray");
    }
    return {ground.x() / ground.z(), ground.y() / ground.z(), 0.0};
}

double estimate_height(const CameraModel& camera, const ImagePoint& head, const ImagePoint& feet) {
    const WorldPoint base = backproject_ground(camera, feet);
    const Eigen::Matrix<double, 3, 4> t = camera.projection();

    // Projection of (x, y, h) is a + h b with a the ground point's image and b
    // the image of the vertical direction.
    const Eigen::Vector3d a = t.col(0) * base.x + t.col(1) * base.y + t.col(3);
    const Eigen::Vector3d b = t.col(2);

    // u (a3 + h b3) = a1 + h b1  ->  h (u b3 - b1) = a1 - u a3, likewise for v.
    const Eigen::Vector2d coeff(head.u * b.z() - b.x(), head.v * b.z() - b.y());
    const Eigen::Vector2d rhs(a.x() - head.u * a.z(), a.y() - head.v * a.z());
    const double scale = b.cwiseAbs().sum() * std::max({1.0, std::abs(head.u), std::abs(head.v)});
    const double norm2 = coeff.squaredNorm();
    if (!(std::sqrt(norm2) > 1e-12 * scale)) {
        throw GeometryError(GeometryError::Kind::UnobservableHeight, "unobservable height");
    }
    return coeff.dot(rhs) / norm2;
}

HeightBias fit_height_bias(const std::vector<HeightSample>& samples) {
    if (samples.empty()) {
        throw Error("no samples");
    }
    double sum = 0.0;
    for (const auto& s : samples) {
        sum += s.estimated - s.annotated;
    }
    return {sum / static_cast<double>(samples.size()), samples.size()};
}

double corrected_height(double estimated, const HeightBias& bias) {
    return std::max(0.0, estimated - bias.bias);
}

HeightBiasTable HeightBiasTable::fit(const std::vector<std::pair<std::string, HeightSample>>& samples,
                                     std::size_t min_camera_samples) {
    std::vector<HeightSample> all;
    std::map<std::string, std::vector<HeightSample>> grouped;
    all.reserve(samples.size());
    for (const auto& [camera_id, sample] : samples) {
        all.push_back(sample);
        grouped[camera_id].push_back(sample);
    }
    HeightBiasTable table;
    table.global_ = fit_height_bias(all);
    for (const auto& [camera_id, group] : grouped) {
        if (group.size() >= min_camera_samples) {
            table.per_camera_.emplace(camera_id, fit_height_bias(group));
        }
    }
    return table;
}

const HeightBias& HeightBiasTable::for_camera(const std::string& camera_id) const {
    auto it = per_camera_.find(camera_id);
    return it == per_camera_.end() ? global_ : it->second;
}

}  // namespace softbio
