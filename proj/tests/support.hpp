#pragma once

// Shared generators and independent oracles for the test suites.

#include "softbio/attribute_backends.hpp"
#include "softbio/cascade.hpp"
#include "softbio/data_model.hpp"
#include "softbio/geometry.hpp"
#include "softbio/synth.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace testsupport {

using namespace softbio;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// R = I, t = (0, 0, 5), focal 1000, principal (640, 360).
inline CameraModel reference_camera(double k1 = 0.0, double k2 = 0.0) {
    CameraModel cam;
    cam.id = "ref";
    cam.image_width = 1280;
    cam.image_height = 720;
    cam.focal_x = cam.focal_y = 1000.0;
    cam.principal_x = 640.0;
    cam.principal_y = 360.0;
    cam.k1 = k1;
    cam.k2 = k2;
    cam.translation = Eigen::Vector3d(0.0, 0.0, 5.0);
    return cam;
}

/// Elevated camera with random position, yaw, downward pitch and slight roll.
inline CameraModel random_camera(std::mt19937_64& rng, double k1 = 0.0, double k2 = 0.0) {
    CameraModel cam;
    cam.id = "rand";
    cam.image_width = 1280;
    cam.image_height = 720;
    cam.focal_x = uniform(rng, 500.0, 1500.0);
    cam.focal_y = cam.focal_x * uniform(rng, 0.95, 1.05);
    cam.principal_x = uniform(rng, 600.0, 680.0);
    cam.principal_y = uniform(rng, 330.0, 390.0);
    cam.k1 = k1;
    cam.k2 = k2;
    const double yaw = uniform(rng, -M_PI, M_PI);
    const double pitch = uniform(rng, 10.0, 40.0) * M_PI / 180.0;
    const double roll = uniform(rng, -5.0, 5.0) * M_PI / 180.0;
    // Base orientation: camera z along world +y, camera y along world -f.
    Eigen::Matrix3d base;
    base << 1, 0, 0, 0, 0, -1, 0, 1, 0;
    const Eigen::Matrix3d world_yaw = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    const Eigen::Matrix3d cam_pitch = Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()).toRotationMatrix();
    const Eigen::Matrix3d cam_roll = Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    cam.rotation = cam_roll * cam_pitch * base * world_yaw.transpose();
    const Eigen::Vector3d center(uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, 2.5, 8.0));
    cam.translation = -cam.rotation * center;
    return cam;
}

inline Eigen::Vector3d camera_frame(const CameraModel& cam, const WorldPoint& p) {
    return cam.rotation * Eigen::Vector3d(p.x, p.y, p.f) + cam.translation;
}

/// Ground point at distance `range` in front of the camera along its
/// horizontal viewing direction, shifted sideways by `lateral`.
inline WorldPoint ground_point_at(const CameraModel& cam, double range, double lateral = 0.0) {
    const Eigen::Vector3d forward = cam.rotation.row(2).transpose();
    Eigen::Vector2d dir(forward.x(), forward.y());
    dir.normalize();
    const Eigen::Vector2d side(-dir.y(), dir.x());
    const Eigen::Vector3d c = cam.center();
    const Eigen::Vector2d g = Eigen::Vector2d(c.x(), c.y()) + range * dir + lateral * side;
    return {g.x(), g.y(), 0.0};
}

/// Pixel-count IoU: rasterizes both boxes and counts covered pixels.
inline double raster_iou(const BoundingBox& a, const BoundingBox& b) {
    const int x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
    const int x1 = std::max(a.x + a.width, b.x + b.width), y1 = std::max(a.y + a.height, b.y + b.height);
    long long inter = 0, uni = 0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            const bool in_a = x >= a.x && x < a.x + a.width && y >= a.y && y < a.y + a.height;
            const bool in_b = x >= b.x && x < b.x + b.width && y >= b.y && y < b.y + b.height;
            inter += in_a && in_b;
            uni += in_a || in_b;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline Bitmap random_bitmap(std::mt19937_64& rng, int w, int h, double density) {
    Bitmap b(w, h);
    std::bernoulli_distribution bit(density);
    for (auto& v : b.bits) v = bit(rng) ? 1 : 0;
    return b;
}

/// Blob whose per-row extent follows a random walk, with sparse holes. Rows
/// above `top` and below `bottom` stay empty.
inline Bitmap random_silhouette(std::mt19937_64& rng, int w, int h) {
    Bitmap b(w, h);
    const int top = uniform_int(rng, 0, h / 4);
    const int bottom = uniform_int(rng, std::max(top, 3 * h / 4), h - 1);
    int left = w / 3, right = 2 * w / 3;
    for (int row = top; row <= bottom; ++row) {
        left = std::clamp(left + uniform_int(rng, -1, 1), 0, w - 1);
        right = std::clamp(right + uniform_int(rng, -1, 1), left, w - 1);
        for (int col = left; col <= right; ++col) {
            if (uniform(rng, 0, 1) < 0.9) b.set(col, row, 1);
        }
        b.set(left, row, 1);
    }
    return b;
}

inline PersonCandidate candidate_from_bitmap(std::string id, const Bitmap& bits, int x, int y) {
    PersonCandidate c;
    c.candidate_id = std::move(id);
    c.bbox = {x, y, bits.width, bits.height};
    c.mask = encode_mask(bits);
    c.detector_score = 0.9;
    return c;
}

inline PersonCandidate rectangle_candidate(std::string id, BoundingBox box) {
    Bitmap bits(box.width, box.height);
    std::fill(bits.bits.begin(), bits.bits.end(), 1);
    return candidate_from_bitmap(std::move(id), bits, box.x, box.y);
}

/// Labels of one synthetic person, indexed by family, plus its true height.
struct OraclePerson {
    std::string id;
    double height = 1.7;
    std::map<AttributeFamily, std::string> labels;
};

/// Exhaustive matcher: the candidates whose every described attribute equals
/// the query and whose true height lies in the described class widened by
/// `slack`.
inline std::vector<std::string> brute_force_matches(const std::vector<OraclePerson>& people,
                                                    const SemanticDescription& desc,
                                                    const AttributeVocabulary& vocab, double slack) {
    std::vector<std::string> out;
    for (const auto& p : people) {
        bool ok = true;
        if (desc.height_class) {
            const HeightClass* hc = vocab.height_class(*desc.height_class);
            ok = p.height >= hc->min - slack && p.height <= hc->max + slack;
        }
        for (auto family : kAllFamilies) {
            const auto& q = desc.label(family);
            if (q && p.labels.at(family) != *q) ok = false;
        }
        if (ok) out.push_back(p.id);
    }
    return out;
}

/// One frame of oracle people standing on the ground in front of `camera`,
/// with exact head/feet points and one-hot precomputed scores.
struct OracleScene {
    CameraModel camera;
    FrameRecord frame;
    std::vector<OraclePerson> people;
    std::shared_ptr<PrecomputedBackend> backend;

    BackendRegistry registry() const {
        BackendRegistry r;
        for (auto family : kAllFamilies) r.assign(family, backend);
        return r;
    }
};

inline OracleScene make_oracle_scene(std::vector<OraclePerson> people, const AttributeVocabulary& vocab) {
    OracleScene scene;
    scene.camera = look_down_camera("cam", 1280, 720, 1000.0, 4.0, 20.0);
    scene.frame.sequence_id = "seq";
    scene.frame.frame_index = 0;
    scene.frame.camera_id = "cam";
    scene.backend = std::make_shared<PrecomputedBackend>(vocab);
    for (std::size_t i = 0; i < people.size(); ++i) {
        const OraclePerson& p = people[i];
        const double lateral = -3.0 + 1.2 * static_cast<double>(i % 6);
        const double range = 9.0 + 1.5 * static_cast<double>(i / 6);
        const WorldPoint feet = ground_point_at(scene.camera, range, lateral);
        const ImagePoint fp = project(scene.camera, feet);
        const ImagePoint hp = project(scene.camera, {feet.x, feet.y, p.height});
        const int top = static_cast<int>(std::floor(hp.v));
        const int h = std::max(1, static_cast<int>(std::ceil(fp.v)) - top);
        PersonCandidate c = rectangle_candidate(p.id, {static_cast<int>(fp.u) - 10, top, 20, h});
        c.head = hp;
        c.feet = fp;
        scene.frame.candidates.push_back(std::move(c));
        for (auto family : kAllFamilies) {
            const auto& labels = vocab.labels(family);
            std::vector<double> scores(labels.size(), 0.0);
            scores[*vocab.index_of(family, p.labels.at(family))] = 1.0;
            scene.backend->add("seq", 0, p.id, family, scores);
        }
    }
    scene.people = std::move(people);
    return scene;
}

/// Person with labels drawn uniformly from the vocabulary and a height
/// away from the class boundaries.
inline OraclePerson random_person(std::mt19937_64& rng, const AttributeVocabulary& vocab, std::string id,
                                  std::size_t label_pool = 0) {
    OraclePerson p;
    p.id = std::move(id);
    static constexpr double kHeights[] = {1.35, 1.42, 1.58, 1.62, 1.78, 1.82, 1.98, 2.05};
    p.height = kHeights[uniform_int(rng, 0, 7)];
    for (auto family : kAllFamilies) {
        const auto& labels = vocab.labels(family);
        const int n = static_cast<int>(label_pool ? std::min(label_pool, labels.size()) : labels.size());
        p.labels[family] = labels[static_cast<std::size_t>(uniform_int(rng, 0, n - 1))];
    }
    return p;
}

inline std::string temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("softbio_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace testsupport
