#include "doctest.h"
#include "support.hpp"

#include "softbio/error.hpp"
#include "softbio/geometry.hpp"

#include <string>

using namespace softbio;
using namespace testsupport;

namespace {

GeometryError::Kind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const GeometryError& e) {
        return e.kind();
    }
    FAIL("expected a GeometryError");
    return GeometryError::Kind::NonConvergence;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("optical axis point maps to the principal point") {
    const ImagePoint p = project(reference_camera(), {0.0, 0.0, 0.0});
    CHECK(p.u == doctest::Approx(640.0));
    CHECK(p.v == doctest::Approx(360.0));
}

TEST_CASE("pinhole projection off axis") {
    const ImagePoint p = project(reference_camera(), {0.5, 0.0, 0.0});
    CHECK(p.u == doctest::Approx(740.0).epsilon(1e-12));
    CHECK(p.v == doctest::Approx(360.0));
}

TEST_CASE("radial distortion matches the polynomial evaluated by hand") {
    // x_n = 0.1, r^2 = 0.01, factor 1 + 0.1 * 0.01 = 1.001.
    const ImagePoint p = project(reference_camera(0.1), {0.5, 0.0, 0.0});
    CHECK(p.u == doctest::Approx(740.1).epsilon(1e-12));
    CHECK(p.v == doctest::Approx(360.0));

    const ImagePoint q = project(reference_camera(0.1, 0.01), {0.5, 0.5, 0.0});
    // x_n = y_n = 0.1, r^2 = 0.02, factor 1 + 0.1*0.02 + 0.01*0.0004 = 1.002004.
    CHECK(q.u == doctest::Approx(640.0 + 100.2004).epsilon(1e-12));
    CHECK(q.v == doctest::Approx(360.0 + 100.2004).epsilon(1e-12));
}

TEST_CASE("points behind the camera are rejected") {
    CHECK(kind_of([] { project(reference_camera(), {0.0, 0.0, -6.0}); }) == GeometryError::Kind::BehindCamera);
    CHECK_THROWS_WITH(project(reference_camera(), {0.0, 0.0, -5.0}), "behind camera");
}

TEST_CASE("undistort is the identity without distortion") {
    std::mt19937_64 rng(11);
    const CameraModel cam = reference_camera();
    for (int i = 0; i < 100; ++i) {
        const ImagePoint p{uniform(rng, -100, 1400), uniform(rng, -100, 800)};
        const ImagePoint q = undistort(cam, p);
        CHECK(q.u == p.u);
        CHECK(q.v == p.v);
    }
}

TEST_CASE("principal point is a fixed point of undistortion") {
    for (double k1 : {-0.3, 0.0, 0.1, 0.4}) {
        const CameraModel cam = reference_camera(k1, 0.05);
        const ImagePoint q = undistort(cam, {640.0, 360.0});
        CHECK(q.u == 640.0);
        CHECK(q.v == 360.0);
    }
}

TEST_CASE("distort(undistort(p)) round trip on in-frame points") {
    std::mt19937_64 rng(12);
    const CameraModel cam = reference_camera(0.1, 0.01);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const ImagePoint p{uniform(rng, 0, cam.image_width), uniform(rng, 0, cam.image_height)};
        const ImagePoint back = distort(cam, undistort(cam, p));
        worst = std::max({worst, std::abs(back.u - p.u), std::abs(back.v - p.v)});
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("undistortion fails loudly outside the convergent regime") {
    CameraModel cam = reference_camera(-0.5, 0.5);
    cam.focal_x = cam.focal_y = 100.0;
    CHECK(kind_of([&] { undistort(cam, {100000.0, 100000.0}); }) == GeometryError::Kind::NonConvergence);
}

TEST_CASE("ground back-projection inverts projection") {
    const CameraModel cam = look_down_camera("c", 1280, 720, 1000.0, 4.0, 25.0);
    const WorldPoint g = backproject_ground(cam, project(cam, {1.0, 2.0, 0.0}));
    CHECK(std::abs(g.x - 1.0) < 1e-9);
    CHECK(std::abs(g.y - 2.0) < 1e-9);
    CHECK(g.f == 0.0);
}

TEST_CASE("ground round trip on random cameras") {
    std::mt19937_64 rng(13);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        const CameraModel cam = random_camera(rng);
        cam.validate();
        const WorldPoint p = ground_point_at(cam, uniform(rng, 3.0, 10.0), uniform(rng, -4.0, 4.0));
        const WorldPoint q = backproject_ground(cam, project(cam, p));
        worst = std::max({worst, std::abs(q.x - p.x), std::abs(q.y - p.y)});
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("horizon pixels are degenerate and sky pixels lie behind the camera") {
    const CameraModel level = look_down_camera("c", 1280, 720, 1000.0, 3.0, 0.0);
    CHECK(kind_of([&] { backproject_ground(level, {640.0, 360.0}); }) == GeometryError::Kind::DegenerateRay);
    CHECK_THROWS_WITH(backproject_ground(level, {100.0, 360.0}), "degenerate ray");
    CHECK(kind_of([&] { backproject_ground(level, {640.0, 200.0}); }) == GeometryError::Kind::BehindCamera);
}

TEST_CASE("height of a noiseless synthetic person") {
    const CameraModel cam = look_down_camera("c", 1280, 720, 1000.0, 4.0, 20.0);
    const WorldPoint feet{0.3, 8.0, 0.0};
    const double h = estimate_height(cam, project(cam, {0.3, 8.0, 1.70}), project(cam, feet));
    CHECK(std::abs(h - 1.70) < 1e-6);
}

TEST_CASE("exact height recovery over heights and ranges") {
    std::mt19937_64 rng(14);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        const CameraModel cam = random_camera(rng);
        const double height = uniform(rng, 0.5, 2.5);
        const WorldPoint feet = ground_point_at(cam, uniform(rng, 2.0, 20.0), uniform(rng, -1.0, 1.0));
        if (camera_frame(cam, {feet.x, feet.y, height}).z() <= 0.1) continue;
        const double est =
            estimate_height(cam, project(cam, {feet.x, feet.y, height}), project(cam, feet));
        worst = std::max(worst, std::abs(est - height));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("head on feet gives zero height") {
    const CameraModel cam = look_down_camera("c", 1280, 720, 1000.0, 4.0, 20.0);
    const ImagePoint feet = project(cam, {0.0, 6.0, 0.0});
    CHECK(std::abs(estimate_height(cam, feet, feet)) < 1e-12);
}

TEST_CASE("height is unobservable when the camera sits on the vertical through the feet") {
    CameraModel cam;
    cam.id = "nadir";
    cam.image_width = 640;
    cam.image_height = 480;
    cam.focal_x = cam.focal_y = 500.0;
    cam.principal_x = 320.0;
    cam.principal_y = 240.0;
    // Looking straight down from 5 m above the origin.
    cam.rotation << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    cam.translation = -cam.rotation * Eigen::Vector3d(0.0, 0.0, 5.0);
    const ImagePoint p = project(cam, {0.0, 0.0, 0.0});
    CHECK(kind_of([&] { estimate_height(cam, p, p); }) == GeometryError::Kind::UnobservableHeight);
}

TEST_CASE("height is invariant to a common focal rescale with re-projected pixels") {
    CameraModel a = look_down_camera("c", 1280, 720, 800.0, 3.5, 18.0);
    CameraModel b = a;
    b.focal_x *= 1.7;
    b.focal_y *= 1.7;
    const WorldPoint feet{-0.4, 9.0, 0.0}, head{-0.4, 9.0, 1.83};
    const double ha = estimate_height(a, project(a, head), project(a, feet));
    const double hb = estimate_height(b, project(b, head), project(b, feet));
    CHECK(std::abs(ha - hb) < 1e-9);
}

TEST_CASE("one pixel noise at eight meters stays within the Monte-Carlo tolerance") {
    const CameraModel cam = look_down_camera("c", 1280, 720, 1000.0, 4.0, 20.0);
    std::mt19937_64 rng(15);
    double total = 0.0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i) {
        const double h = uniform(rng, 1.5, 1.9);
        ImagePoint head = project(cam, {0.0, 8.0, h});
        ImagePoint feet = project(cam, {0.0, 8.0, 0.0});
        head.u += uniform(rng, -1, 1);
        head.v += uniform(rng, -1, 1);
        feet.u += uniform(rng, -1, 1);
        feet.v += uniform(rng, -1, 1);
        total += std::abs(estimate_height(cam, head, feet) - h);
    }
    CHECK(total / trials < 0.03);
}

TEST_CASE("bias fitting examples") {
    const HeightBias zero = fit_height_bias({{1.80, 1.80}});
    CHECK(zero.bias == 0.0);
    CHECK(zero.sample_count == 1);
    const HeightBias tenth = fit_height_bias({{1.80, 1.70}, {1.90, 1.80}});
    CHECK(tenth.bias == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(tenth.sample_count == 2);
    CHECK_THROWS_WITH(fit_height_bias({}), "no samples");
}

TEST_CASE("corrected height subtracts the bias and clamps at zero") {
    CHECK(corrected_height(1.80, {0.0, 1}) == doctest::Approx(1.80));
    CHECK(corrected_height(1.80, {0.10, 2}) == doctest::Approx(1.70));
    CHECK(corrected_height(0.05, {0.10, 2}) == 0.0);
}

TEST_CASE("corrected training estimates have zero mean error") {
    std::mt19937_64 rng(16);
    std::vector<HeightSample> samples;
    for (int i = 0; i < 200; ++i) {
        const double ann = uniform(rng, 1.4, 2.0);
        samples.push_back({ann + 0.03 + uniform(rng, -0.02, 0.02), ann});
    }
    const HeightBias bias = fit_height_bias(samples);
    double err = 0.0;
    for (const auto& s : samples) err += corrected_height(s.estimated, bias) - s.annotated;
    CHECK(std::abs(err / samples.size()) < 1e-12);
}

TEST_CASE("per-camera bias table falls back to the global bias") {
    std::vector<std::pair<std::string, HeightSample>> samples;
    for (int i = 0; i < 6; ++i) samples.push_back({"a", {1.9, 1.8}});
    for (int i = 0; i < 2; ++i) samples.push_back({"b", {1.7, 1.8}});
    const HeightBiasTable table = HeightBiasTable::fit(samples);
    CHECK(table.for_camera("a").bias == doctest::Approx(0.1));
    CHECK(table.for_camera("a").sample_count == 6);
    // Global: (6 * 0.1 - 2 * 0.1) / 8.
    CHECK(table.global().bias == doctest::Approx(0.05));
    CHECK(table.for_camera("b").bias == doctest::Approx(0.05));
    CHECK(table.for_camera("unseen").sample_count == 8);
}

TEST_CASE("calibration text round trips bit-exactly") {
    std::mt19937_64 rng(17);
    const CameraModel cam = random_camera(rng, 0.03, -0.002);
    const CameraModel back = parse_calibration(format_calibration(cam));
    CHECK(back.id == cam.id);
    CHECK(back.focal_x == cam.focal_x);
    CHECK(back.principal_y == cam.principal_y);
    CHECK(back.k1 == cam.k1);
    CHECK(back.k2 == cam.k2);
    CHECK(back.rotation == cam.rotation);
    CHECK(back.translation == cam.translation);
}

TEST_CASE("calibration errors carry the line number") {
    const std::string good = format_calibration(look_down_camera("c", 640, 480, 500.0, 3.0, 10.0));
    SUBCASE("non-orthonormal rotation") {
        std::string text = good;
        const auto at = text.find("rotation =");
        text.replace(at, text.find('\n', at) - at, "rotation = 1 0 0 0 2 0 0 0 1");
        CHECK_THROWS_WITH(parse_calibration(text, "cam.calib"), "cam.calib:12: rotation is not orthonormal");
    }
    SUBCASE("unknown key") {
        CHECK_THROWS_WITH(parse_calibration(good + "skew = 0\n", "cam.calib"), "cam.calib:14: unknown key 'skew'");
    }
    SUBCASE("bad number") {
        std::string text = good;
        const auto at = text.find("focal_x =");
        text.replace(at, text.find('\n', at) - at, "focal_x = abc");
        CHECK_THROWS_WITH(parse_calibration(text, "cam.calib"), "cam.calib:6: 'focal_x': invalid number 'abc'");
    }
    SUBCASE("negative focal") {
        std::string text = good;
        const auto at = text.find("focal_y =");
        text.replace(at, text.find('\n', at) - at, "focal_y = -1");
        CHECK_THROWS_WITH(parse_calibration(text, "cam.calib"), "cam.calib:7: focal_y must be positive");
    }
    SUBCASE("missing key") {
        std::string text = good;
        const auto at = text.find("translation =");
        text.erase(at);
        CHECK_THROWS_AS(parse_calibration(text, "cam.calib"), ParseError);
    }
}

}  // TEST_SUITE
