// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "support.hpp"

#include "softbio/body_regions.hpp"
#include "softbio/commands.hpp"
#include "softbio/engine.hpp"
#include "softbio/evaluation.hpp"
#include "softbio/jsonl.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace softbio;
using namespace testsupport;

namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---------------------------------------------------------------------------

Verdict geometry_round_trip() {
    Clock clock;
    std::mt19937_64 rng(1001);
    double ground_err = 0.0, pixel_err = 0.0;
    for (int i = 0; i < 500; ++i) {
        const CameraModel cam = random_camera(rng, 0.1, 0.01);
        for (int k = 0; k < 4; ++k) {
            // Sample inside the image so the distortion model stays in its valid range.
            ImagePoint px;
            WorldPoint g;
            for (;;) {
                g = ground_point_at(cam, uniform(rng, 3.0, 25.0), uniform(rng, -6.0, 6.0));
                px = project(cam, g);
                if (px.u >= 0 && px.u < cam.image_width && px.v >= 0 && px.v < cam.image_height) break;
            }
            const WorldPoint back = backproject_ground(cam, undistort(cam, px));
            ground_err = std::max({ground_err, std::abs(back.x - g.x), std::abs(back.y - g.y), std::abs(back.f)});

            const ImagePoint q{uniform(rng, 0, cam.image_width), uniform(rng, 0, cam.image_height)};
            const ImagePoint there = distort(cam, undistort(cam, q));
            const ImagePoint back_again = undistort(cam, distort(cam, q));
            pixel_err = std::max({pixel_err, std::abs(there.u - q.u), std::abs(there.v - q.v),
                                  std::abs(back_again.u - q.u), std::abs(back_again.v - q.v)});
        }
    }
    const double t = clock.seconds();
    return {ground_err < 1e-6 && pixel_err < 1e-6 && t < 5.0,
            fmt("max ground error %.2e m, max undistort error %.2e px, %.2f s", ground_err, pixel_err, t)};
}

Verdict height_recovery() {
    Clock clock;
    std::mt19937_64 rng(1002);
    double worst = 0.0;
    int cases = 0;
    while (cases < 1000) {
        const CameraModel cam = random_camera(rng, 0.1, 0.01);
        const double h = uniform(rng, 0.5, 2.5);
        const WorldPoint feet = ground_point_at(cam, uniform(rng, 2.0, 20.0), uniform(rng, -2.0, 2.0));
        const WorldPoint head{feet.x, feet.y, h};
        if (camera_frame(cam, head).z() <= 0.1 || camera_frame(cam, feet).z() <= 0.1) continue;
        const ImagePoint hp = project(cam, head), fp = project(cam, feet);
        auto inside = [&](const ImagePoint& p) {
            return p.u >= 0 && p.u < cam.image_width && p.v >= 0 && p.v < cam.image_height;
        };
        if (!inside(hp) || !inside(fp)) continue;
        const double est = estimate_height(cam, undistort(cam, hp), undistort(cam, fp));
        worst = std::max(worst, std::abs(est - h));
        ++cases;
    }

    const CameraModel cam = look_down_camera("mc", 1280, 720, 1000.0, 4.0, 20.0);
    const WorldPoint feet = ground_point_at(cam, 8.0);
    const ImagePoint hp = project(cam, {feet.x, feet.y, 1.70}), fp = project(cam, feet);
    double abs_sum = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const ImagePoint hn{hp.u + uniform(rng, -1, 1), hp.v + uniform(rng, -1, 1)};
        const ImagePoint fn{fp.u + uniform(rng, -1, 1), fp.v + uniform(rng, -1, 1)};
        abs_sum += std::abs(estimate_height(cam, hn, fn) - 1.70);
    }
    const double mae = abs_sum / 1000.0;
    const double t = clock.seconds();
    return {worst < 1e-6 && mae < 0.03 && t < 10.0,
            fmt("noiseless max error %.2e m over %d persons, 1 px noise MAE %.4f m at 8 m, %.2f s", worst, cases, mae,
                t)};
}

Verdict bias_correction() {
    std::mt19937_64 rng(1003);
    const std::vector<CameraModel> cams = {look_down_camera("c1", 1280, 720, 1000.0, 4.0, 20.0),
                                           look_down_camera("c2", 1280, 720, 800.0, 3.0, 15.0),
                                           look_down_camera("c3", 1280, 720, 1200.0, 6.0, 30.0)};
    constexpr double kHeadOffset = 0.04;
    auto observe = [&](const CameraModel& cam, double h) {
        const WorldPoint feet = ground_point_at(cam, uniform(rng, 6.0, 15.0), uniform(rng, -2.0, 2.0));
        // Automated head points sit systematically above the true head.
        ImagePoint hp = project(cam, {feet.x, feet.y, h + kHeadOffset});
        ImagePoint fp = project(cam, feet);
        hp.u += uniform(rng, -0.5, 0.5);
        hp.v += uniform(rng, -0.5, 0.5);
        fp.u += uniform(rng, -0.5, 0.5);
        fp.v += uniform(rng, -0.5, 0.5);
        return estimate_height(cam, hp, fp);
    };
    std::vector<std::pair<std::string, HeightSample>> train;
    for (int i = 0; i < 300; ++i) {
        const CameraModel& cam = cams[static_cast<std::size_t>(i) % cams.size()];
        const double h = uniform(rng, 1.5, 1.95);
        train.push_back({cam.id, {observe(cam, h), h}});
    }
    const HeightBiasTable table = HeightBiasTable::fit(train);
    double worst_bias_dev = 0.0;
    for (const auto& cam : cams) worst_bias_dev = std::max(worst_bias_dev, std::abs(table.for_camera(cam.id).bias - kHeadOffset));

    double raw = 0.0, corrected = 0.0;
    const int n = 300;
    for (int i = 0; i < n; ++i) {
        const CameraModel& cam = cams[static_cast<std::size_t>(i) % cams.size()];
        const double h = uniform(rng, 1.5, 1.95);
        const double est = observe(cam, h);
        raw += est - h;
        corrected += corrected_height(est, table.for_camera(cam.id)) - h;
    }
    raw /= n;
    corrected /= n;
    return {worst_bias_dev <= 0.005 && std::abs(corrected) < 0.01,
            fmt("global bias %.4f m, worst per-camera deviation %.4f m, test mean error raw %.4f m, corrected %.4f m",
                table.global().bias, worst_bias_dev, raw, corrected)};
}

Verdict iou_exactness() {
    Clock clock;
    std::mt19937_64 rng(1004);
    int mismatches = 0, asymmetric = 0, self_fail = 0;
    for (int i = 0; i < 1000; ++i) {
        const BoundingBox a{uniform_int(rng, -30, 60), uniform_int(rng, -30, 60), uniform_int(rng, 1, 50),
                            uniform_int(rng, 1, 50)};
        const BoundingBox b{uniform_int(rng, -30, 60), uniform_int(rng, -30, 60), uniform_int(rng, 1, 50),
                            uniform_int(rng, 1, 50)};
        if (iou(a, b) != raster_iou(a, b)) ++mismatches;
        if (iou(a, b) != iou(b, a)) ++asymmetric;
        if (iou(a, a) != 1.0 || iou(b, b) != 1.0) ++self_fail;
    }
    const double t = clock.seconds();
    return {mismatches == 0 && asymmetric == 0 && self_fail == 0 && t < 5.0,
            fmt("1000 pairs: %d oracle mismatches, %d asymmetric, %d self-IoU failures, %.2f s", mismatches, asymmetric,
                self_fail, t)};
}

/// Random description drawn from the target's own attributes; at least one
/// field is populated.
SemanticDescription describe(std::mt19937_64& rng, const OraclePerson& target, const AttributeVocabulary& vocab) {
    SemanticDescription d;
    while (d.empty()) {
        if (uniform(rng, 0, 1) < 0.5) d.height_class = vocab.classify_height(target.height)->label;
        if (uniform(rng, 0, 1) < 0.5) d.torso_primary_color = target.labels.at(AttributeFamily::TorsoColor);
        if (uniform(rng, 0, 1) < 0.4) d.torso_type = target.labels.at(AttributeFamily::TorsoType);
        if (uniform(rng, 0, 1) < 0.4) d.torso_pattern = target.labels.at(AttributeFamily::TorsoPattern);
        if (uniform(rng, 0, 1) < 0.5) d.leg_primary_color = target.labels.at(AttributeFamily::LegColor);
        if (uniform(rng, 0, 1) < 0.4) d.leg_pattern = target.labels.at(AttributeFamily::LegPattern);
        if (uniform(rng, 0, 1) < 0.4) d.gender = target.labels.at(AttributeFamily::Gender);
    }
    return d;
}

Verdict cascade_correctness() {
    const auto vocab = AttributeVocabulary::defaults();
    const std::string root = temp_dir("acceptance_synth");
    std::ostringstream out, err;
    GlobalOptions global;
    const int synth_rc = cmd_synth(global, {std::string(SOFTBIO_SOURCE_DIR) + "/config/synth_demo.json", root}, out, err);
    EvalCommandOptions eval;
    eval.dataset_root = root;
    eval.output_dir = root + "/report";
    const int eval_rc = synth_rc == 0 ? cmd_eval(global, eval, out, err) : -1;
    double avg = -1.0, over = -1.0;
    std::size_t sequences = 0;
    if (eval_rc == 0) {
        const json report = json::parse(read_file(root + "/report/report.json"));
        avg = report["average_iou"].get<double>();
        over = report["percent_over_04"].get<double>();
        sequences = report["sequences"].size();
    }

    std::mt19937_64 rng(1005);
    int agree = 0, scenes = 0;
    while (scenes < 100) {
        const int n = uniform_int(rng, 2, 10);
        std::vector<OraclePerson> people;
        for (int i = 0; i < n; ++i) people.push_back(random_person(rng, vocab, "p" + std::to_string(i), 3));
        const std::size_t target = static_cast<std::size_t>(uniform_int(rng, 0, n - 1));
        const SemanticDescription desc = describe(rng, people[target], vocab);
        const auto expected = brute_force_matches(people, desc, vocab, CascadeConfig{}.height_slack);
        if (expected.size() != 1) continue;  // the description must single out the target
        ++scenes;
        const OracleScene scene = make_oracle_scene(people, vocab);
        const CascadeEngine engine(vocab, scene.registry(), {});
        const RetrievalResult r = engine.run(scene.frame, desc, scene.camera, {});
        if (r.retrieved == expected.front()) ++agree;
    }
    return {avg == 1.0 && over == 1.0 && sequences == 5 && agree == 100,
            fmt("synthetic eval over %zu sequences: Average IoU %.6f, %%w IoU>0.4 %.6f; brute-force agreement %d/%d",
                sequences, avg, over, agree, scenes) +
                (err.str().empty() ? "" : " (" + err.str() + ")")};
}

/// Scene with continuous random scores, some unavailable scores and some
/// candidates whose height cannot be measured.
struct NoisyScene {
    OracleScene scene;
    SemanticDescription desc;
    std::map<std::pair<std::string, AttributeFamily>, bool> available;
};

NoisyScene noisy_scene(std::mt19937_64& rng, const AttributeVocabulary& vocab, bool complete = false) {
    std::mt19937_64 local(rng());
    const int n = uniform_int(local, 1, 8);
    std::vector<OraclePerson> people;
    for (int i = 0; i < n; ++i) people.push_back(random_person(local, vocab, "c" + std::to_string(i), 4));
    NoisyScene ns;
    ns.scene = make_oracle_scene(people, vocab);
    ns.scene.backend = std::make_shared<PrecomputedBackend>(vocab);
    for (auto& c : ns.scene.frame.candidates) {
        if (!complete && uniform(local, 0, 1) < 0.15) {
            // Head and feet on the horizon row: height unobservable.
            c.feet = ImagePoint{c.feet->u, -1e4};
            c.head = ImagePoint{c.feet->u, -1e4 - 10};
        }
        for (auto family : kAllFamilies) {
            const bool have = complete || uniform(local, 0, 1) > 0.15;
            ns.available[{c.candidate_id, family}] = have;
            std::vector<double> s(vocab.labels(family).size());
            for (auto& v : s) v = uniform(local, 0.0, 1.0);
            if (!have) continue;
            ns.scene.backend->add("seq", 0, c.candidate_id, family, s);
        }
    }
    ns.desc = describe(local, people[static_cast<std::size_t>(uniform_int(local, 0, n - 1))], vocab);
    return ns;
}

Verdict cascade_invariants() {
    const auto vocab = AttributeVocabulary::defaults();
    std::mt19937_64 rng(1006);
    constexpr int kCases = 250;
    int monotone_fail = 0, determinism_fail = 0, fail_open_fail = 0, scaling_fail = 0, scaling_cases = 0;
    for (int i = 0; i < kCases; ++i) {
        const NoisyScene ns = noisy_scene(rng, vocab);
        const CascadeEngine engine(vocab, ns.scene.registry(), {});
        const RetrievalResult r = engine.run(ns.scene.frame, ns.desc, ns.scene.camera, {});

        // Monotone narrowing and chained inputs.
        std::vector<std::string> expected_input;
        for (const auto& c : ns.scene.frame.candidates) expected_input.push_back(c.candidate_id);
        bool ok = r.trace.stages.size() == 7;
        for (const auto& st : r.trace.stages) {
            ok = ok && st.input == expected_input && st.kept.size() <= st.input.size();
            for (const auto& k : st.kept) ok = ok && std::find(st.input.begin(), st.input.end(), k) != st.input.end();
            expected_input = st.kept;
        }
        if (!ok) ++monotone_fail;

        // Determinism: rerun on the same engine and on a fresh one.
        const NoisyScene again = ns;
        const CascadeEngine fresh(vocab, again.scene.registry(), {});
        const std::string a = to_json(r).dump();
        if (to_json(engine.run(ns.scene.frame, ns.desc, ns.scene.camera, {})).dump() != a ||
            to_json(fresh.run(again.scene.frame, again.desc, again.scene.camera, {})).dump() != a) {
            ++determinism_fail;
        }

        // Fail-open: every removal is an explicit mismatch backed by data.
        for (const auto& st : r.trace.stages) {
            for (const auto& d : st.decisions) {
                if (d.kept) continue;
                bool explicit_mismatch = false;
                if (st.stage == Stage::Height) {
                    explicit_mismatch = d.reason == "out_of_range" && d.corrected_height.has_value();
                } else {
                    explicit_mismatch = d.reason == "mismatch" && d.score.has_value() &&
                                        ns.available.at({d.candidate_id, *stage_family(st.stage)});
                }
                if (!explicit_mismatch) ++fail_open_fail;
            }
        }
    }

    // Scaling: threshold 0 keeps every scored candidate, so scaling all score
    // vectors by a common c must keep the argmax.
    CascadeConfig keep_all;
    keep_all.default_threshold = 0.0;
    for (int i = 0; i < kCases; ++i) {
        const NoisyScene base = noisy_scene(rng, vocab, true);
        const double c = uniform(rng, 0.05, 1.0);
        NoisyScene scaled = base;
        scaled.scene.backend = std::make_shared<PrecomputedBackend>(vocab);
        for (const auto& cand : base.scene.frame.candidates) {
            for (auto family : kAllFamilies) {
                const CandidateContext ctx{"seq", 0, &cand};
                auto s = base.scene.backend->score(ctx, family, nullptr);
                if (!s) continue;
                for (auto& v : s->scores) v *= c;
                scaled.scene.backend->add("seq", 0, cand.candidate_id, family, s->scores);
            }
        }
        const CascadeEngine e1(vocab, base.scene.registry(), keep_all);
        const CascadeEngine e2(vocab, scaled.scene.registry(), keep_all);
        const RetrievalResult r1 = e1.run(base.scene.frame, base.desc, base.scene.camera, {});
        const RetrievalResult r2 = e2.run(scaled.scene.frame, scaled.desc, scaled.scene.camera, {});
        ++scaling_cases;
        if (r1.retrieved != r2.retrieved || r1.trace.finalists != r2.trace.finalists) ++scaling_fail;
    }
    return {monotone_fail == 0 && determinism_fail == 0 && fail_open_fail == 0 && scaling_fail == 0,
            fmt("%d cases each: monotone failures %d, determinism failures %d, unexplained removals %d, "
                "scaling failures %d/%d",
                kCases, monotone_fail, determinism_fail, fail_open_fail, scaling_fail, scaling_cases)};
}

Verdict band_geometry() {
    std::mt19937_64 rng(1007);
    int failures = 0;
    for (int i = 0; i < 500; ++i) {
        const Bitmap bits = random_silhouette(rng, uniform_int(rng, 8, 40), uniform_int(rng, 30, 120));
        const PersonCandidate c = candidate_from_bitmap("s", bits, uniform_int(rng, 0, 5), uniform_int(rng, 0, 5));
        Image frame(c.bbox.x + bits.width, c.bbox.y + bits.height);
        // Encode each pixel's mask position in its color.
        for (int row = 0; row < bits.height; ++row)
            for (int col = 0; col < bits.width; ++col)
                frame.set(c.bbox.x + col, c.bbox.y + row,
                          {static_cast<std::uint8_t>(col), static_cast<std::uint8_t>(row), 255});
        const auto torso = band_rows(c, RegionBand::torso());
        const auto legs = band_rows(c, RegionBand::legs());
        if (torso.second > legs.first) ++failures;
        for (const auto& [band, rows] : {std::pair{RegionBand::torso(), torso}, std::pair{RegionBand::legs(), legs}}) {
            std::size_t fg = 0;
            for (int row = rows.first; row < rows.second; ++row)
                for (int col = 0; col < bits.width; ++col) fg += bits.at(col, row);
            if (fg == 0) continue;
            const Patch p = extract_patch(c, frame, band);
            if (p.valid_count() != fg) ++failures;
            for (int row = 0; row < p.height; ++row) {
                for (int col = 0; col < p.width; ++col) {
                    if (!p.is_valid(col, row)) continue;
                    const Rgb px = p.at(col, row);
                    const int mc = px[0], mr = px[1];
                    if (mr < rows.first || mr >= rows.second || !bits.at(mc, mr)) ++failures;
                }
            }
        }
    }
    return {failures == 0, fmt("500 silhouettes: %d subset or disjointness violations", failures)};
}

Verdict augmentation_count() {
    std::mt19937_64 rng(1008);
    const AugmentConfig cfg;
    std::vector<Patch> inputs;
    for (int i = 0; i < 20; ++i) {
        Patch p(uniform_int(rng, 2, 30), uniform_int(rng, 2, 30));
        for (int row = 0; row < p.height; ++row)
            for (int col = 0; col < p.width; ++col)
                p.set(col, row,
                      {static_cast<std::uint8_t>(uniform_int(rng, 0, 255)),
                       static_cast<std::uint8_t>(uniform_int(rng, 0, 255)),
                       static_cast<std::uint8_t>(uniform_int(rng, 0, 255))},
                      uniform(rng, 0, 1) < 0.8);
        inputs.push_back(p);
    }
    const auto out = augment_patches(inputs, cfg);
    std::vector<int> per_input(inputs.size(), 0);
    for (const auto& a : out) ++per_input[a.source];
    const bool counts = std::all_of(per_input.begin(), per_input.end(), [](int n) { return n == 14; });
    int identity_fail = 0;
    for (const auto& p : inputs) {
        if (!(flip_horizontal(flip_horizontal(p)) == p)) ++identity_fail;
        if (!(flip_vertical(flip_vertical(p)) == p)) ++identity_fail;
        if (!(apply_gamma(p, 1.0) == p)) ++identity_fail;
    }
    return {counts && out.size() == 14 * inputs.size() && identity_fail == 0,
            fmt("%zu outputs for %zu inputs, %d involution or identity failures", out.size(), inputs.size(),
                identity_fail)};
}

Verdict difficulty_reporting() {
    const char* names[] = {"very_easy", "easy", "medium", "hard"};
    const int counts[] = {6, 13, 12, 10};
    json spec = {{"write_images", false},
                 {"cameras",
                  {{{"id", "cam"}, {"image_width", 640}, {"image_height", 480}, {"focal", 600},
                    {"mount_height", 3.0}, {"tilt_deg", 15}}}}};
    json sequences = json::array();
    int id = 0;
    for (int d = 0; d < 4; ++d) {
        for (int i = 0; i < counts[d]; ++i, ++id) {
            const std::string torso = (id % 2) ? "red" : "green";
            sequences.push_back(
                {{"sequence_id", fmt("s%02d", id)},
                 {"camera_id", "cam"},
                 {"difficulty", names[d]},
                 {"frames", 32},
                 {"target", id % 2},
                 {"seed", 500 + id},
                 {"persons",
                  {{{"position", {-1.0, 8.0}}, {"velocity", {0.0, 0.0}}, {"height", 1.6}, {"torso_color", "red"}},
                   {{"position", {1.0, 8.5}}, {"velocity", {0.0, 0.0}}, {"height", 1.8}, {"torso_color", "green"}}}},
                 {"query", {{"torso_primary_color", torso}}}});
        }
    }
    spec["sequences"] = sequences;
    const std::string root = temp_dir("acceptance_difficulty");
    std::ofstream(root + "/spec.json") << spec.dump(2);
    std::ostringstream out, err;
    GlobalOptions global;
    if (cmd_synth(global, {root + "/spec.json", root + "/data"}, out, err) != 0) return {false, err.str()};
    EvalCommandOptions eval;
    eval.dataset_root = root + "/data";
    eval.output_dir = root + "/r1";
    std::ostringstream out1, out2;
    if (cmd_eval(global, eval, out1, err) != 0) return {false, err.str()};
    eval.output_dir = root + "/r2";
    if (cmd_eval(global, eval, out2, err) != 0) return {false, err.str()};

    const json report = json::parse(read_file(root + "/r1/report.json"));
    bool sizes = report["per_difficulty"].size() == 4;
    std::string got;
    for (std::size_t d = 0; d < report["per_difficulty"].size(); ++d) {
        const int n = report["per_difficulty"][d]["sequences"].get<int>();
        sizes = sizes && n == counts[d] && report["per_difficulty"][d]["difficulty"] == names[d];
        got += (d ? "/" : "") + std::to_string(n);
    }
    bool identical = true;
    for (const char* f : {"report.txt", "sequences.csv", "difficulty.csv", "frames.csv", "report.json"}) {
        identical = identical && read_file(root + "/r1/" + f) == read_file(root + "/r2/" + f);
    }
    identical = identical && out1.str() == out2.str();
    const bool shape = out1.str().find("Average IoU") != std::string::npos &&
                       out1.str().find("%w IoU>0.4") != std::string::npos;
    return {sizes && identical && shape,
            fmt("groups %s over %zu sequences, reruns %s", got.c_str(), report["sequences"].size(),
                identical ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"geometry_round_trip", geometry_round_trip},
        {"height_recovery", height_recovery},
        {"bias_correction", bias_correction},
        {"iou_exactness", iou_exactness},
        {"cascade_correctness", cascade_correctness},
        {"cascade_invariants", cascade_invariants},
        {"band_geometry", band_geometry},
        {"augmentation_count", augmentation_count},
        {"difficulty_reporting", difficulty_reporting},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    }
    return failed ? 1 : 0;
}
