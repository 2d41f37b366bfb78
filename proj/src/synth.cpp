#include "softbio/synth.hpp"

#include "softbio/error.hpp"
#include "softbio/jsonl.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace fs = std::filesystem;

namespace softbio {

CameraModel look_down_camera(std::string id, int width, int height, double focal, double mount_height,
                             double tilt_deg, double k1, double k2) {
    CameraModel cam;
    cam.id = std::move(id);
    cam.image_width = width;
    cam.image_height = height;
    cam.focal_x = focal;
    cam.focal_y = focal;
    cam.principal_x = width / 2.0;
    cam.principal_y = height / 2.0;
    cam.k1 = k1;
    cam.k2 = k2;
    const double t = tilt_deg * M_PI / 180.0;
    const Eigen::Vector3d right(1.0, 0.0, 0.0);
    const Eigen::Vector3d forward(0.0, std::cos(t), -std::sin(t));
    const Eigen::Vector3d down = forward.cross(right);
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation = -cam.rotation * Eigen::Vector3d(0.0, 0.0, mount_height);
    return cam;
}

namespace {

WorldPoint read_xy(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ParseError("expected [x, y]");
    return {j.at(0).get<double>(), j.at(1).get<double>(), 0.0};
}

CameraModel read_camera(const json& j) {
    const std::string id = j.at("id").get<std::string>();
    if (j.contains("rotation")) {
        CameraModel cam;
        cam.id = id;
        cam.image_width = j.at("image_width").get<int>();
        cam.image_height = j.at("image_height").get<int>();
        cam.focal_x = j.at("focal_x").get<double>();
        cam.focal_y = j.at("focal_y").get<double>();
        cam.principal_x = j.at("principal_x").get<double>();
        cam.principal_y = j.at("principal_y").get<double>();
        cam.k1 = j.value("k1", 0.0);
        cam.k2 = j.value("k2", 0.0);
        const auto r = j.at("rotation").get<std::vector<double>>();
        const auto t = j.at("translation").get<std::vector<double>>();
        if (r.size() != 9 || t.size() != 3) throw ParseError("camera '" + id + "': rotation needs 9 and translation 3 numbers");
        for (int i = 0; i < 9; ++i) cam.rotation(i / 3, i % 3) = r[i];
        cam.translation = Eigen::Vector3d(t[0], t[1], t[2]);
        return cam;
    }
    return look_down_camera(id, j.value("image_width", 640), j.value("image_height", 480), j.value("focal", 600.0),
                            j.value("mount_height", 3.0), j.value("tilt_deg", 15.0), j.value("k1", 0.0),
                            j.value("k2", 0.0));
}

SynthPerson read_person(const json& j) {
    SynthPerson p;
    for (const auto& [key, value] : j.items()) {
        if (key == "position") p.position = read_xy(value);
        else if (key == "velocity") p.velocity = read_xy(value);
        else if (key == "height") p.height = value.get<double>();
        else if (key == "width") p.width = value.get<double>();
        else if (key == "torso_color") p.torso_color = value.get<std::string>();
        else if (key == "leg_color") p.leg_color = value.get<std::string>();
        else if (key == "torso_type") p.torso_type = value.get<std::string>();
        else if (key == "torso_pattern") p.torso_pattern = value.get<std::string>();
        else if (key == "leg_pattern") p.leg_pattern = value.get<std::string>();
        else if (key == "gender") p.gender = value.get<std::string>();
        else throw ParseError("unknown person field '" + key + "'");
    }
    return p;
}

SynthSequence read_sequence(const json& j, const AttributeVocabulary& vocab) {
    SynthSequence s;
    for (const auto& [key, value] : j.items()) {
        if (key == "sequence_id") s.sequence_id = value.get<std::string>();
        else if (key == "camera_id") s.camera_id = value.get<std::string>();
        else if (key == "difficulty") {
            const auto d = difficulty_from_name(value.get<std::string>());
            if (!d) throw ParseError("invalid difficulty '" + value.get<std::string>() + "'");
            s.difficulty = *d;
        } else if (key == "split") {
            const std::string split = value.get<std::string>();
            if (split != "train" && split != "test") throw ParseError("split must be 'train' or 'test'");
            s.split = split == "train" ? Split::Train : Split::Test;
        } else if (key == "frames") s.frames = value.get<int>();
        else if (key == "noise_px") s.noise_px = value.get<double>();
        else if (key == "head_offset_px") s.head_offset_px = value.get<double>();
        else if (key == "target") s.target = value.get<std::size_t>();
        else if (key == "max_occlusion") s.max_occlusion = value.get<double>();
        else if (key == "seed") s.seed = value.get<std::uint64_t>();
        else if (key == "query") s.query = parse_description(value, vocab);
        else if (key == "persons") {
            for (const auto& p : value) s.persons.push_back(read_person(p));
        } else throw ParseError("unknown sequence field '" + key + "'");
    }
    return s;
}

constexpr Rgb kSkin = {224, 172, 105};
constexpr Rgb kBackground = {70, 80, 70};

Rgb stripe_color(int row) {
    static constexpr Rgb stripes[3] = {{230, 25, 25}, {30, 170, 60}, {30, 60, 220}};
    return stripes[(row / 3) % 3];
}

Rgb body_color(const SynthPerson& p, int row, const BoundingBox& box) {
    const double frac = (row - box.y + 0.5) / box.height;
    if (frac < 0.2) return kSkin;
    const std::string& label = frac < 0.5 ? p.torso_color : p.leg_color;
    return label == "multicolour" ? stripe_color(row) : synth_color(label);
}

std::vector<double> one_hot(const std::vector<std::string>& labels, const std::string& label) {
    std::vector<double> v(labels.size(), 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) v[i] = 1.0;
    }
    return v;
}

const std::string& person_label(const SynthPerson& p, AttributeFamily family) {
    switch (family) {
        case AttributeFamily::TorsoColor: return p.torso_color;
        case AttributeFamily::TorsoType: return p.torso_type;
        case AttributeFamily::TorsoPattern: return p.torso_pattern;
        case AttributeFamily::LegColor: return p.leg_color;
        case AttributeFamily::LegPattern: return p.leg_pattern;
        case AttributeFamily::Gender: return p.gender;
    }
    return p.gender;
}

SemanticDescription default_query(const SynthPerson& p, const AttributeVocabulary& vocab) {
    SemanticDescription d;
    if (const HeightClass* hc = vocab.classify_height(p.height)) d.height_class = hc->label;
    d.torso_primary_color = p.torso_color;
    d.torso_type = p.torso_type;
    d.torso_pattern = p.torso_pattern;
    d.leg_primary_color = p.leg_color;
    d.leg_pattern = p.leg_pattern;
    d.gender = p.gender;
    return d;
}

std::string sequence_dir_name(const std::string& id) {
    std::string out;
    for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

void write_lines(const fs::path& path, const std::vector<json>& lines) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& l : lines) out << l.dump() << "\n";
}

}  // namespace

Rgb synth_color(const std::string& label) {
    static const std::map<std::string, Rgb> palette = {
        {"black", {15, 15, 15}},     {"white", {245, 245, 245}},  {"grey", {128, 128, 128}},
        {"red", {230, 25, 25}},      {"orange", {245, 140, 20}},  {"yellow", {240, 220, 30}},
        {"green", {30, 170, 60}},    {"blue", {30, 60, 220}},     {"purple", {130, 40, 190}},
        {"pink", {240, 110, 180}},   {"brown", {120, 70, 30}},    {"beige", {220, 195, 150}},
        {"multicolour", {230, 25, 25}}};
    auto it = palette.find(label);
    if (it == palette.end()) throw ParseError("no render color for label '" + label + "'");
    return it->second;
}

SyntheticSceneSpec SyntheticSceneSpec::from_json(const json& doc, const AttributeVocabulary& vocab) {
    SyntheticSceneSpec spec;
    try {
        if (!doc.is_object()) throw ParseError("synthetic scene spec must be an object");
        for (const auto& [key, value] : doc.items()) {
            if (key == "cameras") {
                for (const auto& c : value) spec.cameras.push_back(read_camera(c));
            } else if (key == "sequences") {
                for (const auto& s : value) spec.sequences.push_back(read_sequence(s, vocab));
            } else if (key == "write_images") {
                spec.write_images = value.get<bool>();
            } else {
                throw ParseError("unknown spec field '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid synthetic scene spec: ") + e.what());
    }
    spec.validate(vocab);
    return spec;
}

SyntheticSceneSpec SyntheticSceneSpec::load(const std::string& path, const AttributeVocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open synthetic scene spec", path);
    try {
        return from_json(json::parse(in), vocab);
    } catch (const json::exception& e) {
        throw ParseError(e.what(), path);
    } catch (const ParseError& e) {
        throw ParseError(e.message(), path);
    }
}

void SyntheticSceneSpec::validate(const AttributeVocabulary& vocab) const {
    std::set<std::string> camera_ids;
    for (const auto& c : cameras) {
        c.validate();
        if (!camera_ids.insert(c.id).second) throw ParseError("duplicate camera '" + c.id + "'");
    }
    std::set<std::string> seq_ids;
    for (const auto& s : sequences) {
        const std::string who = "sequence '" + s.sequence_id + "'";
        if (s.sequence_id.empty()) throw ParseError("sequence without sequence_id");
        if (!seq_ids.insert(s.sequence_id).second) throw ParseError("duplicate " + who);
        if (!camera_ids.contains(s.camera_id)) throw ParseError(who + " references unknown camera '" + s.camera_id + "'");
        if (s.frames <= 0) throw ParseError(who + ": frames must be positive");
        if (!(s.noise_px >= 0.0)) throw ParseError(who + ": noise_px must be non-negative");
        if (!(s.max_occlusion >= 0.0 && s.max_occlusion <= 1.0)) throw ParseError(who + ": max_occlusion must lie in [0, 1]");
        if (s.persons.empty()) throw ParseError(who + " has no persons");
        if (s.target >= s.persons.size()) throw ParseError(who + ": target index out of range");
        for (const auto& p : s.persons) {
            if (!(p.height >= 0.5 && p.height <= 2.5)) throw ParseError(who + ": person height must lie in [0.5, 2.5] m");
            if (!(p.width > 0.0)) throw ParseError(who + ": person width must be positive");
            for (auto family : kAllFamilies) {
                const std::string& label = person_label(p, family);
                if (!vocab.index_of(family, label)) {
                    throw ParseError(who + ": unknown label '" + label + "' in " +
                                     std::string(AttributeVocabulary::list_name(family)));
                }
                if (family == AttributeFamily::TorsoColor || family == AttributeFamily::LegColor) synth_color(label);
            }
        }
    }
}

std::vector<RenderedPerson> place_persons(const SynthSequence& seq, const CameraModel& camera, int frame) {
    std::vector<RenderedPerson> out;
    for (std::size_t i = 0; i < seq.persons.size(); ++i) {
        const SynthPerson& p = seq.persons[i];
        const WorldPoint feet{p.position.x + frame * p.velocity.x, p.position.y + frame * p.velocity.y, 0.0};
        const WorldPoint head{feet.x, feet.y, p.height};
        RenderedPerson r;
        r.person = i;
        r.feet = project(camera, feet);
        r.head = project(camera, head);
        r.depth = (camera.rotation * Eigen::Vector3d(feet.x, feet.y, feet.f) + camera.translation).z();
        const double center = 0.5 * (r.head.u + r.feet.u);
        const double half = camera.focal_x * p.width / 2.0 / r.depth;
        const int left = static_cast<int>(std::lround(center - half));
        const int right = static_cast<int>(std::lround(center + half));
        const int top = static_cast<int>(std::ceil(r.head.v));
        const int bottom = static_cast<int>(std::floor(r.feet.v));
        r.bbox = {left, top, right - left + 1, bottom - top + 1};
        if (r.bbox.width < 2 || r.bbox.height < 4) {
            throw ParseError("sequence '" + seq.sequence_id + "': person " + std::to_string(i) + " too small at frame " +
                             std::to_string(frame));
        }
        out.push_back(r);
    }
    return out;
}

void write_synthetic_dataset(const SyntheticSceneSpec& spec, const AttributeVocabulary& vocab,
                             const std::string& root) {
    spec.validate(vocab);
    const fs::path base(root);
    fs::create_directories(base / "cameras");
    fs::create_directories(base / "sequences");
    std::map<std::string, const CameraModel*> cameras;
    for (const auto& c : spec.cameras) {
        cameras[c.id] = &c;
        std::ofstream out(base / "cameras" / (sequence_dir_name(c.id) + ".calib"));
        out << format_calibration(c);
    }

    for (const auto& seq : spec.sequences) {
        const CameraModel& camera = *cameras.at(seq.camera_id);
        const fs::path dir = base / "sequences" / sequence_dir_name(seq.sequence_id);
        fs::create_directories(dir);
        if (spec.write_images) fs::create_directories(dir / "frames");
        std::mt19937_64 rng(seq.seed);
        std::normal_distribution<double> noise(0.0, 1.0);

        std::vector<json> detections = {
            {{"schema", "softbio.detections"}, {"version", 1}, {"sequence_id", seq.sequence_id}}};
        std::vector<json> annotations = {
            {{"schema", "softbio.annotations"}, {"version", 1}, {"sequence_id", seq.sequence_id}}};
        std::vector<json> scores = {scores_header(vocab, seq.sequence_id)};

        for (int f = 0; f < seq.frames; ++f) {
            std::vector<RenderedPerson> placed = place_persons(seq, camera, f);
            std::vector<BoundingBox> drawn;
            for (const auto& r : placed) {
                BoundingBox b = r.bbox;
                if (r.person == seq.target && seq.head_offset_px != 0.0) {
                    const int shift = static_cast<int>(std::lround(seq.head_offset_px));
                    b.y -= shift;
                    b.height += shift;
                }
                if (seq.noise_px > 0.0) {
                    const int dl = static_cast<int>(std::lround(seq.noise_px * noise(rng)));
                    const int dr = static_cast<int>(std::lround(seq.noise_px * noise(rng)));
                    const int dt = static_cast<int>(std::lround(seq.noise_px * noise(rng)));
                    const int db = static_cast<int>(std::lround(seq.noise_px * noise(rng)));
                    b.x += dl;
                    b.width += dr - dl;
                    b.y += dt;
                    b.height += db - dt;
                }
                if (b.x < 0 || b.y < 0 || b.x + b.width > camera.image_width || b.y + b.height > camera.image_height ||
                    b.width < 2 || b.height < 4) {
                    throw ParseError("sequence '" + seq.sequence_id + "': person " + std::to_string(r.person) +
                                     " leaves the image at frame " + std::to_string(f));
                }
                drawn.push_back(b);
            }

            std::vector<std::size_t> order(placed.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return placed[a].depth > placed[b].depth; });
            Image image(camera.image_width, camera.image_height, kBackground);
            std::vector<int> owner(static_cast<std::size_t>(camera.image_width) * camera.image_height, -1);
            for (std::size_t k : order) {
                const BoundingBox& b = drawn[k];
                const SynthPerson& p = seq.persons[placed[k].person];
                for (int row = b.y; row < b.y + b.height; ++row) {
                    const Rgb c = body_color(p, row, b);
                    for (int col = b.x; col < b.x + b.width; ++col) {
                        image.set(col, row, c);
                        owner[static_cast<std::size_t>(row) * camera.image_width + col] = static_cast<int>(k);
                    }
                }
            }

            json candidates = json::array();
            std::vector<std::size_t> ids(placed.size());
            std::iota(ids.begin(), ids.end(), 0);
            std::shuffle(ids.begin(), ids.end(), rng);
            for (std::size_t k : ids) {
                const BoundingBox& b = drawn[k];
                Bitmap bits(b.width, b.height);
                std::size_t visible = 0;
                for (int row = 0; row < b.height; ++row) {
                    for (int col = 0; col < b.width; ++col) {
                        const std::size_t at = static_cast<std::size_t>(b.y + row) * camera.image_width + b.x + col;
                        if (owner[at] == static_cast<int>(k)) {
                            bits.set(col, row, 1);
                            ++visible;
                        }
                    }
                }
                const double occluded = 1.0 - static_cast<double>(visible) / (static_cast<double>(b.width) * b.height);
                if (occluded > seq.max_occlusion) {
                    throw ParseError("sequence '" + seq.sequence_id + "': person " + std::to_string(placed[k].person) +
                                     " occluded beyond max_occlusion at frame " + std::to_string(f));
                }
                const std::string id = "p" + std::to_string(placed[k].person);
                const InstanceMask mask = encode_mask(bits);
                candidates.push_back({{"candidate_id", id},
                                      {"bbox", to_json(b)},
                                      {"detector_score", 0.9},
                                      {"mask", mask.runs}});
                const SynthPerson& p = seq.persons[placed[k].person];
                for (auto family : kAllFamilies) {
                    scores.push_back({{"sequence_id", seq.sequence_id},
                                      {"frame_index", f},
                                      {"candidate_id", id},
                                      {"family", std::string(family_name(family))},
                                      {"scores", one_hot(vocab.labels(family), person_label(p, family))}});
                }
            }

            char name[32];
            std::snprintf(name, sizeof name, "%06d.png", f);
            json frame_doc = {{"sequence_id", seq.sequence_id}, {"frame_index", f}, {"candidates", candidates}};
            if (spec.write_images) {
                frame_doc["image"] = name;
                write_png((dir / "frames" / name).string(), image);
            }
            detections.push_back(std::move(frame_doc));

            const RenderedPerson& target = placed[seq.target];
            annotations.push_back({{"sequence_id", seq.sequence_id},
                                   {"frame_index", f},
                                   {"bbox", to_json(target.bbox)},
                                   {"head", to_json(target.head)},
                                   {"feet", to_json(target.feet)}});
        }

        const SemanticDescription query = seq.query ? *seq.query : default_query(seq.persons[seq.target], vocab);
        const json description = {{"schema", "softbio.description"},
                                  {"version", 1},
                                  {"sequence_id", seq.sequence_id},
                                  {"camera_id", seq.camera_id},
                                  {"difficulty", std::string(difficulty_name(seq.difficulty))},
                                  {"split", seq.split == Split::Train ? "train" : "test"},
                                  {"query", query.to_json()}};
        std::ofstream(dir / "description.json") << description.dump(2) << "\n";
        write_lines(dir / "detections.jsonl", detections);
        write_lines(dir / "annotations.jsonl", annotations);
        write_lines(dir / "scores.jsonl", scores);
    }
}

}  // namespace softbio
