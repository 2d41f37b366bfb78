#include "softbio/data_model.hpp"

#include "softbio/error.hpp"
#include "softbio/jsonl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace fs = std::filesystem;

namespace softbio {

std::string content_digest(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string_view family_name(AttributeFamily family) {
    switch (family) {
        case AttributeFamily::TorsoColor: return "torso_color";
        case AttributeFamily::TorsoType: return "torso_type";
        case AttributeFamily::TorsoPattern: return "torso_pattern";
        case AttributeFamily::LegColor: return "leg_color";
        case AttributeFamily::LegPattern: return "leg_pattern";
        case AttributeFamily::Gender: return "gender";
    }
    return "unknown";
}

std::optional<AttributeFamily> family_from_name(std::string_view name) {
    for (auto f : kAllFamilies) {
        if (family_name(f) == name) return f;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Vocabulary

AttributeVocabulary AttributeVocabulary::defaults() {
    AttributeVocabulary v;
    v.colors = {"black", "white", "grey",   "red",   "orange", "yellow",     "green",
                "blue",  "purple", "pink", "brown", "beige",  "multicolour"};
    v.torso_types = {"short-sleeve", "long-sleeve", "jacket", "dress"};
    v.torso_patterns = {"solid", "horizontal-stripe", "vertical-stripe", "check",
                        "plaid", "spot",              "graphic",         "other"};
    v.leg_patterns = v.torso_patterns;
    v.genders = {"male", "female"};
    v.height_classes = {{"short", 0.0, 1.50},
                        {"average", 1.50, 1.70},
                        {"tall", 1.70, 1.90},
                        {"very tall", 1.90, std::numeric_limits<double>::infinity()}};
    return v;
}

namespace {

std::vector<std::string> label_list(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_array()) {
        throw ParseError(std::string("vocabulary: missing label list '") + key + "'");
    }
    std::vector<std::string> out;
    for (const auto& item : doc.at(key)) {
        if (!item.is_string()) throw ParseError(std::string("vocabulary: non-string label in '") + key + "'");
        out.push_back(item.get<std::string>());
    }
    return out;
}

void check_unique(const std::vector<std::string>& labels, std::string_view list) {
    if (labels.empty()) throw Error("vocabulary: list '" + std::string(list) + "' is empty");
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (l.empty()) throw Error("vocabulary: empty label in '" + std::string(list) + "'");
        if (!seen.insert(l).second) {
            throw Error("vocabulary: duplicate label '" + l + "' in '" + std::string(list) + "'");
        }
    }
}

}  // namespace

AttributeVocabulary AttributeVocabulary::from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("vocabulary must be an object");
    AttributeVocabulary v;
    v.colors = label_list(doc, "colors");
    v.torso_types = label_list(doc, "torso_types");
    v.torso_patterns = label_list(doc, "torso_patterns");
    v.leg_patterns = label_list(doc, "leg_patterns");
    v.genders = label_list(doc, "genders");
    if (!doc.contains("height_classes") || !doc.at("height_classes").is_array()) {
        throw ParseError("vocabulary: missing 'height_classes'");
    }
    for (const auto& hc : doc.at("height_classes")) {
        if (!hc.is_object() || !hc.contains("label") || !hc.contains("min") || !hc.contains("max")) {
            throw ParseError("vocabulary: height class needs label, min and max");
        }
        HeightClass c;
        c.label = hc.at("label").get<std::string>();
        c.min = hc.at("min").get<double>();
        c.max = hc.at("max").is_null() ? std::numeric_limits<double>::infinity() : hc.at("max").get<double>();
        v.height_classes.push_back(c);
    }
    v.validate();
    return v;
}

AttributeVocabulary AttributeVocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open vocabulary file", path);
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ParseError(e.what(), path);
    }
}

json AttributeVocabulary::to_json() const {
    json doc;
    doc["colors"] = colors;
    doc["torso_types"] = torso_types;
    doc["torso_patterns"] = torso_patterns;
    doc["leg_patterns"] = leg_patterns;
    doc["genders"] = genders;
    json classes = json::array();
    for (const auto& c : height_classes) {
        json max = std::isinf(c.max) ? json(nullptr) : json(c.max);
        classes.push_back({{"label", c.label}, {"min", c.min}, {"max", max}});
    }
    doc["height_classes"] = classes;
    return doc;
}

void AttributeVocabulary::validate() const {
    check_unique(colors, "colors");
    check_unique(torso_types, "torso_types");
    check_unique(torso_patterns, "torso_patterns");
    check_unique(leg_patterns, "leg_patterns");
    check_unique(genders, "genders");
    if (height_classes.empty()) throw Error("vocabulary: no height classes");
    std::vector<std::string> hc_labels;
    for (const auto& c : height_classes) hc_labels.push_back(c.label);
    check_unique(hc_labels, "height_classes");
    if (height_classes.front().min != 0.0) throw Error("vocabulary: first height class must start at 0");
    if (!std::isinf(height_classes.back().max)) throw Error("vocabulary: last height class must be unbounded");
    for (std::size_t i = 0; i < height_classes.size(); ++i) {
        const auto& c = height_classes[i];
        if (!(c.max > c.min)) throw Error("vocabulary: height class '" + c.label + "' has an empty interval");
        if (i > 0 && c.min != height_classes[i - 1].max) {
            throw Error("vocabulary: height classes must be sorted and contiguous at '" + c.label + "'");
        }
    }
}

std::string AttributeVocabulary::hash() const { return content_digest(to_json().dump()); }

const std::vector<std::string>& AttributeVocabulary::labels(AttributeFamily family) const {
    switch (family) {
        case AttributeFamily::TorsoColor:
        case AttributeFamily::LegColor: return colors;
        case AttributeFamily::TorsoType: return torso_types;
        case AttributeFamily::TorsoPattern: return torso_patterns;
        case AttributeFamily::LegPattern: return leg_patterns;
        case AttributeFamily::Gender: return genders;
    }
    return colors;
}

std::string_view AttributeVocabulary::list_name(AttributeFamily family) {
    switch (family) {
        case AttributeFamily::TorsoColor:
        case AttributeFamily::LegColor: return "colors";
        case AttributeFamily::TorsoType: return "torso_types";
        case AttributeFamily::TorsoPattern: return "torso_patterns";
        case AttributeFamily::LegPattern: return "leg_patterns";
        case AttributeFamily::Gender: return "genders";
    }
    return "colors";
}

std::optional<std::size_t> AttributeVocabulary::index_of(AttributeFamily family, std::string_view label) const {
    const auto& list = labels(family);
    auto it = std::find(list.begin(), list.end(), label);
    if (it == list.end()) return std::nullopt;
    return static_cast<std::size_t>(it - list.begin());
}

const HeightClass* AttributeVocabulary::height_class(std::string_view label) const {
    for (const auto& c : height_classes) {
        if (c.label == label) return &c;
    }
    return nullptr;
}

const HeightClass* AttributeVocabulary::classify_height(double meters) const {
    for (const auto& c : height_classes) {
        if (meters >= c.min && meters < c.max) return &c;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Description

bool SemanticDescription::empty() const {
    return !height_class && !torso_primary_color && !torso_secondary_color && !torso_type && !torso_pattern &&
           !leg_primary_color && !leg_secondary_color && !leg_pattern && !gender;
}

const std::optional<std::string>& SemanticDescription::label(AttributeFamily family) const {
    switch (family) {
        case AttributeFamily::TorsoColor: return torso_primary_color;
        case AttributeFamily::TorsoType: return torso_type;
        case AttributeFamily::TorsoPattern: return torso_pattern;
        case AttributeFamily::LegColor: return leg_primary_color;
        case AttributeFamily::LegPattern: return leg_pattern;
        case AttributeFamily::Gender: return gender;
    }
    return gender;
}

const std::optional<std::string>& SemanticDescription::secondary_color(AttributeFamily family) const {
    static const std::optional<std::string> none;
    if (family == AttributeFamily::TorsoColor) return torso_secondary_color;
    if (family == AttributeFamily::LegColor) return leg_secondary_color;
    return none;
}

namespace {

struct DescriptionField {
    const char* name;
    std::optional<std::string> SemanticDescription::*member;
    std::optional<AttributeFamily> family;  // nullopt for height
};

const std::array<DescriptionField, 9> kDescriptionFields = {{
    {"height_class", &SemanticDescription::height_class, std::nullopt},
    {"torso_primary_color", &SemanticDescription::torso_primary_color, AttributeFamily::TorsoColor},
    {"torso_secondary_color", &SemanticDescription::torso_secondary_color, AttributeFamily::TorsoColor},
    {"torso_type", &SemanticDescription::torso_type, AttributeFamily::TorsoType},
    {"torso_pattern", &SemanticDescription::torso_pattern, AttributeFamily::TorsoPattern},
    {"leg_primary_color", &SemanticDescription::leg_primary_color, AttributeFamily::LegColor},
    {"leg_secondary_color", &SemanticDescription::leg_secondary_color, AttributeFamily::LegColor},
    {"leg_pattern", &SemanticDescription::leg_pattern, AttributeFamily::LegPattern},
    {"gender", &SemanticDescription::gender, AttributeFamily::Gender},
}};

}  // namespace

json SemanticDescription::to_json() const {
    json doc = json::object();
    for (const auto& field : kDescriptionFields) {
        if (const auto& value = this->*field.member) doc[field.name] = *value;
    }
    return doc;
}

SemanticDescription parse_description(const json& input, const AttributeVocabulary& vocab) {
    const json& doc = (input.is_object() && input.contains("query")) ? input.at("query") : input;
    if (!doc.is_object()) throw ParseError("description must be an object");
    SemanticDescription desc;
    for (const auto& [key, value] : doc.items()) {
        auto field = std::find_if(kDescriptionFields.begin(), kDescriptionFields.end(),
                                  [&](const DescriptionField& f) { return key == f.name; });
        if (field == kDescriptionFields.end()) throw ParseError("unknown field '" + key + "'");
        if (value.is_null()) continue;
        if (!value.is_string()) throw ParseError("field '" + key + "' must be a string label");
        const auto label = value.get<std::string>();
        if (field->family) {
            if (!vocab.index_of(*field->family, label)) {
                throw ParseError("unknown label '" + label + "' in " +
                                 std::string(AttributeVocabulary::list_name(*field->family)));
            }
        } else if (!vocab.height_class(label)) {
            throw ParseError("unknown label '" + label + "' in height_classes");
        }
        desc.*(field->member) = label;
    }
    if (desc.empty()) throw ParseError("empty description");
    return desc;
}

// ---------------------------------------------------------------------------
// Masks

std::size_t InstanceMask::foreground_count() const {
    std::size_t n = 0;
    for (std::size_t i = 1; i < runs.size(); i += 2) n += runs[i];
    return n;
}

InstanceMask encode_mask(const Bitmap& bitmap) {
    if (bitmap.width <= 0 || bitmap.height <= 0) throw Error("bitmap dimensions must be positive");
    InstanceMask mask{bitmap.width, bitmap.height, {}};
    std::uint8_t current = 0;
    std::uint32_t count = 0;
    for (std::uint8_t bit : bitmap.bits) {
        const std::uint8_t b = bit ? 1 : 0;
        if (b != current) {
            mask.runs.push_back(count);
            count = 0;
            current = b;
        }
        ++count;
    }
    mask.runs.push_back(count);
    return mask;
}

void validate_mask(const InstanceMask& mask) {
    if (mask.width <= 0 || mask.height <= 0) throw ParseError("mask dimensions must be positive");
    if (mask.runs.empty()) throw ParseError("non-canonical run list: empty");
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < mask.runs.size(); ++i) {
        if (i > 0 && mask.runs[i] == 0) {
            throw ParseError("non-canonical run list: zero-length run at position " + std::to_string(i));
        }
        total += mask.runs[i];
    }
    if (total != static_cast<std::uint64_t>(mask.width) * static_cast<std::uint64_t>(mask.height)) {
        throw ParseError("mask size mismatch: runs sum to " + std::to_string(total) + ", expected " +
                         std::to_string(static_cast<std::uint64_t>(mask.width) * mask.height));
    }
}

Bitmap decode_mask(const InstanceMask& mask) {
    validate_mask(mask);
    Bitmap out(mask.width, mask.height);
    std::size_t pos = 0;
    std::uint8_t value = 0;
    for (std::uint32_t run : mask.runs) {
        std::fill_n(out.bits.begin() + static_cast<std::ptrdiff_t>(pos), run, value);
        pos += run;
        value ^= 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Records

std::string_view difficulty_name(Difficulty d) {
    switch (d) {
        case Difficulty::VeryEasy: return "very_easy";
        case Difficulty::Easy: return "easy";
        case Difficulty::Medium: return "medium";
        case Difficulty::Hard: return "hard";
    }
    return "easy";
}

std::optional<Difficulty> difficulty_from_name(std::string_view name) {
    for (auto d : kAllDifficulties) {
        if (difficulty_name(d) == name) return d;
    }
    return std::nullopt;
}

const FrameRecord* SequenceRecord::frame(int frame_index) const {
    auto it = std::lower_bound(frames.begin(), frames.end(), frame_index,
                               [](const FrameRecord& f, int idx) { return f.frame_index < idx; });
    if (it == frames.end() || it->frame_index != frame_index) return nullptr;
    return &*it;
}

FrameRecord* SequenceRecord::frame(int frame_index) {
    return const_cast<FrameRecord*>(std::as_const(*this).frame(frame_index));
}

SequencePaths SequencePaths::in_directory(const std::string& dir) {
    const fs::path base(dir);
    SequencePaths paths;
    paths.description = (base / "description.json").string();
    paths.detections = (base / "detections.jsonl").string();
    paths.annotations = (base / "annotations.jsonl").string();
    if (fs::exists(base / "scores.jsonl")) paths.scores = (base / "scores.jsonl").string();
    if (fs::is_directory(base / "frames")) paths.frames_dir = (base / "frames").string();
    return paths;
}

json to_json(const BoundingBox& box) { return json::array({box.x, box.y, box.width, box.height}); }

json to_json(const ImagePoint& p) { return json::array({p.u, p.v}); }

namespace {

BoundingBox read_box(const json& j, const JsonlRecord& rec, const char* what) {
    if (!j.is_array() || j.size() != 4) rec.fail(std::string(what) + " must be [x, y, width, height]");
    BoundingBox b;
    int* fields[4] = {&b.x, &b.y, &b.width, &b.height};
    for (int i = 0; i < 4; ++i) {
        if (!j[i].is_number_integer()) rec.fail(std::string(what) + " coordinates must be integers");
        *fields[i] = j[i].get<int>();
    }
    if (b.width < 0 || b.height < 0) rec.fail(std::string(what) + " has negative dimensions");
    return b;
}

ImagePoint read_point(const json& j, const JsonlRecord& rec, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        rec.fail(std::string(what) + " must be [u, v]");
    }
    ImagePoint p{j[0].get<double>(), j[1].get<double>()};
    if (!std::isfinite(p.u) || !std::isfinite(p.v)) rec.fail(std::string(what) + " must be finite");
    return p;
}

int read_frame_index(const JsonlRecord& rec) {
    const json& j = rec.require("frame_index");
    if (!j.is_number_integer() || j.get<long long>() < 0) rec.fail("frame_index must be a non-negative integer");
    return j.get<int>();
}

void check_sequence_id(const JsonlRecord& rec, const std::string& expected) {
    if (rec.value.contains("sequence_id") && rec.value.at("sequence_id") != expected) {
        rec.fail("sequence_id '" + rec.value.at("sequence_id").dump() + "' does not match '" + expected + "'");
    }
}

PersonCandidate read_candidate(const json& j, const JsonlRecord& rec) {
    if (!j.is_object()) rec.fail("candidate must be an object");
    PersonCandidate c;
    if (!j.contains("candidate_id") || !j.at("candidate_id").is_string()) rec.fail("candidate_id must be a string");
    c.candidate_id = j.at("candidate_id").get<std::string>();
    const std::string who = "candidate '" + c.candidate_id + "'";
    if (!j.contains("bbox")) rec.fail(who + ": missing bbox");
    c.bbox = read_box(j.at("bbox"), rec, "bbox");
    if (!j.contains("detector_score") || !j.at("detector_score").is_number()) rec.fail(who + ": missing detector_score");
    c.detector_score = j.at("detector_score").get<double>();
    if (!(c.detector_score >= 0.0 && c.detector_score <= 1.0)) rec.fail(who + ": detector_score outside [0, 1]");
    if (!j.contains("mask") || !j.at("mask").is_array()) rec.fail(who + ": missing mask runs");
    c.mask.width = c.bbox.width;
    c.mask.height = c.bbox.height;
    for (const auto& r : j.at("mask")) {
        if (!r.is_number_integer() || r.get<long long>() < 0) rec.fail(who + ": mask runs must be non-negative integers");
        c.mask.runs.push_back(r.get<std::uint32_t>());
    }
    std::uint64_t total = 0;
    for (auto r : c.mask.runs) total += r;
    if (total != static_cast<std::uint64_t>(c.bbox.width) * static_cast<std::uint64_t>(c.bbox.height)) {
        rec.fail("mask size mismatch for " + who + ": runs sum to " + std::to_string(total) + ", bbox area is " +
                 std::to_string(static_cast<std::uint64_t>(c.bbox.width) * c.bbox.height));
    }
    try {
        validate_mask(c.mask);
    } catch (const ParseError& e) {
        rec.fail(who + ": " + e.message());
    }
    if (j.contains("head")) c.head = read_point(j.at("head"), rec, "head");
    if (j.contains("feet")) c.feet = read_point(j.at("feet"), rec, "feet");
    if (c.head && c.feet && c.head->v > c.feet->v) rec.fail(who + ": head lies below feet");
    return c;
}

void read_header(JsonlReader& reader, const char* schema, const std::string& sequence_id) {
    const JsonlRecord header = reader.header(schema);
    if (header.value.contains("sequence_id") && header.value.at("sequence_id") != sequence_id) {
        header.fail("sequence_id does not match the description's '" + sequence_id + "'");
    }
}

void read_detections(const std::string& path, const std::string& frames_dir, SequenceRecord& seq) {
    JsonlReader reader(path);
    read_header(reader, "softbio.detections", seq.sequence_id);
    std::set<int> seen;
    while (auto rec = reader.next()) {
        check_sequence_id(*rec, seq.sequence_id);
        FrameRecord frame;
        frame.sequence_id = seq.sequence_id;
        frame.camera_id = seq.camera_id;
        frame.frame_index = read_frame_index(*rec);
        if (!seen.insert(frame.frame_index).second) {
            rec->fail("duplicate frame_index " + std::to_string(frame.frame_index));
        }
        const json& list = rec->require("candidates");
        if (!list.is_array()) rec->fail("candidates must be an array");
        std::set<std::string> ids;
        for (const auto& item : list) {
            PersonCandidate c = read_candidate(item, *rec);
            if (!ids.insert(c.candidate_id).second) rec->fail("duplicate candidate_id '" + c.candidate_id + "'");
            frame.candidates.push_back(std::move(c));
        }
        if (!frames_dir.empty()) {
            fs::path image;
            if (rec->value.contains("image")) {
                image = fs::path(frames_dir) / rec->value.at("image").get<std::string>();
            } else {
                char name[32];
                std::snprintf(name, sizeof name, "%06d.png", frame.frame_index);
                image = fs::path(frames_dir) / name;
            }
            if (fs::exists(image)) frame.image_path = image.string();
        }
        seq.frames.push_back(std::move(frame));
    }
    std::sort(seq.frames.begin(), seq.frames.end(),
              [](const FrameRecord& a, const FrameRecord& b) { return a.frame_index < b.frame_index; });
}

void read_annotations(const std::string& path, SequenceRecord& seq) {
    JsonlReader reader(path);
    read_header(reader, "softbio.annotations", seq.sequence_id);
    std::set<int> seen;
    while (auto rec = reader.next()) {
        check_sequence_id(*rec, seq.sequence_id);
        const int idx = read_frame_index(*rec);
        if (!seen.insert(idx).second) rec->fail("duplicate annotation for frame_index " + std::to_string(idx));
        FrameRecord* frame = seq.frame(idx);
        if (!frame) rec->fail("dangling ground truth: frame_index " + std::to_string(idx) + " has no detections record");
        GroundTruth gt;
        gt.bbox = read_box(rec->require("bbox"), *rec, "bbox");
        gt.head = read_point(rec->require("head"), *rec, "head");
        gt.feet = read_point(rec->require("feet"), *rec, "feet");
        if (gt.head.v > gt.feet.v) rec->fail("head lies below feet");
        frame->ground_truth = gt;
    }
}

void read_scores(const std::string& path, const AttributeVocabulary& vocab, SequenceRecord& seq) {
    JsonlReader reader(path);
    const JsonlRecord header = reader.header("softbio.scores");
    validate_scores_header(header, vocab);
    while (auto rec = reader.next()) {
        ScoreRecord score = read_score_record(*rec, vocab);
        if (score.sequence_id != seq.sequence_id) rec->fail("sequence_id does not match '" + seq.sequence_id + "'");
        FrameRecord* frame = seq.frame(score.frame_index);
        if (!frame) rec->fail("scores reference unknown frame_index " + std::to_string(score.frame_index));
        auto cand = std::find_if(frame->candidates.begin(), frame->candidates.end(),
                                 [&](const PersonCandidate& c) { return c.candidate_id == score.candidate_id; });
        if (cand == frame->candidates.end()) rec->fail("scores reference unknown candidate '" + score.candidate_id + "'");
        if (!cand->attribute_scores.emplace(score.family, std::move(score.scores)).second) {
            rec->fail("duplicate scores for candidate '" + score.candidate_id + "'");
        }
    }
}

}  // namespace

SequenceRecord load_sequence(const SequencePaths& paths, const AttributeVocabulary& vocab) {
    std::ifstream in(paths.description);
    if (!in) throw ParseError("cannot open description file", paths.description);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), paths.description);
    }
    SequenceRecord seq;
    try {
        if (!doc.is_object()) throw ParseError("description document must be an object");
        if (doc.value("schema", "") != "softbio.description") throw ParseError("schema must be 'softbio.description'");
        if (doc.value("version", 0) != 1) throw ParseError("unsupported version");
        seq.sequence_id = doc.at("sequence_id").get<std::string>();
        seq.camera_id = doc.at("camera_id").get<std::string>();
        const auto diff = difficulty_from_name(doc.at("difficulty").get<std::string>());
        if (!diff) throw ParseError("invalid difficulty '" + doc.at("difficulty").get<std::string>() + "'");
        seq.difficulty = *diff;
        const std::string split = doc.value("split", "test");
        if (split != "train" && split != "test") throw ParseError("split must be 'train' or 'test'");
        seq.split = split == "train" ? Split::Train : Split::Test;
        if (!doc.contains("query")) throw ParseError("missing 'query'");
        seq.description = parse_description(doc.at("query"), vocab);
    } catch (const ParseError& e) {
        throw ParseError(e.message(), paths.description);
    } catch (const json::exception& e) {
        throw ParseError(e.what(), paths.description);
    }
    seq.vocabulary_hash = vocab.hash();

    read_detections(paths.detections, paths.frames_dir, seq);
    if (seq.frames.empty()) throw ParseError("sequence has no frames", paths.detections);
    read_annotations(paths.annotations, seq);
    if (!paths.scores.empty()) read_scores(paths.scores, vocab, seq);
    return seq;
}

const SequenceRecord* Dataset::sequence(std::string_view id) const {
    for (const auto& s : sequences) {
        if (s.sequence_id == id) return &s;
    }
    return nullptr;
}

const CameraModel& Dataset::camera(const std::string& id) const {
    auto it = cameras.find(id);
    if (it == cameras.end()) throw EngineError("unknown camera '" + id + "'");
    return it->second;
}

Dataset load_dataset(const std::string& root, const AttributeVocabulary& vocab) {
    Dataset ds;
    ds.root = root;
    ds.vocabulary = vocab;
    const fs::path base(root);
    if (!fs::is_directory(base / "sequences")) throw ParseError("dataset has no sequences/ directory", root);
    if (fs::is_directory(base / "cameras")) {
        std::vector<fs::path> calibs;
        for (const auto& entry : fs::directory_iterator(base / "cameras")) {
            if (entry.path().extension() == ".calib") calibs.push_back(entry.path());
        }
        std::sort(calibs.begin(), calibs.end());
        for (const auto& p : calibs) {
            CameraModel cam = load_calibration(p.string());
            const std::string id = cam.id;
            if (!ds.cameras.emplace(id, std::move(cam)).second) throw ParseError("duplicate camera_id '" + id + "'", p.string());
        }
    }
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(base / "sequences")) {
        if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    std::set<std::string> ids;
    for (const auto& dir : dirs) {
        SequenceRecord seq = load_sequence(SequencePaths::in_directory(dir.string()), vocab);
        if (!ds.cameras.contains(seq.camera_id)) {
            throw ParseError("sequence references unknown camera '" + seq.camera_id + "'", dir.string());
        }
        if (!ids.insert(seq.sequence_id).second) throw ParseError("duplicate sequence_id '" + seq.sequence_id + "'", dir.string());
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

}  // namespace softbio
