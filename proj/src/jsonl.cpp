#include "softbio/jsonl.hpp"

#include "softbio/error.hpp"

#include <cmath>

namespace softbio {

void JsonlRecord::fail(const std::string& what) const { throw ParseError(what, locus()); }

const json& JsonlRecord::require(const char* key) const {
    if (!value.is_object() || !value.contains(key)) fail(std::string("missing field '") + key + "'");
    return value.at(key);
}

JsonlReader::JsonlReader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw ParseError("cannot open file", path);
}

std::optional<JsonlRecord> JsonlReader::next() {
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        JsonlRecord rec{{}, path_, line_};
        try {
            rec.value = json::parse(text);
        } catch (const json::exception& e) {
            rec.fail(std::string("invalid JSON: ") + e.what());
        }
        if (!rec.value.is_object()) rec.fail("record must be an object");
        return rec;
    }
    return std::nullopt;
}

JsonlRecord JsonlReader::header(const std::string& schema, int version) {
    auto rec = next();
    if (!rec) throw ParseError("missing header record", path_);
    if (rec->value.value("schema", "") != schema) rec->fail("expected schema '" + schema + "'");
    const json& v = rec->require("version");
    if (!v.is_number_integer() || v.get<int>() != version) {
        rec->fail("unsupported " + schema + " version " + v.dump());
    }
    return *rec;
}

json scores_header(const AttributeVocabulary& vocab, const std::string& sequence_id) {
    json families = json::object();
    for (auto f : kAllFamilies) families[std::string(family_name(f))] = vocab.labels(f);
    return {{"schema", "softbio.scores"},
            {"version", 1},
            {"sequence_id", sequence_id},
            {"vocabulary_hash", vocab.hash()},
            {"families", families}};
}

void validate_scores_header(const JsonlRecord& header, const AttributeVocabulary& vocab) {
    const json& hash = header.require("vocabulary_hash");
    if (!hash.is_string() || hash.get<std::string>() != vocab.hash()) {
        header.fail("vocabulary hash mismatch: file has " + hash.dump() + ", active vocabulary is \"" + vocab.hash() +
                    "\"");
    }
    if (header.value.contains("families")) {
        const json& families = header.value.at("families");
        if (!families.is_object()) header.fail("families must be an object");
        for (const auto& [name, labels] : families.items()) {
            auto family = family_from_name(name);
            if (!family) header.fail("unknown family '" + name + "'");
            if (labels != json(vocab.labels(*family))) header.fail("label order for '" + name + "' differs from vocabulary");
        }
    }
}

ScoreRecord read_score_record(const JsonlRecord& rec, const AttributeVocabulary& vocab) {
    ScoreRecord out;
    const json& seq = rec.require("sequence_id");
    if (!seq.is_string()) rec.fail("sequence_id must be a string");
    out.sequence_id = seq.get<std::string>();
    const json& idx = rec.require("frame_index");
    if (!idx.is_number_integer() || idx.get<long long>() < 0) rec.fail("frame_index must be a non-negative integer");
    out.frame_index = idx.get<int>();
    const json& cand = rec.require("candidate_id");
    if (!cand.is_string()) rec.fail("candidate_id must be a string");
    out.candidate_id = cand.get<std::string>();
    const json& fam = rec.require("family");
    auto family = fam.is_string() ? family_from_name(fam.get<std::string>()) : std::nullopt;
    if (!family) rec.fail("unknown family " + fam.dump());
    out.family = *family;
    const json& scores = rec.require("scores");
    if (!scores.is_array()) rec.fail("scores must be an array");
    const auto expected = vocab.labels(out.family).size();
    if (scores.size() != expected) {
        rec.fail("score vector for " + std::string(family_name(out.family)) + " has " + std::to_string(scores.size()) +
                 " entries, vocabulary has " + std::to_string(expected));
    }
    for (const auto& s : scores) {
        if (!s.is_number()) rec.fail("scores must be numbers");
        const double d = s.get<double>();
        if (!std::isfinite(d) || d < 0.0 || d > 1.0) rec.fail("score outside [0, 1]");
        out.scores.push_back(d);
    }
    return out;
}

}  // namespace softbio
