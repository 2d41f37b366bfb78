#include "softbio/attribute_backends.hpp"

#include "softbio/error.hpp"
#include "softbio/jsonl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace softbio {

std::optional<ScoreVector> score(const ScoringBackend& backend, const CandidateContext& ctx, AttributeFamily family,
                                 const Patch* patch) {
    if (!backend.supports(family)) {
        throw EngineError("backend '" + backend.name() + "' does not handle family '" +
                          std::string(family_name(family)) + "'");
    }
    auto result = backend.score(ctx, family, patch);
    if (result) {
        if (result->family != family) throw EngineError("backend '" + backend.name() + "' returned the wrong family");
        for (double s : result->scores) {
            if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
                throw EngineError("backend '" + backend.name() + "' returned a score outside [0, 1]");
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Precomputed

PrecomputedBackend::PrecomputedBackend(AttributeVocabulary vocab) : vocab_(std::move(vocab)) {}

PrecomputedBackend PrecomputedBackend::from_files(const std::vector<std::string>& paths,
                                                  const AttributeVocabulary& vocab) {
    PrecomputedBackend backend(vocab);
    for (const auto& p : paths) backend.add_file(p);
    return backend;
}

PrecomputedBackend PrecomputedBackend::from_sequences(const std::vector<SequenceRecord>& sequences,
                                                      const AttributeVocabulary& vocab) {
    PrecomputedBackend backend(vocab);
    for (const auto& seq : sequences) {
        if (seq.vocabulary_hash != vocab.hash()) {
            throw EngineError("sequence '" + seq.sequence_id + "' was loaded with a different vocabulary");
        }
        for (const auto& frame : seq.frames) {
            for (const auto& cand : frame.candidates) {
                for (const auto& [family, scores] : cand.attribute_scores) {
                    backend.add(seq.sequence_id, frame.frame_index, cand.candidate_id, family, scores);
                }
            }
        }
    }
    return backend;
}

void PrecomputedBackend::add_file(const std::string& path) {
    JsonlReader reader(path);
    validate_scores_header(reader.header("softbio.scores"), vocab_);
    while (auto rec = reader.next()) {
        ScoreRecord r = read_score_record(*rec, vocab_);
        Key key{r.sequence_id, r.frame_index, r.candidate_id, r.family};
        if (!index_.emplace(std::move(key), std::move(r.scores)).second) {
            rec->fail("duplicate scores for candidate '" + r.candidate_id + "'");
        }
    }
}

void PrecomputedBackend::add(const std::string& sequence_id, int frame_index, const std::string& candidate_id,
                             AttributeFamily family, std::vector<double> scores) {
    if (scores.size() != vocab_.labels(family).size()) {
        throw ParseError("score vector length does not match vocabulary for family '" +
                         std::string(family_name(family)) + "'");
    }
    for (double s : scores) {
        if (!std::isfinite(s) || s < 0.0 || s > 1.0) throw ParseError("score outside [0, 1]");
    }
    index_[Key{sequence_id, frame_index, candidate_id, family}] = std::move(scores);
}

std::optional<ScoreVector> PrecomputedBackend::score(const CandidateContext& ctx, AttributeFamily family,
                                                     const Patch*) const {
    if (!ctx.candidate) return std::nullopt;
    auto it = index_.find(Key{ctx.sequence_id, ctx.frame_index, ctx.candidate->candidate_id, family});
    if (it == index_.end()) return std::nullopt;
    return ScoreVector{family, it->second};
}

// ---------------------------------------------------------------------------
// Histogram color baseline

ColorTable ColorTable::defaults() {
    ColorTable t;
    t.ranges = {
        {"brown", 15, 45, 0.0, 1.0, 0.0, 0.6},
        {"beige", 15, 60, 0.0, 0.45, 0.6, 1.0},
        {"red", 345, 15},
        {"orange", 15, 45},
        {"yellow", 45, 70},
        {"green", 70, 165},
        {"blue", 165, 255},
        {"purple", 255, 290},
        {"pink", 290, 345},
    };
    return t;
}

ColorTable ColorTable::from_json(const json& doc) {
    ColorTable t;
    if (!doc.is_object()) throw ParseError("color table must be an object");
    t.black_label = doc.value("black_label", t.black_label);
    t.white_label = doc.value("white_label", t.white_label);
    t.grey_label = doc.value("grey_label", t.grey_label);
    t.black_value_max = doc.value("black_value_max", t.black_value_max);
    t.white_value_min = doc.value("white_value_min", t.white_value_min);
    t.achromatic_saturation_max = doc.value("achromatic_saturation_max", t.achromatic_saturation_max);
    if (!doc.contains("ranges") || !doc.at("ranges").is_array()) throw ParseError("color table needs 'ranges'");
    for (const auto& r : doc.at("ranges")) {
        HueRange h;
        h.label = r.at("label").get<std::string>();
        h.hue_min = r.at("hue_min").get<double>();
        h.hue_max = r.at("hue_max").get<double>();
        h.saturation_min = r.value("saturation_min", 0.0);
        h.saturation_max = r.value("saturation_max", 1.0);
        h.value_min = r.value("value_min", 0.0);
        h.value_max = r.value("value_max", 1.0);
        if (h.hue_min < 0 || h.hue_min > 360 || h.hue_max < 0 || h.hue_max > 360) {
            throw ParseError("hue bounds for '" + h.label + "' must lie in [0, 360]");
        }
        t.ranges.push_back(h);
    }
    return t;
}

ColorTable ColorTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open color table", path);
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ParseError(e.what(), path);
    }
}

json ColorTable::to_json() const {
    json ranges_doc = json::array();
    for (const auto& r : ranges) {
        ranges_doc.push_back({{"label", r.label},
                              {"hue_min", r.hue_min},
                              {"hue_max", r.hue_max},
                              {"saturation_min", r.saturation_min},
                              {"saturation_max", r.saturation_max},
                              {"value_min", r.value_min},
                              {"value_max", r.value_max}});
    }
    return {{"black_label", black_label},
            {"white_label", white_label},
            {"grey_label", grey_label},
            {"black_value_max", black_value_max},
            {"white_value_min", white_value_min},
            {"achromatic_saturation_max", achromatic_saturation_max},
            {"ranges", ranges_doc}};
}

Hsv to_hsv(const Rgb& c) {
    const double r = c[0] / 255.0, g = c[1] / 255.0, b = c[2] / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    Hsv out;
    out.value = mx;
    out.saturation = mx > 0.0 ? delta / mx : 0.0;
    if (delta > 0.0) {
        double h;
        if (mx == r) {
            h = 60.0 * std::fmod((g - b) / delta, 6.0);
        } else if (mx == g) {
            h = 60.0 * ((b - r) / delta + 2.0);
        } else {
            h = 60.0 * ((r - g) / delta + 4.0);
        }
        if (h < 0.0) h += 360.0;
        if (h >= 360.0) h -= 360.0;
        out.hue = h;
    }
    return out;
}

namespace {

bool hue_in(double hue, double lo, double hi) {
    if (lo <= hi) return hue >= lo && hue < hi;
    return hue >= lo || hue < hi;
}

}  // namespace

std::vector<double> color_mass(const Patch& patch, const std::vector<std::string>& labels, const ColorTable& table) {
    std::vector<double> mass(labels.size(), 0.0);
    auto slot = [&](const std::string& label) -> int {
        auto it = std::find(labels.begin(), labels.end(), label);
        return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
    };
    const int black = slot(table.black_label);
    const int white = slot(table.white_label);
    const int grey = slot(table.grey_label);
    std::vector<int> range_slot;
    for (const auto& r : table.ranges) range_slot.push_back(slot(r.label));

    constexpr double kBinWidth = 360.0 / ColorTable::kHueBins;
    std::size_t valid = 0;
    std::vector<std::size_t> counts(labels.size(), 0);
    for (std::size_t p = 0; p < patch.valid.size(); ++p) {
        if (!patch.valid[p]) continue;
        ++valid;
        const Hsv hsv = to_hsv({patch.rgb[3 * p], patch.rgb[3 * p + 1], patch.rgb[3 * p + 2]});
        int target = -1;
        if (hsv.value < table.black_value_max) {
            target = black;
        } else if (hsv.saturation < table.achromatic_saturation_max) {
            target = hsv.value > table.white_value_min ? white : grey;
        } else {
            const int bin = std::min(ColorTable::kHueBins - 1, static_cast<int>(hsv.hue / kBinWidth));
            const double center = (bin + 0.5) * kBinWidth;
            for (std::size_t k = 0; k < table.ranges.size(); ++k) {
                const HueRange& r = table.ranges[k];
                if (hue_in(center, r.hue_min, r.hue_max) && hsv.saturation >= r.saturation_min &&
                    hsv.saturation <= r.saturation_max && hsv.value >= r.value_min && hsv.value <= r.value_max) {
                    target = range_slot[k];
                    break;
                }
            }
        }
        if (target >= 0) ++counts[static_cast<std::size_t>(target)];
    }
    if (valid == 0) throw Error("patch has no valid pixels");
    for (std::size_t i = 0; i < labels.size(); ++i) mass[i] = static_cast<double>(counts[i]) / static_cast<double>(valid);
    return mass;
}

ScoreVector histogram_color_score(const Patch& patch, const std::vector<std::string>& labels, const ColorTable& table,
                                  AttributeFamily family) {
    std::vector<double> mass = color_mass(patch, labels, table);
    const double peak = mass.empty() ? 0.0 : *std::max_element(mass.begin(), mass.end());
    if (peak > 0.0) {
        for (double& m : mass) m /= peak;
    }
    return {family, std::move(mass)};
}

HistogramColorBackend::HistogramColorBackend(AttributeVocabulary vocab, ColorTable table)
    : vocab_(std::move(vocab)), table_(std::move(table)) {}

bool HistogramColorBackend::supports(AttributeFamily family) const {
    return family == AttributeFamily::TorsoColor || family == AttributeFamily::LegColor;
}

std::optional<ScoreVector> HistogramColorBackend::score(const CandidateContext&, AttributeFamily family,
                                                        const Patch* patch) const {
    if (!patch || patch->valid_count() == 0) return std::nullopt;
    return histogram_color_score(*patch, vocab_.labels(family), table_, family);
}

// ---------------------------------------------------------------------------

void BackendRegistry::assign(AttributeFamily family, std::shared_ptr<const ScoringBackend> backend) {
    routes_[family] = std::move(backend);
}

const ScoringBackend* BackendRegistry::find(AttributeFamily family) const {
    auto it = routes_.find(family);
    return it == routes_.end() ? nullptr : it->second.get();
}

}  // namespace softbio
