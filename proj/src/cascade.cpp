#include "softbio/cascade.hpp"

#include "softbio/error.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace softbio {

std::string_view stage_name(Stage stage) {
    switch (stage) {
        case Stage::Height: return "height";
        case Stage::TorsoColor: return "torso_color";
        case Stage::TorsoType: return "torso_type";
        case Stage::TorsoPattern: return "torso_pattern";
        case Stage::LegColor: return "leg_color";
        case Stage::LegPattern: return "leg_pattern";
        case Stage::Gender: return "gender";
    }
    return "height";
}

std::optional<Stage> stage_from_name(std::string_view name) {
    for (auto s : kStageOrder) {
        if (stage_name(s) == name) return s;
    }
    return std::nullopt;
}

std::optional<AttributeFamily> stage_family(Stage stage) {
    switch (stage) {
        case Stage::Height: return std::nullopt;
        case Stage::TorsoColor: return AttributeFamily::TorsoColor;
        case Stage::TorsoType: return AttributeFamily::TorsoType;
        case Stage::TorsoPattern: return AttributeFamily::TorsoPattern;
        case Stage::LegColor: return AttributeFamily::LegColor;
        case Stage::LegPattern: return AttributeFamily::LegPattern;
        case Stage::Gender: return AttributeFamily::Gender;
    }
    return std::nullopt;
}

Stage family_stage(AttributeFamily family) {
    for (auto s : kStageOrder) {
        if (stage_family(s) == family) return s;
    }
    return Stage::Height;
}

std::string_view stage_status_name(StageStatus status) {
    switch (status) {
        case StageStatus::Applied: return "applied";
        case StageStatus::SkippedNotDescribed: return "skipped_not_described";
        case StageStatus::SkippedEarlyExit: return "skipped_early_exit";
        case StageStatus::SkippedEmptySet: return "skipped_empty_set";
        case StageStatus::SkippedNoCandidates: return "skipped_no_candidates";
    }
    return "applied";
}

std::string_view terminal_status_name(TerminalStatus status) {
    switch (status) {
        case TerminalStatus::Retrieved: return "retrieved";
        case TerminalStatus::NoneRetrieved: return "none_retrieved";
        case TerminalStatus::Ambiguous: return "ambiguous";
    }
    return "none_retrieved";
}

// ---------------------------------------------------------------------------
// Config

double CascadeConfig::threshold(AttributeFamily family) const {
    auto it = thresholds.find(family);
    return it == thresholds.end() ? default_threshold : it->second;
}

const RegionBand& CascadeConfig::band(AttributeFamily family) const {
    static constexpr RegionBand kFull = RegionBand::full();
    switch (family) {
        case AttributeFamily::TorsoColor:
        case AttributeFamily::TorsoType:
        case AttributeFamily::TorsoPattern: return torso_band;
        case AttributeFamily::LegColor:
        case AttributeFamily::LegPattern: return leg_band;
        case AttributeFamily::Gender: return kFull;
    }
    return kFull;
}

void CascadeConfig::validate() const {
    auto check = [](double t) {
        if (!(t >= 0.0 && t <= 1.0)) throw Error("cascade thresholds must lie in [0, 1]");
    };
    check(default_threshold);
    for (const auto& [family, t] : thresholds) check(t);
    if (!(height_slack >= 0.0)) throw Error("height slack must be non-negative");
    torso_band.validate();
    leg_band.validate();
}

CascadeConfig CascadeConfig::from_json(const json& doc) {
    CascadeConfig cfg;
    if (!doc.is_object()) throw ParseError("cascade config must be an object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "default_threshold") {
            cfg.default_threshold = value.get<double>();
        } else if (key == "thresholds") {
            for (const auto& [name, t] : value.items()) {
                auto family = family_from_name(name);
                if (!family) throw ParseError("unknown family '" + name + "' in thresholds");
                cfg.thresholds[*family] = t.get<double>();
            }
        } else if (key == "height_slack") {
            cfg.height_slack = value.get<double>();
        } else if (key == "match_secondary_colors") {
            cfg.match_secondary_colors = value.get<bool>();
        } else if (key == "torso_band" || key == "leg_band") {
            const auto fractions = value.get<std::vector<double>>();
            if (fractions.size() != 2) throw ParseError(key + " must be [top, bottom]");
            (key == "torso_band" ? cfg.torso_band : cfg.leg_band) = {fractions[0], fractions[1]};
        } else if (key == "band_anchor") {
            const auto anchor = value.get<std::string>();
            if (anchor == "bbox") {
                cfg.band_anchor = BandAnchor::BoundingBox;
            } else if (anchor == "mask") {
                cfg.band_anchor = BandAnchor::MaskExtent;
            } else {
                throw ParseError("band_anchor must be 'bbox' or 'mask'");
            }
        } else {
            throw ParseError("unknown cascade option '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

json CascadeConfig::to_json() const {
    json t = json::object();
    for (const auto& [family, value] : thresholds) t[std::string(family_name(family))] = value;
    return {{"default_threshold", default_threshold},
            {"thresholds", t},
            {"height_slack", height_slack},
            {"match_secondary_colors", match_secondary_colors},
            {"torso_band", {torso_band.top_fraction, torso_band.bottom_fraction}},
            {"leg_band", {leg_band.top_fraction, leg_band.bottom_fraction}},
            {"band_anchor", band_anchor == BandAnchor::BoundingBox ? "bbox" : "mask"}};
}

// ---------------------------------------------------------------------------
// Filters

HeightMeasurement measure_height(const PersonCandidate& candidate, const CameraModel& camera, const HeightBias& bias) {
    HeightMeasurement m;
    try {
        if (candidate.head && candidate.feet) {
            m.head = *candidate.head;
            m.feet = *candidate.feet;
        } else {
            const HeadFeet hf = head_feet_points(candidate);
            m.head = candidate.head.value_or(hf.head);
            m.feet = candidate.feet.value_or(hf.feet);
        }
        const ImagePoint head = undistort(camera, m.head);
        const ImagePoint feet = undistort(camera, m.feet);
        m.estimated = estimate_height(camera, head, feet);
        m.corrected = corrected_height(*m.estimated, bias);
    } catch (const Error& e) {
        m.estimated.reset();
        m.corrected.reset();
        m.failure = e.what();
    }
    return m;
}

namespace {

std::vector<std::string> ids_of(const std::vector<const PersonCandidate*>& candidates) {
    std::vector<std::string> ids;
    ids.reserve(candidates.size());
    for (const auto* c : candidates) ids.push_back(c->candidate_id);
    return ids;
}

}  // namespace

StageTrace filter_height(const std::vector<const PersonCandidate*>& candidates, const HeightClass& height_class,
                         const CameraModel& camera, const HeightBias& bias, double slack) {
    StageTrace st;
    st.stage = Stage::Height;
    st.status = StageStatus::Applied;
    st.query_label = height_class.label;
    st.input = ids_of(candidates);
    const double lo = height_class.min - slack;
    const double hi = height_class.max + slack;
    for (const auto* c : candidates) {
        const HeightMeasurement m = measure_height(*c, camera, bias);
        CandidateDecision d;
        d.candidate_id = c->candidate_id;
        d.estimated_height = m.estimated;
        d.corrected_height = m.corrected;
        if (!m.corrected) {
            d.kept = true;
            d.reason = "height_unobservable";
        } else if (*m.corrected >= lo && *m.corrected <= hi) {
            d.kept = true;
            d.reason = "in_range";
            d.match_factor = 1.0;
        } else {
            d.kept = false;
            d.reason = "out_of_range";
            const double distance = *m.corrected < lo ? lo - *m.corrected : *m.corrected - hi;
            d.match_factor = std::exp(-distance / std::max(slack, 0.01));
        }
        if (d.kept) st.kept.push_back(c->candidate_id);
        st.decisions.push_back(std::move(d));
    }
    return st;
}

StageTrace filter_attribute(const std::vector<const PersonCandidate*>& candidates, AttributeFamily family,
                            const std::vector<std::string>& labels, std::size_t query_index,
                            std::optional<std::size_t> secondary_index, const CandidateScorer& scorer,
                            double threshold) {
    StageTrace st;
    st.stage = family_stage(family);
    st.status = StageStatus::Applied;
    st.query_label = labels.at(query_index);
    st.input = ids_of(candidates);
    for (const auto* c : candidates) {
        CandidateDecision d;
        d.candidate_id = c->candidate_id;
        const std::optional<ScoreVector> sv = scorer(*c);
        if (!sv) {
            d.kept = true;
            d.reason = "unavailable";
        } else {
            const auto& s = sv->scores;
            if (s.size() != labels.size()) throw EngineError("score vector length does not match vocabulary");
            const auto peak = std::max_element(s.begin(), s.end());
            d.argmax_label = labels[static_cast<std::size_t>(peak - s.begin())];
            auto accepts = [&](std::size_t idx) { return s[idx] == *peak; };
            double best = s[query_index];
            bool argmax = accepts(query_index);
            if (secondary_index) {
                best = std::max(best, s[*secondary_index]);
                argmax = argmax || accepts(*secondary_index);
            }
            d.score = best;
            d.match_factor = best;
            if (argmax) {
                d.kept = true;
                d.reason = "match";
            } else if (best >= threshold) {
                d.kept = true;
                d.reason = "above_threshold";
            } else {
                d.kept = false;
                d.reason = "mismatch";
            }
        }
        if (d.kept) st.kept.push_back(c->candidate_id);
        st.decisions.push_back(std::move(d));
    }
    return st;
}

double match_score(const CascadeTrace& trace, const std::string& candidate_id) {
    double log_sum = 0.0;
    int count = 0;
    for (const auto& st : trace.stages) {
        if (st.status != StageStatus::Applied) continue;
        for (const auto& d : st.decisions) {
            if (d.candidate_id != candidate_id || !d.match_factor) continue;
            if (*d.match_factor <= 0.0) return 0.0;
            log_sum += std::log(*d.match_factor);
            ++count;
        }
    }
    if (count == 0) return 1.0;
    return std::clamp(std::exp(log_sum / count), 0.0, 1.0);
}

void decide_final(const std::vector<std::string>& finalists, CascadeTrace& trace) {
    trace.finalists = finalists;
    trace.match_scores.clear();
    trace.retrieved.reset();
    if (finalists.empty()) {
        trace.status = TerminalStatus::NoneRetrieved;
        return;
    }
    for (const auto& id : finalists) trace.match_scores[id] = match_score(trace, id);
    trace.status = finalists.size() == 1 ? TerminalStatus::Retrieved : TerminalStatus::Ambiguous;
    const std::string* best = nullptr;
    for (const auto& id : finalists) {
        if (!best) {
            best = &id;
            continue;
        }
        const double a = trace.match_scores[id];
        const double b = trace.match_scores[*best];
        if (a > b || (a == b && id < *best)) best = &id;
    }
    trace.retrieved = *best;
}

// ---------------------------------------------------------------------------
// Engine

CascadeEngine::CascadeEngine(AttributeVocabulary vocab, BackendRegistry backends, CascadeConfig config)
    : vocab_(std::move(vocab)), backends_(std::move(backends)), config_(std::move(config)) {
    vocab_.validate();
    config_.validate();
}

RetrievalResult CascadeEngine::run(const FrameRecord& frame, const SemanticDescription& desc,
                                   const CameraModel& camera, const HeightBias& bias, const Image* image) const {
    if (frame.camera_id != camera.id) {
        throw EngineError("camera mismatch: frame uses '" + frame.camera_id + "', got calibration for '" + camera.id +
                          "'");
    }
    if (desc.empty()) throw EngineError("empty description");
    auto secondary_query = [&](AttributeFamily family) -> const std::optional<std::string>& {
        static const std::optional<std::string> none;
        return config_.match_secondary_colors ? desc.secondary_color(family) : none;
    };
    auto described = [&](AttributeFamily family) {
        return desc.label(family).has_value() || secondary_query(family).has_value();
    };
    for (auto family : kAllFamilies) {
        if (described(family) && !backends_.find(family)) {
            throw EngineError("no backend registered for family '" + std::string(family_name(family)) + "'");
        }
    }
    const HeightClass* height_class = nullptr;
    if (desc.height_class) {
        height_class = vocab_.height_class(*desc.height_class);
        if (!height_class) throw EngineError("unknown height class '" + *desc.height_class + "'");
    }

    std::optional<Image> loaded;
    bool load_attempted = false;
    auto frame_image = [&]() -> const Image* {
        if (image) return image;
        if (!load_attempted) {
            load_attempted = true;
            if (!frame.image_path.empty() && std::filesystem::exists(frame.image_path)) {
                loaded = read_png(frame.image_path);
            }
        }
        return loaded ? &*loaded : nullptr;
    };

    RetrievalResult result;
    result.sequence_id = frame.sequence_id;
    result.frame_index = frame.frame_index;
    CascadeTrace& trace = result.trace;

    std::vector<const PersonCandidate*> current;
    for (const auto& c : frame.candidates) current.push_back(&c);

    std::optional<StageStatus> halt = current.empty() ? std::optional(StageStatus::SkippedNoCandidates) : std::nullopt;
    std::vector<std::string> fallback_set;

    for (Stage stage : kStageOrder) {
        const auto family = stage_family(stage);
        const bool is_described = family ? described(*family) : height_class != nullptr;
        if (halt || !is_described) {
            StageTrace st;
            st.stage = stage;
            st.status = halt ? *halt : StageStatus::SkippedNotDescribed;
            st.input = ids_of(current);
            st.kept = st.input;
            trace.stages.push_back(std::move(st));
            continue;
        }

        StageTrace st;
        if (!family) {
            st = filter_height(current, *height_class, camera, bias, config_.height_slack);
        } else {
            const auto& labels = vocab_.labels(*family);
            const auto& primary = desc.label(*family);
            const auto& secondary = secondary_query(*family);
            const std::size_t query = *vocab_.index_of(*family, primary ? *primary : *secondary);
            std::optional<std::size_t> alternate;
            if (primary && secondary) alternate = vocab_.index_of(*family, *secondary);

            const ScoringBackend& backend = *backends_.find(*family);
            const bool needs_patch = backend.needs_patch(*family);
            CandidateScorer scorer = [&](const PersonCandidate& cand) -> std::optional<ScoreVector> {
                std::optional<Patch> patch;
                if (needs_patch) {
                    if (const Image* img = frame_image()) {
                        try {
                            patch = extract_patch(cand, *img, config_.band(*family), config_.band_anchor);
                        } catch (const EmptyBandError&) {
                            patch.reset();
                        }
                    }
                }
                const CandidateContext ctx{frame.sequence_id, frame.frame_index, &cand};
                return score(backend, ctx, *family, patch ? &*patch : nullptr);
            };
            st = filter_attribute(current, *family, labels, query, alternate, scorer, config_.threshold(*family));

            // With a single candidate left the gender stage only verifies.
            if (stage == Stage::Gender && current.size() == 1 && st.kept.empty()) {
                st.kept = st.input;
                st.decisions.front().kept = true;
                st.decisions.front().reason = "gender_unverified";
                trace.flags.push_back("gender_unverified");
            }
        }

        std::vector<const PersonCandidate*> kept;
        for (const auto* c : current) {
            if (std::find(st.kept.begin(), st.kept.end(), c->candidate_id) != st.kept.end()) kept.push_back(c);
        }
        trace.stages.push_back(std::move(st));
        if (kept.empty()) {
            trace.fallback_from = stage;
            fallback_set = ids_of(current);
            trace.flags.push_back("fallback");
            halt = StageStatus::SkippedEmptySet;
        } else if (kept.size() == 1) {
            halt = StageStatus::SkippedEarlyExit;
        }
        current = std::move(kept);
    }

    decide_final(trace.fallback_from ? fallback_set : ids_of(current), trace);
    if (trace.retrieved) {
        result.retrieved = trace.retrieved;
        for (const auto& c : frame.candidates) {
            if (c.candidate_id == *trace.retrieved) result.final_bbox = c.bbox;
        }
        result.match_score = trace.match_scores.at(*trace.retrieved);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const CascadeTrace& trace) {
    json stages = json::array();
    for (const auto& st : trace.stages) {
        json decisions = json::array();
        for (const auto& d : st.decisions) {
            json jd = {{"candidate_id", d.candidate_id}, {"kept", d.kept}, {"reason", d.reason}};
            if (d.argmax_label) jd["argmax_label"] = *d.argmax_label;
            if (d.score) jd["score"] = *d.score;
            if (d.estimated_height) jd["estimated_height"] = *d.estimated_height;
            if (d.corrected_height) jd["corrected_height"] = *d.corrected_height;
            if (d.match_factor) jd["match_factor"] = *d.match_factor;
            decisions.push_back(std::move(jd));
        }
        json js = {{"stage", stage_name(st.stage)},
                   {"status", stage_status_name(st.status)},
                   {"input", st.input},
                   {"kept", st.kept},
                   {"decisions", decisions}};
        if (st.query_label) js["query_label"] = *st.query_label;
        stages.push_back(std::move(js));
    }
    json scores = json::object();
    for (const auto& [id, s] : trace.match_scores) scores[id] = s;
    json doc = {{"stages", stages},
                {"status", terminal_status_name(trace.status)},
                {"finalists", trace.finalists},
                {"match_scores", scores},
                {"flags", trace.flags}};
    doc["retrieved"] = trace.retrieved ? json(*trace.retrieved) : json(nullptr);
    doc["fallback_from"] = trace.fallback_from ? json(stage_name(*trace.fallback_from)) : json(nullptr);
    return doc;
}

json to_json(const RetrievalResult& result) {
    json doc = {{"sequence_id", result.sequence_id},
                {"frame_index", result.frame_index},
                {"match_score", result.match_score},
                {"trace", to_json(result.trace)}};
    doc["retrieved"] = result.retrieved ? json(*result.retrieved) : json(nullptr);
    doc["final_bbox"] = result.final_bbox ? to_json(*result.final_bbox) : json(nullptr);
    return doc;
}

}  // namespace softbio
