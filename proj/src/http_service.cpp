#include "softbio/http_service.hpp"

#include "softbio/error.hpp"

#include "httplib.h"

#include <charconv>
#include <fstream>
#include <sstream>

namespace softbio {

namespace {

HttpResponse json_response(int status, const json& doc) { return {status, "application/json", doc.dump()}; }

HttpResponse error_response(int status, const std::string& message) {
    return json_response(status, {{"error", message}});
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : path.substr(0, path.find('?'))) {
        if (c == '/') {
            if (!current.empty()) parts.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) parts.push_back(std::move(current));
    return parts;
}

std::optional<int> parse_index(const std::string& s) {
    int value = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
    return value;
}

json sequence_summary(const SequenceRecord& seq) {
    return {{"sequence_id", seq.sequence_id},
            {"camera_id", seq.camera_id},
            {"difficulty", std::string(difficulty_name(seq.difficulty))},
            {"split", seq.split == Split::Train ? "train" : "test"},
            {"frame_count", seq.frames.size()},
            {"first_frame", seq.frames.front().frame_index},
            {"last_frame", seq.frames.back().frame_index},
            {"description", seq.description.to_json()}};
}

json frame_document(const SequenceRecord& seq, const FrameRecord& frame) {
    json candidates = json::array();
    for (const auto& c : frame.candidates) {
        candidates.push_back({{"candidate_id", c.candidate_id},
                              {"bbox", to_json(c.bbox)},
                              {"detector_score", c.detector_score}});
    }
    json doc = {{"sequence_id", seq.sequence_id},
                {"frame_index", frame.frame_index},
                {"camera_id", seq.camera_id},
                {"candidates", candidates}};
    doc["image_url"] = frame.image_path.empty()
                           ? json(nullptr)
                           : json("/api/sequences/" + seq.sequence_id + "/frames/" +
                                  std::to_string(frame.frame_index) + "/image");
    if (frame.ground_truth) doc["ground_truth"] = {{"bbox", to_json(frame.ground_truth->bbox)}};
    return doc;
}

HttpResponse frame_image(const FrameRecord& frame) {
    if (frame.image_path.empty()) return error_response(404, "frame has no image");
    std::ifstream in(frame.image_path, std::ios::binary);
    if (!in) return error_response(404, "frame image is not readable");
    std::ostringstream buf;
    buf << in.rdbuf();
    return {200, "image/png", buf.str()};
}

HttpResponse run_query(const RetrievalService& service, const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        return error_response(400, std::string("invalid JSON body: ") + e.what());
    }
    if (!doc.is_object()) return error_response(400, "request body must be an object");
    if (!doc.contains("sequence_id") || !doc.at("sequence_id").is_string()) {
        return error_response(400, "sequence_id must be a string");
    }
    const SequenceRecord* seq = service.dataset().sequence(doc.at("sequence_id").get<std::string>());
    if (!seq) return error_response(404, "unknown sequence '" + doc.at("sequence_id").get<std::string>() + "'");
    if (!doc.contains("description")) return error_response(422, "missing description");
    SemanticDescription desc;
    try {
        desc = parse_description(doc.at("description"), service.engine().vocabulary());
    } catch (const ParseError& e) {
        return error_response(422, e.what());
    }
    FrameRange range;
    if (doc.contains("frames")) {
        const json& f = doc.at("frames");
        if (!f.is_object()) return error_response(400, "frames must be an object with first and last");
        try {
            if (f.contains("first")) range.first = f.at("first").get<int>();
            if (f.contains("last")) range.last = f.at("last").get<int>();
        } catch (const json::exception&) {
            return error_response(400, "frames.first and frames.last must be integers");
        }
        if (range.first > range.last) return error_response(422, "frame range is empty");
    }
    json results = json::array();
    for (const auto& outcome : service.retrieve_sequence(*seq, desc, range)) results.push_back(to_json(outcome));
    return json_response(200, {{"sequence_id", seq->sequence_id},
                               {"config_digest", service.config_digest()},
                               {"vocabulary_hash", service.engine().vocabulary().hash()},
                               {"results", results}});
}

}  // namespace

HttpResponse handle_request(const RetrievalService& service, const std::string& method, const std::string& path,
                            const std::string& body) {
    const auto parts = split_path(path);
    if (method == "OPTIONS") return {204, "text/plain", ""};
    if (parts.empty() || parts[0] != "api" || parts.size() < 2) return error_response(404, "not found");
    try {
        const std::string& resource = parts[1];
        if (resource == "vocabulary" && parts.size() == 2) {
            if (method != "GET") return error_response(405, "method not allowed");
            const auto& vocab = service.engine().vocabulary();
            return json_response(200, {{"vocabulary", vocab.to_json()}, {"vocabulary_hash", vocab.hash()}});
        }
        if (resource == "query" && parts.size() == 2) {
            if (method != "POST") return error_response(405, "method not allowed");
            return run_query(service, body);
        }
        if (resource == "sequences") {
            if (method != "GET") return error_response(405, "method not allowed");
            if (parts.size() == 2) {
                json list = json::array();
                for (const auto& s : service.dataset().sequences) list.push_back(sequence_summary(s));
                return json_response(200, {{"sequences", list}});
            }
            const SequenceRecord* seq = service.dataset().sequence(parts[2]);
            if (!seq) return error_response(404, "unknown sequence '" + parts[2] + "'");
            if (parts.size() == 3) return json_response(200, sequence_summary(*seq));
            if (parts[3] != "frames" || parts.size() < 5 || parts.size() > 6) return error_response(404, "not found");
            const auto idx = parse_index(parts[4]);
            const FrameRecord* frame = idx ? seq->frame(*idx) : nullptr;
            if (!frame) return error_response(404, "unknown frame '" + parts[4] + "'");
            if (parts.size() == 5) return json_response(200, frame_document(*seq, *frame));
            if (parts[5] == "image") return frame_image(*frame);
        }
        return error_response(404, "not found");
    } catch (const Error& e) {
        return error_response(500, e.what());
    }
}

struct HttpServer::Impl {
    const RetrievalService& service;
    httplib::Server server;

    explicit Impl(const RetrievalService& s) : service(s) {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
        auto forward = [this](const httplib::Request& req, httplib::Response& res) {
            const HttpResponse out = handle_request(service, req.method, req.path, req.body);
            res.status = out.status;
            res.set_content(out.body, out.content_type);
        };
        server.Get(".*", forward);
        server.Post(".*", forward);
        server.Options(".*", forward);
    }
};

HttpServer::HttpServer(const RetrievalService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace softbio
