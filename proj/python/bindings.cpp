#include "softbio/cascade.hpp"
#include "softbio/data_model.hpp"
#include "softbio/engine.hpp"
#include "softbio/error.hpp"
#include "softbio/evaluation.hpp"
#include "softbio/geometry.hpp"
#include "softbio/http_service.hpp"
#include "softbio/synth.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace softbio;

namespace {

std::pair<double, double> as_pair(const ImagePoint& p) { return {p.u, p.v}; }
ImagePoint as_point(std::pair<double, double> p) { return {p.first, p.second}; }

BoundingBox as_box(const std::tuple<int, int, int, int>& t) {
    return {std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t)};
}

/// Loaded dataset plus engine, exchanged with Python as JSON text.
class PyService {
public:
    PyService(const std::string& dataset_root, const std::string& config_path) {
        EngineConfig cfg = config_path.empty() ? EngineConfig{} : EngineConfig::load(config_path);
        service_ = std::make_unique<RetrievalService>(cfg, load_dataset(dataset_root, cfg.vocabulary()));
    }

    std::vector<std::string> sequence_ids() const {
        std::vector<std::string> ids;
        for (const auto& s : service_->dataset().sequences) ids.push_back(s.sequence_id);
        return ids;
    }

    std::string retrieve(const std::string& sequence_id, const std::string& description) const {
        const auto& seqs = service_->dataset().sequences;
        const auto it = std::find_if(seqs.begin(), seqs.end(),
                                     [&](const SequenceRecord& s) { return s.sequence_id == sequence_id; });
        if (it == seqs.end()) throw Error("unknown sequence '" + sequence_id + "'");
        const SemanticDescription desc =
            parse_description(json::parse(description), service_->engine().vocabulary());
        json out = json::array();
        for (const auto& o : service_->retrieve_sequence(*it, desc)) out.push_back(to_json(o));
        return out.dump();
    }

    std::string evaluate() const { return render_report(service_->evaluate(), "json"); }

    std::tuple<int, std::string, std::string> request(const std::string& method, const std::string& path,
                                                      const std::string& body) const {
        const HttpResponse r = handle_request(*service_, method, path, body);
        return {r.status, r.content_type, r.body};
    }

private:
    std::unique_ptr<RetrievalService> service_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Semantic person retrieval core";

    // Translators run newest first, so the base class goes first.
    const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<GeometryError>(m, "GeometryError", base.ptr());

    py::class_<CameraModel>(m, "Camera")
        .def_readonly("id", &CameraModel::id)
        .def_readonly("image_width", &CameraModel::image_width)
        .def_readonly("image_height", &CameraModel::image_height)
        .def_readonly("focal_x", &CameraModel::focal_x)
        .def_readonly("focal_y", &CameraModel::focal_y)
        .def_readonly("k1", &CameraModel::k1)
        .def_readonly("k2", &CameraModel::k2)
        .def("__repr__", [](const CameraModel& c) { return "<Camera " + c.id + ">"; });

    m.def("look_down_camera", &look_down_camera, py::arg("id"), py::arg("width"), py::arg("height"),
          py::arg("focal"), py::arg("mount_height"), py::arg("tilt_deg"), py::arg("k1") = 0.0, py::arg("k2") = 0.0);
    m.def("load_calibration", &load_calibration, py::arg("path"));
    m.def("parse_calibration", &parse_calibration, py::arg("text"), py::arg("source") = "<calibration>");

    m.def(
        "project",
        [](const CameraModel& c, std::tuple<double, double, double> p) {
            return as_pair(project(c, {std::get<0>(p), std::get<1>(p), std::get<2>(p)}));
        },
        py::arg("camera"), py::arg("point"));
    m.def(
        "distort", [](const CameraModel& c, std::pair<double, double> p) { return as_pair(distort(c, as_point(p))); },
        py::arg("camera"), py::arg("pixel"));
    m.def(
        "undistort",
        [](const CameraModel& c, std::pair<double, double> p) { return as_pair(undistort(c, as_point(p))); },
        py::arg("camera"), py::arg("pixel"));
    m.def(
        "backproject_ground",
        [](const CameraModel& c, std::pair<double, double> p) {
            const WorldPoint w = backproject_ground(c, as_point(p));
            return std::make_tuple(w.x, w.y, w.f);
        },
        py::arg("camera"), py::arg("pixel"));
    m.def(
        "estimate_height",
        [](const CameraModel& c, std::pair<double, double> head, std::pair<double, double> feet) {
            return estimate_height(c, as_point(head), as_point(feet));
        },
        py::arg("camera"), py::arg("head"), py::arg("feet"));
    m.def(
        "fit_height_bias",
        [](const std::vector<std::pair<double, double>>& samples) {
            std::vector<HeightSample> s;
            for (const auto& [est, ann] : samples) s.push_back({est, ann});
            return fit_height_bias(s).bias;
        },
        py::arg("samples"), "Mean of estimated minus annotated heights.");

    m.def(
        "iou",
        [](std::tuple<int, int, int, int> a, std::tuple<int, int, int, int> b) { return iou(as_box(a), as_box(b)); },
        py::arg("a"), py::arg("b"));

    m.def(
        "encode_mask",
        [](const std::vector<std::vector<int>>& rows) {
            const int h = static_cast<int>(rows.size());
            const int w = h ? static_cast<int>(rows[0].size()) : 0;
            Bitmap b(w, h);
            for (int r = 0; r < h; ++r) {
                if (static_cast<int>(rows[r].size()) != w) throw Error("ragged mask rows");
                for (int c = 0; c < w; ++c) b.set(c, r, rows[r][c] ? 1 : 0);
            }
            return encode_mask(b).runs;
        },
        py::arg("rows"), "Row-major run lengths, starting with a background run.");
    m.def(
        "decode_mask",
        [](int width, int height, std::vector<int> runs) {
            InstanceMask mask;
            mask.width = width;
            mask.height = height;
            mask.runs.assign(runs.begin(), runs.end());
            const Bitmap b = decode_mask(mask);
            std::vector<std::vector<int>> rows(height, std::vector<int>(width));
            for (int r = 0; r < height; ++r)
                for (int c = 0; c < width; ++c) rows[r][c] = b.at(c, r);
            return rows;
        },
        py::arg("width"), py::arg("height"), py::arg("runs"));

    m.def(
        "synthesize",
        [](const std::string& spec_path, const std::string& output_dir) {
            const auto vocab = AttributeVocabulary::defaults();
            write_synthetic_dataset(SyntheticSceneSpec::load(spec_path, vocab), vocab, output_dir);
        },
        py::arg("spec_path"), py::arg("output_dir"));

    py::class_<PyService>(m, "_Service")
        .def(py::init<const std::string&, const std::string&>(), py::arg("dataset_root"), py::arg("config_path") = "")
        .def("sequence_ids", &PyService::sequence_ids)
        .def("retrieve", &PyService::retrieve, py::arg("sequence_id"), py::arg("description"),
             py::call_guard<py::gil_scoped_release>())
        .def("evaluate", &PyService::evaluate, py::call_guard<py::gil_scoped_release>())
        .def("request", &PyService::request, py::arg("method"), py::arg("path"), py::arg("body") = "");
}
