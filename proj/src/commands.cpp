#include "softbio/commands.hpp"

#include "softbio/body_regions.hpp"
#include "softbio/error.hpp"
#include "softbio/http_service.hpp"
#include "softbio/jsonl.hpp"
#include "softbio/synth.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace softbio {

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitLoadError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitLoadError;
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file", path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), path);
    }
}

/// Either a dataset root or one sequence directory plus its calibration.
Dataset load_input(const AttributeVocabulary& vocab, const std::string& root, const std::string& sequence_dir,
                   const std::string& calibration) {
    if (!root.empty()) return load_dataset(root, vocab);
    if (sequence_dir.empty()) throw ParseError("either --dataset or --sequence is required");
    if (calibration.empty()) throw ParseError("--calibration is required with --sequence");
    Dataset ds;
    ds.root = sequence_dir;
    ds.vocabulary = vocab;
    CameraModel cam = load_calibration(calibration);
    SequenceRecord seq = load_sequence(SequencePaths::in_directory(sequence_dir), vocab);
    if (seq.camera_id != cam.id) {
        throw ParseError("sequence uses camera '" + seq.camera_id + "' but the calibration is for '" + cam.id + "'",
                         calibration);
    }
    ds.cameras.emplace(cam.id, std::move(cam));
    ds.sequences.push_back(std::move(seq));
    return ds;
}

const SequenceRecord& pick_sequence(const Dataset& ds, const std::string& id) {
    if (id.empty()) {
        if (ds.sequences.size() != 1) throw ParseError("dataset holds several sequences; pass --sequence-id");
        return ds.sequences.front();
    }
    const SequenceRecord* seq = ds.sequence(id);
    if (!seq) throw ParseError("unknown sequence '" + id + "'");
    return *seq;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

EngineConfig resolve_config(const GlobalOptions& global) {
    EngineConfig cfg = global.config_path.empty() ? EngineConfig{} : EngineConfig::load(global.config_path);
    if (!global.vocabulary_path.empty()) cfg.vocabulary_path = global.vocabulary_path;
    cfg.validate();
    return cfg;
}

int cmd_retrieve(const GlobalOptions& global, const RetrieveOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        EngineConfig cfg = resolve_config(global);
        const AttributeVocabulary vocab = cfg.vocabulary();
        RetrievalService service(std::move(cfg),
                                 load_input(vocab, options.dataset_root, options.sequence_dir, options.calibration));
        const SequenceRecord& seq = pick_sequence(service.dataset(), options.sequence_id);
        SemanticDescription desc = seq.description;
        if (!options.description.empty()) {
            try {
                desc = parse_description(read_json_file(options.description), vocab);
            } catch (const ParseError& e) {
                throw ParseError(e.message(), e.locus().empty() ? options.description : e.locus());
            }
        }

        std::ofstream file;
        if (!options.output.empty()) {
            file.open(options.output);
            if (!file) throw Error("cannot write " + options.output);
        }
        std::ostream& sink = options.output.empty() ? out : file;
        sink << json({{"schema", "softbio.results"},
                      {"version", 1},
                      {"sequence_id", seq.sequence_id},
                      {"config_digest", service.config_digest()},
                      {"vocabulary_hash", vocab.hash()}})
                    .dump()
             << "\n";
        int failures = 0;
        for (const auto& outcome : service.retrieve_sequence(seq, desc, options.frames)) {
            if (!outcome.result) {
                ++failures;
                err << "error: " << outcome.error << "\n";
            }
            sink << to_json(outcome).dump() << "\n";
        }
        return failures ? kExitFrameError : kExitOk;
    });
}

int cmd_eval(const GlobalOptions& global, const EvalCommandOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        EngineConfig cfg = resolve_config(global);
        if (options.skip_initial_frames) cfg.skip_initial_frames = *options.skip_initial_frames;
        cfg.validate();
        if (options.dataset_root.empty()) throw ParseError("--dataset is required");
        const AttributeVocabulary vocab = cfg.vocabulary();
        RetrievalService service(std::move(cfg), load_dataset(options.dataset_root, vocab));
        EvalReport report;
        try {
            report = service.evaluate();
        } catch (const GeometryError& e) {
            err << "error: " << e.what() << "\n";
            return kExitFrameError;
        } catch (const EngineError& e) {
            err << "error: " << e.what() << "\n";
            return kExitFrameError;
        }
        const std::string table = render_report(report, "table");
        if (!options.output_dir.empty()) {
            const fs::path dir(options.output_dir);
            fs::create_directories(dir);
            write_text(dir / "report.txt", table);
            write_text(dir / "sequences.csv", render_report(report, "sequences_csv"));
            write_text(dir / "difficulty.csv", render_report(report, "difficulty_csv"));
            write_text(dir / "frames.csv", render_report(report, "frames_csv"));
            write_text(dir / "report.json", render_report(report, "json"));
        }
        out << table;
        return kExitOk;
    });
}

int cmd_height_debug(const GlobalOptions& global, const HeightDebugOptions& options, std::ostream& out,
                     std::ostream& err) {
    return guarded(err, [&] {
        EngineConfig cfg = resolve_config(global);
        const AttributeVocabulary vocab = cfg.vocabulary();
        RetrievalService service(std::move(cfg),
                                 load_input(vocab, options.dataset_root, options.sequence_dir, options.calibration));
        const SequenceRecord& seq = pick_sequence(service.dataset(), options.sequence_id);
        const CameraModel& camera = service.dataset().camera(seq.camera_id);
        const HeightBias& bias = service.height_bias().for_camera(seq.camera_id);
        out << "# camera " << camera.id << " bias " << number(bias.bias) << " from " << bias.sample_count
            << " samples\n";
        out << "frame_index,candidate_id,head_u,head_v,feet_u,feet_v,estimated,corrected,status\n";
        for (const auto& frame : seq.frames) {
            if (!options.frames.contains(frame.frame_index)) continue;
            for (const auto& c : frame.candidates) {
                const HeightMeasurement m = measure_height(c, camera, bias);
                out << frame.frame_index << "," << c.candidate_id << "," << number(m.head.u) << "," << number(m.head.v)
                    << "," << number(m.feet.u) << "," << number(m.feet.v) << ","
                    << (m.estimated ? number(*m.estimated) : "") << "," << (m.corrected ? number(*m.corrected) : "")
                    << "," << (m.estimated ? "ok" : m.failure) << "\n";
            }
        }
        return kExitOk;
    });
}

int cmd_augment(const GlobalOptions&, const AugmentOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (options.manifest.empty() || options.output_dir.empty()) throw ParseError("--manifest and --output are required");
        const AugmentConfig config = options.augment_config.empty()
                                         ? AugmentConfig{}
                                         : AugmentConfig::from_json(read_json_file(options.augment_config));
        const fs::path base = fs::path(options.manifest).parent_path();
        JsonlReader reader(options.manifest);
        reader.header("softbio.patches");
        std::vector<Patch> patches;
        std::vector<std::string> stems;
        while (auto rec = reader.next()) {
            const json& name = rec->require("patch");
            if (!name.is_string()) rec->fail("patch must be a file name");
            const fs::path path = base / name.get<std::string>();
            try {
                patches.push_back(read_patch_png(path.string()));
            } catch (const Error& e) {
                rec->fail(e.what());
            }
            stems.push_back(path.stem().string());
        }
        const fs::path dir(options.output_dir);
        fs::create_directories(dir);
        std::ofstream manifest(dir / "manifest.jsonl");
        manifest << json({{"schema", "softbio.patches"}, {"version", 1}, {"augment", config.to_json()}}).dump() << "\n";
        const auto outputs = augment_patches(patches, config);
        for (const auto& a : outputs) {
            const std::string file = stems[a.source] + "_" + a.transform + ".png";
            write_patch_png((dir / file).string(), a.patch);
            manifest << json({{"patch", file}, {"source", stems[a.source]}, {"transform", a.transform}}).dump() << "\n";
        }
        out << "augmented " << patches.size() << " patches into " << outputs.size() << " outputs\n";
        return kExitOk;
    });
}

int cmd_synth(const GlobalOptions& global, const SynthOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (options.spec.empty() || options.output_dir.empty()) throw ParseError("--spec and --output are required");
        const AttributeVocabulary vocab = resolve_config(global).vocabulary();
        SyntheticSceneSpec spec = SyntheticSceneSpec::load(options.spec, vocab);
        if (global.seed) {
            for (std::size_t i = 0; i < spec.sequences.size(); ++i) spec.sequences[i].seed = *global.seed + i;
        }
        write_synthetic_dataset(spec, vocab, options.output_dir);
        out << "wrote " << spec.sequences.size() << " sequences and " << spec.cameras.size() << " cameras to "
            << options.output_dir << "\n";
        return kExitOk;
    });
}

int cmd_serve(const GlobalOptions& global, const ServeOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (options.dataset_root.empty()) throw ParseError("--dataset (or SOFTBIO_DATASET) is required");
        EngineConfig cfg = resolve_config(global);
        const AttributeVocabulary vocab = cfg.vocabulary();
        RetrievalService service(std::move(cfg), load_dataset(options.dataset_root, vocab));
        HttpServer server(service);
        const int port = server.bind(options.host, options.port);
        out << "serving " << service.dataset().sequences.size() << " sequences on http://" << options.host << ":"
            << port << std::endl;
        server.listen();
        return kExitOk;
    });
}

}  // namespace softbio
