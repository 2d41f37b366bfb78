#include "softbio/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace softbio;

namespace {

void add_frame_range(CLI::App* cmd, FrameRange& range) {
    cmd->add_option("--first-frame", range.first, "First frame index to process");
    cmd->add_option("--last-frame", range.last, "Last frame index to process (inclusive)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Person retrieval from semantic descriptions"};
    app.require_subcommand(1);

    GlobalOptions global;
    std::uint64_t seed = 0;
    app.add_option("--config", global.config_path, "Engine configuration (JSON)");
    app.add_option("--vocab", global.vocabulary_path, "Attribute vocabulary (JSON), overrides the config");
    auto* seed_opt = app.add_option("--seed", seed, "Seed for commands that draw random numbers");

    RetrieveOptions retrieve;
    auto* r = app.add_subcommand("retrieve", "Run the cascade over every frame of a sequence");
    r->add_option("--dataset", retrieve.dataset_root, "Dataset root")->envname("SOFTBIO_DATASET");
    r->add_option("--sequence-id", retrieve.sequence_id, "Sequence within the dataset");
    r->add_option("--sequence", retrieve.sequence_dir, "Single sequence directory");
    r->add_option("--calibration", retrieve.calibration, "Calibration file for --sequence");
    r->add_option("--description", retrieve.description, "Description document; defaults to the sequence's own");
    r->add_option("--output", retrieve.output, "Result stream (JSONL); stdout when omitted");
    add_frame_range(r, retrieve.frames);

    EvalCommandOptions eval;
    auto* e = app.add_subcommand("eval", "Evaluate every test sequence of a dataset");
    e->add_option("--dataset", eval.dataset_root, "Dataset root")->envname("SOFTBIO_DATASET");
    e->add_option("--output", eval.output_dir, "Directory for report.txt, CSV and JSON reports");
    e->add_option("--skip-initial-frames", eval.skip_initial_frames, "Leading frames excluded from scoring");

    HeightDebugOptions height;
    auto* h = app.add_subcommand("height-debug", "Print estimated and corrected height per candidate");
    h->add_option("--dataset", height.dataset_root, "Dataset root")->envname("SOFTBIO_DATASET");
    h->add_option("--sequence-id", height.sequence_id, "Sequence within the dataset");
    h->add_option("--sequence", height.sequence_dir, "Single sequence directory");
    h->add_option("--calibration", height.calibration, "Calibration file for --sequence");
    add_frame_range(h, height.frames);

    AugmentOptions augment;
    auto* a = app.add_subcommand("augment", "Expand a patch manifest with flips, rotations and gamma");
    a->add_option("--manifest", augment.manifest, "Input patch manifest (JSONL)")->required();
    a->add_option("--output", augment.output_dir, "Output directory")->required();
    a->add_option("--augment-config", augment.augment_config, "Augmentation settings (JSON)");

    SynthOptions synth;
    auto* s = app.add_subcommand("synth", "Render a synthetic dataset from a scene spec");
    s->add_option("--spec", synth.spec, "Scene spec (JSON)")->required();
    s->add_option("--output", synth.output_dir, "Dataset root to write")->required();

    ServeOptions serve;
    auto* v = app.add_subcommand("serve", "Serve the HTTP API over a preloaded dataset");
    v->add_option("--dataset", serve.dataset_root, "Dataset root")->envname("SOFTBIO_DATASET");
    v->add_option("--host", serve.host, "Interface to bind");
    v->add_option("--port", serve.port, "Port to bind")->envname("SOFTBIO_PORT");

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) global.seed = seed;

    if (*r) return cmd_retrieve(global, retrieve, std::cout, std::cerr);
    if (*e) return cmd_eval(global, eval, std::cout, std::cerr);
    if (*h) return cmd_height_debug(global, height, std::cout, std::cerr);
    if (*a) return cmd_augment(global, augment, std::cout, std::cerr);
    if (*s) return cmd_synth(global, synth, std::cout, std::cerr);
    if (*v) return cmd_serve(global, serve, std::cout, std::cerr);
    return kExitLoadError;
}
