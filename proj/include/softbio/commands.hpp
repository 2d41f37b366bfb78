#pragma once

#include "softbio/engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace softbio {

/// Process exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitLoadError = 1, kExitFrameError = 2 };

struct GlobalOptions {
    std::string config_path;
    std::string vocabulary_path;
    std::optional<std::uint64_t> seed;
};

/// Engine config from --config (defaults otherwise) with --vocab applied.
EngineConfig resolve_config(const GlobalOptions& global);

struct RetrieveOptions {
    std::string dataset_root;
    std::string sequence_id;
    std::string sequence_dir;
    std::string calibration;
    std::string description;
    std::string output;
    FrameRange frames;
};

struct EvalCommandOptions {
    std::string dataset_root;
    std::string output_dir;
    std::optional<int> skip_initial_frames;
};

struct HeightDebugOptions {
    std::string dataset_root;
    std::string sequence_id;
    std::string sequence_dir;
    std::string calibration;
    FrameRange frames;
};

struct AugmentOptions {
    std::string manifest;
    std::string output_dir;
    std::string augment_config;
};

struct SynthOptions {
    std::string spec;
    std::string output_dir;
};

struct ServeOptions {
    std::string dataset_root;
    std::string host = "127.0.0.1";
    int port = 8080;
};

int cmd_retrieve(const GlobalOptions& global, const RetrieveOptions& options, std::ostream& out, std::ostream& err);
int cmd_eval(const GlobalOptions& global, const EvalCommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_height_debug(const GlobalOptions& global, const HeightDebugOptions& options, std::ostream& out,
                     std::ostream& err);
int cmd_augment(const GlobalOptions& global, const AugmentOptions& options, std::ostream& out, std::ostream& err);
int cmd_synth(const GlobalOptions& global, const SynthOptions& options, std::ostream& out, std::ostream& err);
int cmd_serve(const GlobalOptions& global, const ServeOptions& options, std::ostream& out, std::ostream& err);

}  // namespace softbio
