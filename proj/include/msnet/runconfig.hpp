#pragma once

#include <string>

#include "msnet/arch.hpp"
#include "msnet/train.hpp"

namespace msnet {

/// One JSON document holding the architecture and training fields plus the
/// dataset path and output directory. Parsing is strict: unknown keys are
/// rejected so typos cannot silently fall back to defaults.
struct RunConfig {
    ArchConfig arch;
    TrainConfig train;
    std::string train_data;
    std::string out_dir = ".";

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Fully resolved document: every field appears explicitly, keys sorted.
std::string serialize_run_config(const RunConfig& cfg);

}  // namespace msnet
