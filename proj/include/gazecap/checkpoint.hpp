#ifndef GAZECAP_CHECKPOINT_HPP
#define GAZECAP_CHECKPOINT_HPP

#include "gazecap/captioner.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace gazecap {

// GZC1 layout: magic, u32 version, config echo (length-prefixed key=value
// text), u32 record count, then per record: name, u32 rank, u64 extents,
// f64 little-endian values in row-major order.

struct Checkpoint {
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, Matrix>> tensors;

    const std::string& get(const std::string& key) const;
    bool has(const std::string& key) const;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Adds the model geometry and vocabulary to `run_config` and captures the
/// current parameter values.
Checkpoint make_checkpoint(const CaptionerParams& params, const Vocabulary& vocab,
                           std::vector<std::pair<std::string, std::string>> run_config);

struct LoadedModel {
    CaptionerParams params;
    Vocabulary vocab;
    Checkpoint checkpoint;
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace gazecap

#endif  // GAZECAP_CHECKPOINT_HPP
