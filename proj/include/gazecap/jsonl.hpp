#ifndef GAZECAP_JSONL_HPP
#define GAZECAP_JSONL_HPP

#include "gazecap/analysis.hpp"
#include "gazecap/gaze.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gazecap {

// One JSON object per line. Readers keep file order and reject duplicate ids.

struct CaptionSet {
    std::string image_id;
    std::vector<std::string> captions;
};

/// {"image_id": ..., "captions": [...]}
std::vector<CaptionSet> read_references(const std::filesystem::path& path);
void write_references(const std::filesystem::path& path, const std::vector<CaptionSet>& refs);

/// {"image_id": ..., "caption": ...}
std::vector<std::pair<std::string, std::string>> read_candidates(const std::filesystem::path& path);
void write_candidates(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& c);

/// {"image_id": ..., "fixations": [[x, y] or [x, y, duration_ms], ...]}
std::vector<FixationRecord> read_fixations(const std::filesystem::path& path);
void write_fixations(const std::filesystem::path& path, const std::vector<FixationRecord>& recs);

/// {"image_id", "labels": [ids], "mentioned": [ids], "ignored": [ids]}
LabelSet read_labels(const std::filesystem::path& path);
/// Written in the given id order.
void write_labels(const std::filesystem::path& path, const std::vector<std::pair<std::string, ImageLabels>>& labels);

/// Plain id list, one per line.
std::vector<std::string> read_id_list(const std::filesystem::path& path);
void write_id_list(const std::filesystem::path& path, const std::vector<std::string>& ids);

}  // namespace gazecap

#endif  // GAZECAP_JSONL_HPP
