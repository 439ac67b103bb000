#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shapemap/error.hpp"

namespace shapemap {

enum class Source { psych, extra_linedrawing, tuberlin_like, sketchy_like };

// Canonical order used by batch plans and reports.
inline constexpr Source kAllSources[] = {Source::psych, Source::extra_linedrawing,
                                         Source::tuberlin_like, Source::sketchy_like};

std::string to_string(Source s);
Source source_from_string(const std::string& s);

struct StimulusRecord {
    std::string id;
    Source source = Source::psych;
    std::string path;  // image file, relative to the manifest directory
    int class_label = -1;
    int fold_id = -1;
    std::optional<std::vector<double>> target_coords;  // present iff source == psych
};

// JSON-lines manifest: one record per line with fields
// id/source/path/class/fold/coords. check_images verifies the image files
// referenced by each record exist next to the manifest.
std::vector<StimulusRecord> load_manifest(const std::filesystem::path& path,
                                          bool check_images = true);
void save_manifest(const std::filesystem::path& path, const std::vector<StimulusRecord>& records);

}  // namespace shapemap
