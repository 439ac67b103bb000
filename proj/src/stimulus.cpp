#include "shapemap/stimulus.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace shapemap {

using nlohmann::json;

std::string to_string(Source s) {
    switch (s) {
        case Source::psych: return "psych";
        case Source::extra_linedrawing: return "extra_linedrawing";
        case Source::tuberlin_like: return "tuberlin_like";
        case Source::sketchy_like: return "sketchy_like";
    }
    throw ValidationError("unknown source enum value");
}

Source source_from_string(const std::string& s) {
    if (s == "psych") return Source::psych;
    if (s == "extra_linedrawing") return Source::extra_linedrawing;
    if (s == "tuberlin_like") return Source::tuberlin_like;
    if (s == "sketchy_like") return Source::sketchy_like;
    throw DataError("unknown source tag '" + s + "'");
}

std::vector<StimulusRecord> load_manifest(const std::filesystem::path& path, bool check_images) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest: " + path.string());
    const auto base = path.parent_path();

    std::vector<StimulusRecord> records;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("malformed manifest row at " + where + ": " + e.what());
        }
        StimulusRecord rec;
        try {
            rec.id = j.at("id").get<std::string>();
            rec.source = source_from_string(j.at("source").get<std::string>());
            rec.path = j.at("path").get<std::string>();
            rec.class_label = j.at("class").get<int>();
            rec.fold_id = j.value("fold", -1);
            if (j.contains("coords") && !j["coords"].is_null())
                rec.target_coords = j["coords"].get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw DataError("malformed manifest row at " + where + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at " + where);
        }
        if (!seen.insert(rec.id).second)
            throw DataError("duplicate stimulus id '" + rec.id + "' at " + where);
        if (rec.source == Source::psych && !rec.target_coords)
            throw DataError("psych record '" + rec.id + "' lacks target coordinates at " + where);
        if (rec.source != Source::psych && rec.target_coords)
            throw DataError("non-psych record '" + rec.id + "' carries target coordinates at " + where);
        if (rec.class_label < 0)
            throw DataError("record '" + rec.id + "' has negative class label at " + where);
        if (check_images && !std::filesystem::exists(base / rec.path))
            throw DataError("missing image file '" + rec.path + "' for record '" + rec.id + "'");
        records.push_back(std::move(rec));
    }
    return records;
}

void save_manifest(const std::filesystem::path& path, const std::vector<StimulusRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open manifest for writing: " + path.string());
    for (const auto& rec : records) {
        json j;
        j["id"] = rec.id;
        j["source"] = to_string(rec.source);
        j["path"] = rec.path;
        j["class"] = rec.class_label;
        j["fold"] = rec.fold_id;
        if (rec.target_coords) j["coords"] = *rec.target_coords;
        out << j.dump() << "\n";
    }
    if (!out) throw DataError("write failed for manifest: " + path.string());
}

}  // namespace shapemap
