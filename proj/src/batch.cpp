#include "shapemap/batch.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace shapemap {

using nlohmann::json;

int BatchPlan::total() const {
    int t = 0;
    for (const auto& [s, c] : counts) t += c;
    return t;
}

int BatchPlan::count_for(Source s) const {
    for (const auto& [src, c] : counts)
        if (src == s) return c;
    return 0;
}

void BatchPlan::validate(int expected_batch_size) const {
    for (const auto& [s, c] : counts)
        if (c <= 0) throw ConfigError("batch plan: nonpositive count for source " + to_string(s));
    if (total() != expected_batch_size)
        throw ConfigError("batch plan: counts sum to " + std::to_string(total()) +
                          ", expected batch size " + std::to_string(expected_batch_size));
}

BatchPlan BatchPlan::paper(const TaskSet& tasks) {
    if (tasks.empty()) throw ConfigError("batch plan: empty task set");
    BatchPlan plan;
    if (tasks.count(Task::reconstruct)) {
        plan.counts = {{Source::psych, 21},
                       {Source::extra_linedrawing, 24},
                       {Source::tuberlin_like, 41},
                       {Source::sketchy_like, 42}};
    } else if (tasks.count(Task::map)) {
        plan.counts = {{Source::psych, 25}, {Source::tuberlin_like, 51}, {Source::sketchy_like, 52}};
    } else {
        plan.counts = {{Source::tuberlin_like, 63}, {Source::sketchy_like, 65}};
    }
    plan.validate(128);
    return plan;
}

BatchPlan BatchPlan::proportional(const BatchPlan& reference, int batch_size) {
    if (batch_size < static_cast<int>(reference.counts.size()))
        throw ConfigError("batch plan: batch size smaller than the number of sources");
    const int ref_total = reference.total();
    BatchPlan plan;
    std::vector<double> remainders;
    int assigned = 0;
    for (const auto& [s, c] : reference.counts) {
        const double exact = static_cast<double>(c) * batch_size / ref_total;
        const int floor_count = static_cast<int>(exact);
        plan.counts.emplace_back(s, floor_count);
        remainders.push_back(exact - floor_count);
        assigned += floor_count;
    }
    // hand out the leftover seats by largest remainder, earlier source on ties
    std::vector<size_t> order(plan.counts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return remainders[a] > remainders[b]; });
    for (size_t i = 0; assigned < batch_size; ++i, ++assigned)
        ++plan.counts[order[i % order.size()]].second;
    plan.validate(batch_size);
    return plan;
}

BatchPlan BatchPlan::for_scale(const TaskSet& tasks, ScalePreset scale, int batch_size) {
    BatchPlan reference = paper(tasks);
    if (scale == ScalePreset::paper && batch_size == 128) return reference;
    return proportional(reference, batch_size);
}

void TrainingCorpus::index() {
    by_source_.clear();
    for (size_t i = 0; i < instances.size(); ++i)
        by_source_[instances[i].source].push_back(static_cast<int>(i));
    image_size = instances.empty() ? 0 : instances[0].image.width;
    for (const auto& inst : instances)
        if (inst.image.width != image_size || inst.image.height != image_size)
            throw DataError("training corpus: mixed image sizes (instance " + inst.id + ")");
}

const std::vector<int>& TrainingCorpus::source_indices(Source s) const {
    auto it = by_source_.find(s);
    return it == by_source_.end() ? empty_ : it->second;
}

std::vector<int> TrainingCorpus::pool(Source s, const std::vector<int>& folds) const {
    std::vector<int> out;
    for (int idx : source_indices(s)) {
        const int fold = instances[static_cast<size_t>(idx)].fold_id;
        if (std::find(folds.begin(), folds.end(), fold) != folds.end()) out.push_back(idx);
    }
    return out;
}

void save_augmented_manifest(const std::filesystem::path& path,
                             const std::vector<CorpusInstance>& instances) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write augmented manifest: " + path.string());
    for (const auto& inst : instances) {
        json j;
        j["id"] = inst.id;
        j["origin_id"] = inst.origin_id;
        j["source"] = to_string(inst.source);
        j["path"] = "images/" + inst.id + ".pgm";
        j["class"] = inst.class_label;
        j["fold"] = inst.fold_id;
        if (inst.coords) j["coords"] = *inst.coords;
        out << j.dump() << "\n";
    }
}

TrainingCorpus load_training_corpus(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open augmented manifest: " + manifest_path.string());
    const auto base = manifest_path.parent_path();
    TrainingCorpus corpus;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("malformed augmented manifest row " + std::to_string(line_no) + ": " +
                            e.what());
        }
        CorpusInstance inst;
        inst.id = j.at("id").get<std::string>();
        inst.origin_id = j.at("origin_id").get<std::string>();
        inst.source = source_from_string(j.at("source").get<std::string>());
        inst.class_label = j.at("class").get<int>();
        inst.fold_id = j.at("fold").get<int>();
        if (j.contains("coords") && !j["coords"].is_null())
            inst.coords = j["coords"].get<std::vector<double>>();
        inst.image = load_pgm(base / j.at("path").get<std::string>());
        corpus.instances.push_back(std::move(inst));
    }
    corpus.index();
    return corpus;
}

Batch compose_batch(const TrainingCorpus& corpus, const std::map<Source, std::vector<int>>& pools,
                    const BatchPlan& plan, double noise_level, bool training, Rng& rng) {
    Batch batch;
    std::vector<const GrayscaleImage*> clean;
    std::vector<GrayscaleImage> noisy;
    for (const auto& [source, count] : plan.counts) {
        auto it = pools.find(source);
        if (it == pools.end() || it->second.empty())
            throw DataError("compose_batch: no training instances for source " + to_string(source));
        std::uniform_int_distribution<size_t> pick(0, it->second.size() - 1);
        for (int k = 0; k < count; ++k) {
            const int idx = it->second[pick(rng)];
            const auto& inst = corpus.instances[static_cast<size_t>(idx)];
            batch.instance_indices.push_back(idx);
            batch.sources.push_back(inst.source);
            batch.labels.push_back(inst.class_label);
            if (inst.coords) batch.coord_rows.push_back(static_cast<int>(clean.size()));
            clean.push_back(&inst.image);
            if (training && noise_level > 0.0) noisy.push_back(salt_pepper(inst.image, rng, noise_level));
        }
    }
    batch.clean_images = images_to_batch(clean);
    if (!noisy.empty()) {
        std::vector<const GrayscaleImage*> ptrs;
        for (const auto& img : noisy) ptrs.push_back(&img);
        batch.images = images_to_batch(ptrs);
    } else {
        batch.images = batch.clean_images;
    }
    if (!batch.coord_rows.empty()) {
        const auto& first = corpus.instances[static_cast<size_t>(
            batch.instance_indices[static_cast<size_t>(batch.coord_rows[0])])];
        const int dim = static_cast<int>(first.coords->size());
        std::vector<double> coords;
        coords.reserve(batch.coord_rows.size() * static_cast<size_t>(dim));
        for (int row : batch.coord_rows) {
            const auto& inst = corpus.instances[static_cast<size_t>(
                batch.instance_indices[static_cast<size_t>(row)])];
            if (static_cast<int>(inst.coords->size()) != dim)
                throw DataError("compose_batch: mixed coordinate dimensions in batch");
            coords.insert(coords.end(), inst.coords->begin(), inst.coords->end());
        }
        batch.coords = Tensor::from_data({static_cast<int>(batch.coord_rows.size()), dim},
                                         std::move(coords));
    }
    return batch;
}

}  // namespace shapemap
