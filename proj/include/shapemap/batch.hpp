#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shapemap/augment.hpp"
#include "shapemap/image.hpp"
#include "shapemap/network.hpp"
#include "shapemap/stimulus.hpp"

namespace shapemap {

// Per-source example counts for one minibatch, in canonical source order.
struct BatchPlan {
    std::vector<std::pair<Source, int>> counts;

    int total() const;
    int count_for(Source s) const;
    void validate(int expected_batch_size) const;

    // The published batch-128 compositions:
    //   classification only          -> TU 63, Sketchy 65
    //   classification + mapping     -> psych 25, TU 51, Sketchy 52
    //   anything with reconstruction -> psych 21, extra 24, TU 41, Sketchy 42
    static BatchPlan paper(const TaskSet& tasks);

    // Largest-remainder rescale of a reference plan to another batch size.
    static BatchPlan proportional(const BatchPlan& reference, int batch_size);

    static BatchPlan for_scale(const TaskSet& tasks, ScalePreset scale, int batch_size);
};

// One augmented training instance held in memory.
struct CorpusInstance {
    std::string id;
    std::string origin_id;
    Source source = Source::psych;
    int class_label = -1;
    int fold_id = -1;
    std::optional<std::vector<double>> coords;
    GrayscaleImage image;
};

struct TrainingCorpus {
    std::vector<CorpusInstance> instances;
    int image_size = 0;

    void index();  // rebuild by_source after filling instances
    const std::vector<int>& source_indices(Source s) const;
    // Instance indices of one source restricted to the given folds.
    std::vector<int> pool(Source s, const std::vector<int>& folds) const;

  private:
    std::map<Source, std::vector<int>> by_source_;
    std::vector<int> empty_;
};

// Augmented-corpus manifest (JSON lines with origin ids), images loaded from
// disk relative to the manifest.
void save_augmented_manifest(const std::filesystem::path& path,
                             const std::vector<CorpusInstance>& instances);
TrainingCorpus load_training_corpus(const std::filesystem::path& manifest_path);

struct Batch {
    Tensor images;        // network inputs; salt-and-pepper applied in training
    Tensor clean_images;  // uncorrupted reconstruction targets
    std::vector<int> labels;
    std::vector<Source> sources;
    std::vector<int> coord_rows;  // batch rows that carry target coordinates
    Tensor coords;                // (#coord_rows) x dim, defined when nonempty
    std::vector<int> instance_indices;
};

// pools: per-source candidate instance indices (already fold-filtered);
// sampling is uniform with replacement inside each source.
Batch compose_batch(const TrainingCorpus& corpus, const std::map<Source, std::vector<int>>& pools,
                    const BatchPlan& plan, double noise_level, bool training, Rng& rng);

}  // namespace shapemap
