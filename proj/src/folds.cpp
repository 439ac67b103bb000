#include "shapemap/folds.hpp"

#include <algorithm>
#include <map>

namespace shapemap {

void assign_folds(std::vector<StimulusRecord>& records, int k, Rng& rng) {
    if (k < 2) throw ConfigError("assign_folds: need at least 2 folds, got " + std::to_string(k));
    std::map<Source, std::vector<size_t>> by_source;
    for (size_t i = 0; i < records.size(); ++i) by_source[records[i].source].push_back(i);
    for (auto& [source, indices] : by_source) {
        std::shuffle(indices.begin(), indices.end(), rng);
        for (size_t j = 0; j < indices.size(); ++j)
            records[indices[j]].fold_id = static_cast<int>(j % static_cast<size_t>(k));
    }
}

FoldSchedule FoldSchedule::standard(int k) {
    if (k < 3) throw ConfigError("fold schedule: need at least 3 folds for train/val/test");
    FoldSchedule s;
    s.k = k;
    for (int r = 0; r < k; ++r) {
        FoldRotation rot;
        rot.test_fold = r;
        rot.validation_fold = (r + 1) % k;
        for (int f = 0; f < k; ++f)
            if (f != rot.test_fold && f != rot.validation_fold) rot.train_folds.push_back(f);
        s.rotations.push_back(std::move(rot));
    }
    s.validate();
    return s;
}

void FoldSchedule::validate() const {
    if (static_cast<int>(rotations.size()) != k)
        throw ConfigError("fold schedule: expected " + std::to_string(k) + " rotations");
    std::vector<int> test_uses(k, 0), val_uses(k, 0), train_uses(k, 0);
    for (const auto& rot : rotations) {
        if (rot.test_fold < 0 || rot.test_fold >= k || rot.validation_fold < 0 ||
            rot.validation_fold >= k)
            throw ConfigError("fold schedule: fold index out of range");
        if (rot.test_fold == rot.validation_fold)
            throw ConfigError("fold schedule: test and validation folds coincide");
        ++test_uses[rot.test_fold];
        ++val_uses[rot.validation_fold];
        std::vector<bool> seen(k, false);
        seen[rot.test_fold] = seen[rot.validation_fold] = true;
        for (int f : rot.train_folds) {
            if (f < 0 || f >= k || seen[f])
                throw ConfigError("fold schedule: bad training fold list");
            seen[f] = true;
            ++train_uses[f];
        }
        if (static_cast<int>(rot.train_folds.size()) != k - 2)
            throw ConfigError("fold schedule: rotation must train on k-2 folds");
    }
    for (int f = 0; f < k; ++f)
        if (test_uses[f] != 1 || val_uses[f] != 1 || train_uses[f] != k - 2)
            throw ConfigError("fold schedule: fold " + std::to_string(f) +
                              " usage counts are not (1 test, 1 validation, k-2 train)");
}

}  // namespace shapemap
