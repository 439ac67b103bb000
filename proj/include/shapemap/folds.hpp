#pragma once

#include <vector>

#include "shapemap/rng.hpp"
#include "shapemap/stimulus.hpp"

namespace shapemap {

// Shuffles each source independently and deals folds round-robin, so
// per-source fold sizes differ by at most one. Runs before augmentation.
void assign_folds(std::vector<StimulusRecord>& records, int k, Rng& rng);

struct FoldRotation {
    std::vector<int> train_folds;
    int validation_fold = -1;
    int test_fold = -1;
};

struct FoldSchedule {
    int k = 5;
    std::vector<FoldRotation> rotations;

    // Rotation r: test = r, validation = (r+1) mod k, train = the rest.
    static FoldSchedule standard(int k = 5);

    // Each fold must appear exactly once as test, once as validation, and
    // k-2 times as training across the rotations.
    void validate() const;
};

}  // namespace shapemap
