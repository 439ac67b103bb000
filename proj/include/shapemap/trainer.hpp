#pragma once

#include <optional>

#include "shapemap/adam.hpp"
#include "shapemap/batch.hpp"
#include "shapemap/folds.hpp"

namespace shapemap {

// Loss = L_secondary + lambda_map * L_mapping. Pretraining runs with the
// secondary loss alone (no map task).
struct TaskWeights {
    double lambda_map = 0.0;
    Task secondary = Task::classify;
};

inline const std::vector<double> kLambdaGrid = {0.0625, 0.125, 0.25, 0.5, 1.0, 2.0};

struct LossBreakdown {
    Tensor total;
    double total_value = 0.0;
    double secondary_value = 0.0;
    double mapping_value = 0.0;
};

LossBreakdown total_loss(const ForwardOut& out, const Batch& batch, const TaskWeights& weights,
                         const TaskSet& tasks);

struct EpochStats {
    int epoch = -1;
    double train_secondary = 0.0;
    double train_mapping = 0.0;
    double validation = 0.0;
};

struct TrainSettings {
    int epochs = 30;
    int batch_size = 32;
    ScalePreset scale = ScalePreset::desk;
    std::optional<BatchPlan> plan;  // default: BatchPlan::for_scale(tasks, scale, batch_size)
    AdamConfig adam{};
    std::uint64_t seed = 0;
    int eval_batch = 64;
};

struct TrainOutcome {
    std::vector<NamedTensor> best_params;
    int best_epoch = -1;
    double best_validation = 0.0;
    std::vector<EpochStats> curve;
};

// Hard failure (with the offending instance id) when an augmented instance
// does not sit in its origin stimulus' fold.
void audit_fold_isolation(const TrainingCorpus& corpus,
                          const std::vector<StimulusRecord>& originals);

// Evaluation-mode losses over a fixed instance set (no noise, no dropout).
double evaluate_secondary_loss(const Network& net, const TrainingCorpus& corpus,
                               const std::vector<int>& indices, Task secondary,
                               int eval_batch = 64);
double evaluate_mapping_loss(const Network& net, const TrainingCorpus& corpus,
                             const std::vector<int>& indices, int eval_batch = 64);

// 200-epoch-style loop: train on the rotation's training folds, evaluate the
// validation fold each epoch (secondary loss in pretraining, mapping loss in
// multi-task), return the weights of the epoch with the lowest validation
// loss (earliest on ties).
TrainOutcome train_one_setting(Network& net, const TrainingCorpus& corpus,
                               const FoldRotation& rotation, const TaskWeights& weights,
                               const TrainSettings& settings);

struct CvSpec {
    ArchConfig arch;
    NamedConfig hyper;
    TaskSet tasks;
    TaskWeights weights;
    int n_classes = 0;
    int map_dim = 0;
    TrainSettings train;
};

struct CvRotationResult {
    int rotation = -1;
    Network net;  // best-epoch weights loaded
    TrainOutcome outcome;
};

// One trained network per schedule rotation. Worker threads only fan out
// whole rotations; per-rotation seeds are derived, so results do not depend
// on the worker count.
std::vector<CvRotationResult> run_cross_validation(const CvSpec& spec,
                                                   const TrainingCorpus& corpus,
                                                   const std::vector<StimulusRecord>& originals,
                                                   const FoldSchedule& schedule, int workers = 1);

}  // namespace shapemap
