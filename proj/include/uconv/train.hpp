#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "uconv/autodiff.hpp"
#include "uconv/graphs.hpp"
#include "uconv/groups.hpp"
#include "uconv/model.hpp"

namespace uconv {

struct TrainSample {
    std::vector<std::shared_ptr<const SparseReal>> ops;
    ComplexDense features;
    double target = 0.0;
};

struct TrainSet {
    std::vector<TrainSample> samples;
    DatasetSplit split;
    std::vector<bool> op_symmetric;
};

/// One operator per sample: the normalized adjacency.
TrainSet make_train_set(const LabeledGraphDataset& ds);

/// Left-regular permutations for s and r on every sample; the layers add the
/// transpose of the r operator, so the move set is {s, r, r^{-1}}. These
/// operators commute with right translation, which preserves the distance
/// target.
TrainSet make_train_set(const GroupDataset& ds);

struct Batch {
    Structure structure;
    ComplexDense features;
    std::vector<double> targets;
};

Batch make_batch(const TrainSet& set, const std::vector<std::size_t>& indices);

struct EpochRecord {
    double train_mae = 0.0;  // mean of the mini-batch losses, weighted by batch size
    double val_mae = 0.0;
    double test_mae = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct TrainOptions {
    std::size_t epochs = 10;
    double lr = 1e-3;
    std::size_t batch_size = 32;
    std::uint64_t shuffle_seed = 0;
    /// Stop after the first epoch whose train_mae is at or below this value.
    double stop_train_mae = -1.0;
    /// Check the isometry of every conv layer after each epoch (unitary configs).
    bool check_isometry = false;
    double isometry_tol = 1e-5;
};

struct TrainResult {
    TrainHistory history;
    ad::ParamSet params;
    /// Largest relative deviation of a conv-layer output norm from the
    /// post-embedding norm, over all isometry checks performed.
    double max_isometry_drift = 0.0;
};

/// MAE of the model on the given sample indices, evaluated in batches.
double evaluate_mae(const ModelConfig& c, const ad::ParamSet& params, const TrainSet& set,
                    const std::vector<std::size_t>& indices, std::size_t batch_size = 64);

/// MAE of the constant predictor that outputs the mean training target.
double trivial_mae(const TrainSet& set, const std::vector<std::size_t>& eval_indices);

/// Mini-batch Adam on the MAE loss over the training split; validation and
/// test MAE after every epoch. Throws NumericError when the isometry check is
/// on and a layer drifts beyond the tolerance.
TrainResult train(const ModelConfig& c, const TrainSet& set, const TrainOptions& opt);

/// Same, starting from the given parameters.
TrainResult train(const ModelConfig& c, const TrainSet& set, const TrainOptions& opt, ad::ParamSet init);

}  // namespace uconv
