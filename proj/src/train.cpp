#include "uconv/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace uconv {

TrainSet make_train_set(const LabeledGraphDataset& ds) {
    TrainSet set;
    set.split = ds.split;
    set.op_symmetric = {true};
    for (const auto& s : ds.samples) {
        auto a = std::make_shared<const SparseReal>(normalize_adjacency(s.graph.adjacency));
        set.samples.push_back({{a}, s.features, s.target});
    }
    return set;
}

TrainSet make_train_set(const GroupDataset& ds) {
    TrainSet set;
    set.split = ds.split;
    set.op_symmetric = {true, false};
    const std::size_t n = ds.group.order / 2;
    auto ts = std::make_shared<const SparseReal>(
        permutation_matrix(regular_left_action(ds.group, dihedral_element(n, 0, true))));
    auto tr = std::make_shared<const SparseReal>(
        permutation_matrix(regular_left_action(ds.group, dihedral_element(n, 1, false))));
    for (const auto& s : ds.samples) set.samples.push_back({{ts, tr}, s.features, s.target});
    return set;
}

Batch make_batch(const TrainSet& set, const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw InputError("make_batch: empty index list");
    const std::size_t n_ops = set.op_symmetric.size();
    const std::size_t in_dim = set.samples[indices.front()].features.cols;
    std::vector<std::size_t> offsets{0};
    for (std::size_t idx : indices) offsets.push_back(offsets.back() + set.samples.at(idx).features.rows);

    std::vector<std::shared_ptr<const SparseReal>> ops;
    for (std::size_t k = 0; k < n_ops; ++k) {
        std::vector<const SparseReal*> blocks;
        for (std::size_t idx : indices) blocks.push_back(set.samples[idx].ops.at(k).get());
        ops.push_back(std::make_shared<const SparseReal>(block_diagonal(blocks)));
    }

    Batch b;
    b.features = ComplexDense(offsets.back(), in_dim);
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const ComplexDense& f = set.samples[indices[j]].features;
        if (f.cols != in_dim) throw ShapeError("make_batch: samples disagree on the feature width");
        std::copy(f.re.begin(), f.re.end(), b.features.re.begin() + static_cast<std::ptrdiff_t>(offsets[j] * in_dim));
        std::copy(f.im.begin(), f.im.end(), b.features.im.begin() + static_cast<std::ptrdiff_t>(offsets[j] * in_dim));
        b.targets.push_back(set.samples[indices[j]].target);
    }
    b.structure = make_structure(std::move(ops), std::move(offsets));
    return b;
}

double evaluate_mae(const ModelConfig& c, const ad::ParamSet& params, const TrainSet& set,
                    const std::vector<std::size_t>& indices, std::size_t batch_size) {
    if (indices.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t start = 0; start < indices.size(); start += batch_size) {
        const std::size_t end = std::min(indices.size(), start + batch_size);
        const std::vector<std::size_t> chunk(indices.begin() + static_cast<std::ptrdiff_t>(start),
                                             indices.begin() + static_cast<std::ptrdiff_t>(end));
        const Batch b = make_batch(set, chunk);
        const std::vector<double> pred = predict(c, params, b.structure, b.features);
        for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(pred[i] - b.targets[i]);
    }
    return total / static_cast<double>(indices.size());
}

double trivial_mae(const TrainSet& set, const std::vector<std::size_t>& eval_indices) {
    if (set.split.train.empty() || eval_indices.empty()) throw InputError("trivial_mae: empty split");
    double mean = 0.0;
    for (std::size_t i : set.split.train) mean += set.samples[i].target;
    mean /= static_cast<double>(set.split.train.size());
    double total = 0.0;
    for (std::size_t i : eval_indices) total += std::abs(set.samples[i].target - mean);
    return total / static_cast<double>(eval_indices.size());
}

TrainResult train(const ModelConfig& c, const TrainSet& set, const TrainOptions& opt) {
    return train(c, set, opt, init_params(c));
}

TrainResult train(const ModelConfig& c, const TrainSet& set, const TrainOptions& opt, ad::ParamSet init) {
    if (set.samples.empty() || set.split.train.empty()) throw InputError("train: empty training split");
    if (set.op_symmetric != c.op_symmetric) throw InputError("train: dataset operators do not match the model config");
    if (opt.batch_size == 0) throw InputError("train: batch size must be positive");

    TrainResult result;
    result.params = std::move(init);
    ad::AdamState state = ad::adam_init(result.params);
    const ad::AdamHyper hyper{opt.lr, 0.9, 0.999, 1e-8};
    std::mt19937_64 rng(mix_seed(opt.shuffle_seed));
    std::vector<std::size_t> order = set.split.train;

    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
            const std::size_t end = std::min(order.size(), start + opt.batch_size);
            const std::vector<std::size_t> chunk(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                 order.begin() + static_cast<std::ptrdiff_t>(end));
            const Batch b = make_batch(set, chunk);
            LossAndGrad lg = mae_loss_and_grad(c, result.params, b.structure, b.features, b.targets);
            if (!std::isfinite(lg.loss)) throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
            loss_sum += lg.loss * static_cast<double>(chunk.size());
            ad::adam_step(result.params, lg.grads, state, hyper);
        }

        if (opt.check_isometry) {
            const std::size_t probe = std::min<std::size_t>(order.size(), opt.batch_size);
            const Batch b = make_batch(set, std::vector<std::size_t>(set.split.train.begin(),
                                                                     set.split.train.begin() + static_cast<std::ptrdiff_t>(probe)));
            ForwardTrace trace;
            predict(c, result.params, b.structure, b.features, &trace);
            for (double norm : trace.layer_norms) {
                const double drift = std::abs(norm - trace.embed_norm) / std::max(trace.embed_norm, 1e-300);
                result.max_isometry_drift = std::max(result.max_isometry_drift, drift);
                if (drift > opt.isometry_tol) {
                    throw NumericError("train: conv layer norm drifted by " + std::to_string(drift) + " at epoch " +
                                       std::to_string(epoch));
                }
            }
        }

        EpochRecord rec;
        rec.train_mae = loss_sum / static_cast<double>(order.size());
        rec.val_mae = evaluate_mae(c, result.params, set, set.split.val);
        rec.test_mae = evaluate_mae(c, result.params, set, set.split.test);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.epochs.push_back(rec);
        if (opt.stop_train_mae >= 0.0 && rec.train_mae <= opt.stop_train_mae) break;
    }
    return result;
}

}  // namespace uconv
