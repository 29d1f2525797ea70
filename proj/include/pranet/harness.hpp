#pragma once

#include <string>
#include <vector>

#include "pranet/checkpoint.hpp"
#include "pranet/config.hpp"
#include "pranet/data.hpp"
#include "pranet/metrics.hpp"

namespace pranet {

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0.0;
    double val_dice = 0.0;
};

struct TrainOutput {
    std::vector<EpochLog> log;
    int best_epoch = 0;
    std::string final_checkpoint;
    std::string best_checkpoint;
};

// synthetic sources generate from `seed`; directory sources load from disk
Dataset resolve_data(const DataSource& src, std::uint64_t seed);

// Core training driver on pre-split data. Parameters start fan-in uniform from
// the run seed; every epoch reshuffles and each batch trains at one of the
// scales {0.75, 1, 1.25}. Writes best.ckpt at each new best validation dice
// (ties keep the earlier epoch), final.ckpt and training_log.json at the end.
// A non-finite loss or gradient aborts with the offending batch named.
TrainOutput train_model(const RunConfig& cfg, const Dataset& train_set, const Dataset& val_set,
                        ParamStore<float>* trained_params = nullptr);

// predictions at the model's input size, scored at native mask size
metrics::MetricReport eval_params(const ParamStore<float>& params, const ModelConfig& model,
                                  const Dataset& ds);

double validation_dice(const ParamStore<float>& params, const ModelConfig& model,
                       const Dataset& ds);

// resolves cfg's data source with the run seed, splits 80/10/10, trains
TrainOutput cmd_train(const RunConfig& cfg);

metrics::MetricReport cmd_eval(const std::string& checkpoint_path, const DataSource& source,
                               const std::string& report_path);

void cmd_infer(const std::string& checkpoint_path, const std::string& input_png,
               const std::string& output_png);

struct BenchResult {
    double mean_ms = 0.0;
    double fps = 0.0;
    std::string to_json() const;
};

BenchResult cmd_bench(const std::string& checkpoint_path, int size, int iterations, int warmup);

struct VariantResult {
    std::string label;
    bool ppd = false, ra = false;
    metrics::MetricReport test_report;  // best-val checkpoint scored on the test split
    TrainOutput train;
};

// One ablation variant end to end: train on cfg's data with the toggles
// applied, then score the best-val checkpoint on the test split.
VariantResult train_eval_variant(const RunConfig& cfg, bool ppd, bool ra,
                                 const std::string& label);

struct AblationTable {
    std::vector<VariantResult> rows;
    std::string to_json() const;
    std::string to_text() const;
};

// No.1 backbone only, No.2 +PPD, No.3 +RA, No.4 full; same seed and data.
// Writes ablation.json under cfg.output_dir.
AblationTable cmd_ablate(const RunConfig& cfg);

}  // namespace pranet
