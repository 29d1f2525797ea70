#include "pranet/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pranet/errors.hpp"
#include "pranet/loss.hpp"
#include "pranet/png_io.hpp"
#include "pranet/rng.hpp"

namespace fs = std::filesystem;

namespace pranet {

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os << text;
}

TensorPtrF load_image_tensor(const std::string& path) {
    const ImageU8 img = read_png(path);
    auto t = make_tensor<float>({1, 3, img.height, img.width});
    for (int c = 0; c < 3; ++c) {
        float* plane = t->plane(0, c);
        const int src_c = img.channels == 3 ? c : 0;
        for (long long i = 0; i < static_cast<long long>(img.height) * img.width; ++i)
            plane[i] = static_cast<float>(img.pixels[i * img.channels + src_c]) / 255.0f;
    }
    return t;
}

// predict at the model's input size, then resize back to the native extent
TensorPtrF predict_native(const ParamStore<float>& params, const ModelConfig& model,
                          const Sample& s) {
    TapeF tape;
    tape.set_recording(false);
    const Sample resized = s.image->shape.h == model.input_size &&
                                   s.image->shape.w == model.input_size
                               ? s
                               : resize_sample(s, model.input_size);
    auto p = predict(tape, resized.image, params, model);
    if (p->shape.h != s.mask->shape.h || p->shape.w != s.mask->shape.w)
        p = bilinear_resize(tape, p, s.mask->shape.h, s.mask->shape.w);
    return p;
}

}  // namespace

Dataset resolve_data(const DataSource& src, std::uint64_t seed) {
    if (src.kind == DataSource::Kind::synthetic)
        return synth_generate(seed, src.n, src.size);
    return load_pairs(src.image_dir, src.mask_dir);
}

double validation_dice(const ParamStore<float>& params, const ModelConfig& model,
                       const Dataset& ds) {
    if (ds.empty()) return 0.0;
    double acc = 0.0;
    for (const Sample& s : ds.samples) {
        auto p = predict_native(params, model, s);
        acc += metrics::dice_iou(*p, *s.mask).first;
    }
    return acc / static_cast<double>(ds.size());
}

metrics::MetricReport eval_params(const ParamStore<float>& params, const ModelConfig& model,
                                  const Dataset& ds) {
    if (ds.empty()) throw InvalidArgument("evaluation dataset is empty");
    std::map<std::string, TensorPtrF> preds, gts;
    for (const Sample& s : ds.samples) {
        preds[s.image_id] = predict_native(params, model, s);
        gts[s.image_id] = s.mask;
    }
    return metrics::evaluate_dataset(preds, gts);
}

TrainOutput train_model(const RunConfig& cfg, const Dataset& train_set, const Dataset& val_set,
                        ParamStore<float>* trained_params) {
    cfg.validate();
    if (train_set.empty()) throw InvalidArgument("training set is empty");
    fs::create_directories(cfg.output_dir);

    ParamStore<float> params = init_params<float>(cfg.model, cfg.seed);
    AdamState<float> opt;
    Rng order_rng(splitmix64(cfg.seed ^ 0x545241494eULL));
    const double scales[3] = {0.75, 1.0, 1.25};

    TrainOutput out;
    out.best_checkpoint = (fs::path(cfg.output_dir) / "best.ckpt").string();
    out.final_checkpoint = (fs::path(cfg.output_dir) / "final.ckpt").string();

    std::string log_text;
    double best_dice = -1.0;
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[order_rng.below(i + 1)]);

        double loss_sum = 0.0;
        int batch_count = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const int b = static_cast<int>(stop - start);
            const double scale = scales[order_rng.below(3)];

            try {
                std::vector<Sample> views;
                views.reserve(b);
                for (std::size_t i = start; i < stop; ++i)
                    views.push_back(
                        multiscale_view(train_set.samples[order[i]], scale, cfg.model.input_size));

                const int side = views[0].image->shape.h;
                auto images = make_tensor<float>({b, 3, side, side});
                auto masks = make_tensor<float>({b, 1, side, side});
                for (int i = 0; i < b; ++i) {
                    std::copy(views[i].image->v.begin(), views[i].image->v.end(),
                              images->v.begin() + static_cast<long long>(i) * 3 * side * side);
                    std::copy(views[i].mask->v.begin(), views[i].mask->v.end(),
                              masks->v.begin() + static_cast<long long>(i) * side * side);
                }

                TapeF tape;
                auto outs = forward(tape, images, params, cfg.model);
                auto [loss_node, breakdown] = total_loss(tape, outs, masks);
                tape.backward(loss_node);
                adam_step(params.tensors(), opt, cfg.lr);
                params.zero_grad();
                loss_sum += breakdown.total;
                ++batch_count;
            } catch (const NumericError& e) {
                throw NumericError("epoch " + std::to_string(epoch) + " batch " +
                                   std::to_string(batch_count) + ": " + e.what());
            }
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.mean_loss = loss_sum / batch_count;
        entry.val_dice = validation_dice(params, cfg.model, val_set);
        out.log.push_back(entry);

        std::ostringstream line;
        line << "epoch " << epoch << "/" << cfg.epochs << " meanLoss " << fmt6(entry.mean_loss)
             << " valDice " << fmt6(entry.val_dice);
        log_text += line.str() + "\n";
        std::cout << line.str() << "\n";

        if (entry.val_dice > best_dice) {
            best_dice = entry.val_dice;
            out.best_epoch = epoch;
            save_checkpoint(out.best_checkpoint, params, cfg, fnv1a64(log_text));
        }
    }

    save_checkpoint(out.final_checkpoint, params, cfg, fnv1a64(log_text));

    std::ostringstream lj;
    lj << "{\n  \"epochs\": [\n";
    for (std::size_t i = 0; i < out.log.size(); ++i)
        lj << "    {\"epoch\": " << out.log[i].epoch << ", \"meanLoss\": "
           << fmt6(out.log[i].mean_loss) << ", \"valDice\": " << fmt6(out.log[i].val_dice) << "}"
           << (i + 1 < out.log.size() ? "," : "") << "\n";
    lj << "  ],\n  \"bestEpoch\": " << out.best_epoch << "\n}\n";
    write_text_file((fs::path(cfg.output_dir) / "training_log.json").string(), lj.str());

    if (trained_params) *trained_params = std::move(params);
    return out;
}

TrainOutput cmd_train(const RunConfig& cfg) {
    cfg.validate();
    const Dataset all = resolve_data(cfg.data, cfg.seed);
    auto [train_set, val_set, test_set] = split_80_10_10(all, cfg.seed);
    return train_model(cfg, train_set, val_set);
}

metrics::MetricReport cmd_eval(const std::string& checkpoint_path, const DataSource& source,
                               const std::string& report_path) {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    const ParamStore<float> params = params_from_checkpoint(ck);
    const Dataset ds = resolve_data(source, source.seed);
    if (ds.empty()) throw InvalidArgument("evaluation dataset is empty");
    metrics::MetricReport report = eval_params(params, ck.config.model, ds);
    if (!report_path.empty()) write_text_file(report_path, report.to_json());
    return report;
}

void cmd_infer(const std::string& checkpoint_path, const std::string& input_png,
               const std::string& output_png) {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    const ParamStore<float> params = params_from_checkpoint(ck);
    const ModelConfig& model = ck.config.model;

    auto image = load_image_tensor(input_png);
    const int native_h = image->shape.h, native_w = image->shape.w;

    TapeF tape;
    tape.set_recording(false);
    auto resized = bilinear_resize(tape, image, model.input_size, model.input_size);
    resized->leaf = true;
    auto prob = predict(tape, resized, params, model);
    if (prob->shape.h != native_h || prob->shape.w != native_w)
        prob = bilinear_resize(tape, prob, native_h, native_w);

    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(native_h) * native_w);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = static_cast<std::uint8_t>(std::lround(prob->v[i] * 255.0f));
    write_png_gray(output_png, native_w, native_h, bytes);
}

std::string BenchResult::to_json() const {
    return "{\"meanMs\": " + fmt6(mean_ms) + ", \"fps\": " + fmt6(fps) + "}\n";
}

BenchResult cmd_bench(const std::string& checkpoint_path, int size, int iterations, int warmup) {
    if (size < 16 || size % 16 != 0)
        throw InvalidArgument("bench size must be a positive multiple of 16");
    if (iterations < 1) throw InvalidArgument("bench iterations must be >= 1");
    if (warmup < 0) throw InvalidArgument("bench warmup must be >= 0");

    const Checkpoint ck = load_checkpoint(checkpoint_path);
    const ParamStore<float> params = params_from_checkpoint(ck);
    ModelConfig model = ck.config.model;
    model.input_size = size;

    auto input = make_tensor<float>({1, 3, size, size});
    Rng rng(0xBE9C4ULL);
    for (float& v : input->v) v = static_cast<float>(rng.uniform());

    TapeF tape;
    tape.set_recording(false);
    for (int i = 0; i < warmup; ++i) predict(tape, input, params, model);

    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < iterations; ++i) predict(tape, input, params, model);
    const auto t1 = std::chrono::steady_clock::now();

    BenchResult r;
    r.mean_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / iterations;
    r.fps = 1000.0 / r.mean_ms;
    return r;
}

VariantResult train_eval_variant(const RunConfig& cfg, bool ppd, bool ra,
                                 const std::string& label) {
    RunConfig variant = cfg;
    variant.model.enable_ppd = ppd;
    variant.model.enable_ra = ra;
    variant.validate();

    const Dataset all = resolve_data(variant.data, variant.seed);
    auto [train_set, val_set, test_set] = split_80_10_10(all, variant.seed);

    VariantResult result;
    result.label = label;
    result.ppd = ppd;
    result.ra = ra;
    result.train = train_model(variant, train_set, val_set);

    const ParamStore<float> best =
        params_from_checkpoint(load_checkpoint(result.train.best_checkpoint));
    result.test_report = eval_params(best, variant.model, test_set);
    return result;
}

std::string AblationTable::to_json() const {
    std::ostringstream os;
    os << "{\n  \"rows\": [\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const VariantResult& r = rows[i];
        os << "    {\"label\": \"" << r.label << "\", \"ppd\": " << (r.ppd ? "true" : "false")
           << ", \"ra\": " << (r.ra ? "true" : "false")
           << ", \"meanDice\": " << fmt6(r.test_report.mean_dice)
           << ", \"meanIoU\": " << fmt6(r.test_report.mean_iou)
           << ", \"sAlpha\": " << fmt6(r.test_report.salpha) << "}"
           << (i + 1 < rows.size() ? "," : "") << "\n";
    }
    os << "  ]\n}\n";
    return os.str();
}

std::string AblationTable::to_text() const {
    std::ostringstream os;
    char line[128];
    std::snprintf(line, sizeof(line), "%-22s %10s %10s %10s\n", "setting", "meanDice", "meanIoU",
                  "sAlpha");
    os << line;
    const char* names[4] = {"Backbone", "PPD + Backbone", "RA + Backbone", "PPD + RA + Backbone"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const VariantResult& r = rows[i];
        const std::string setting =
            std::string(i < 4 ? names[i] : "") + " (" + r.label + ")";
        std::snprintf(line, sizeof(line), "%-22s %10s %10s %10s\n", setting.c_str(),
                      fmt6(r.test_report.mean_dice).c_str(), fmt6(r.test_report.mean_iou).c_str(),
                      fmt6(r.test_report.salpha).c_str());
        os << line;
    }
    return os.str();
}

AblationTable cmd_ablate(const RunConfig& cfg) {
    cfg.validate();
    const struct {
        const char* label;
        bool ppd, ra;
    } variants[4] = {{"No.1", false, false},
                     {"No.2", true, false},
                     {"No.3", false, true},
                     {"No.4", true, true}};

    AblationTable table;
    for (int i = 0; i < 4; ++i) {
        RunConfig sub = cfg;
        sub.output_dir =
            (fs::path(cfg.output_dir) / ("no" + std::to_string(i + 1))).string();
        table.rows.push_back(
            train_eval_variant(sub, variants[i].ppd, variants[i].ra, variants[i].label));
    }
    fs::create_directories(cfg.output_dir);
    write_text_file((fs::path(cfg.output_dir) / "ablation.json").string(), table.to_json());
    return table;
}

}  // namespace pranet
