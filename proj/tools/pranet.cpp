#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pranet/errors.hpp"
#include "pranet/harness.hpp"

namespace {

// "n,size,seed"
pranet::DataSource parse_synthetic_triple(const std::string& triple) {
    pranet::DataSource src;
    src.kind = pranet::DataSource::Kind::synthetic;
    int n = 0, size = 0;
    unsigned long long seed = 0;
    if (std::sscanf(triple.c_str(), "%d,%d,%llu", &n, &size, &seed) != 3)
        throw pranet::InvalidArgument("--synthetic expects n,size,seed; got \"" + triple + "\"");
    src.n = n;
    src.size = size;
    src.seed = seed;
    return src;
}

pranet::DataSource make_source(const std::string& image_dir, const std::string& mask_dir,
                               const std::string& synthetic) {
    if (!synthetic.empty()) {
        if (!image_dir.empty() || !mask_dir.empty())
            throw pranet::InvalidArgument("give either --synthetic or directory flags, not both");
        return parse_synthetic_triple(synthetic);
    }
    if (image_dir.empty() || mask_dir.empty())
        throw pranet::InvalidArgument(
            "a data source is required: --image-dir with --mask-dir, or --synthetic n,size,seed");
    pranet::DataSource src;
    src.kind = pranet::DataSource::Kind::directories;
    src.image_dir = image_dir;
    src.mask_dir = mask_dir;
    return src;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PraNet-style polyp segmentation: training, evaluation and inference"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, image_dir, mask_dir, synthetic;
    std::string input_path, output_path;

    auto* train = app.add_subcommand("train", "train a model from a JSON run config");
    train->add_option("--config", config_path, "run config JSON file")->required();

    auto* eval = app.add_subcommand("eval", "score a checkpoint against a dataset");
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    eval->add_option("--image-dir", image_dir, "directory of input PNGs");
    eval->add_option("--mask-dir", mask_dir, "directory of ground-truth PNGs");
    eval->add_option("--synthetic", synthetic, "synthetic source as n,size,seed");
    std::string report_path = "eval_report.json";
    eval->add_option("--output", report_path, "report file (default eval_report.json)");

    auto* infer = app.add_subcommand("infer", "write a probability map PNG for one image");
    infer->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    infer->add_option("--input", input_path, "input PNG")->required();
    infer->add_option("--output", output_path, "output grayscale PNG")->required();

    auto* bench = app.add_subcommand("bench", "measure single-image inference speed");
    bench->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    int bench_size = 64, bench_iters = 50, bench_warmup = 5;
    bench->add_option("--size", bench_size, "square input extent (multiple of 16)");
    bench->add_option("--iters", bench_iters, "timed iterations");
    bench->add_option("--warmup", bench_warmup, "untimed warmup iterations");

    auto* ablate = app.add_subcommand("ablate", "train and score the four component variants");
    ablate->add_option("--config", config_path, "run config JSON file")->required();

    auto* synth = app.add_subcommand("synth", "export a synthetic dataset as PNG pairs");
    synth->add_option("--image-dir", image_dir, "output image directory")->required();
    synth->add_option("--mask-dir", mask_dir, "output mask directory")->required();
    int synth_n = 250, synth_size = 64;
    std::uint64_t synth_seed = 1;
    synth->add_option("--n", synth_n, "number of samples");
    synth->add_option("--size", synth_size, "square extent (multiple of 16, >= 32)");
    synth->add_option("--seed", synth_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (train->parsed()) {
            pranet::cmd_train(pranet::RunConfig::from_json_file(config_path));
        } else if (eval->parsed()) {
            const auto source = make_source(image_dir, mask_dir, synthetic);
            const auto report = pranet::cmd_eval(checkpoint_path, source, report_path);
            std::cout << report.to_json();
        } else if (infer->parsed()) {
            pranet::cmd_infer(checkpoint_path, input_path, output_path);
        } else if (bench->parsed()) {
            std::cout << pranet::cmd_bench(checkpoint_path, bench_size, bench_iters, bench_warmup)
                             .to_json();
        } else if (ablate->parsed()) {
            const auto table = pranet::cmd_ablate(pranet::RunConfig::from_json_file(config_path));
            std::cout << table.to_text();
            std::cout << table.to_json();
        } else if (synth->parsed()) {
            pranet::export_png_pairs(pranet::synth_generate(synth_seed, synth_n, synth_size),
                                     image_dir, mask_dir);
        }
    } catch (const pranet::InvalidArgument& e) {
        std::cerr << "error (invalid argument): " << e.what() << "\n";
        return 2;
    } catch (const pranet::NumericError& e) {
        std::cerr << "error (numeric): " << e.what() << "\n";
        return 4;
    } catch (const pranet::IoError& e) {
        std::cerr << "error (io): " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
