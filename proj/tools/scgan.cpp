// Command-line entry point: synth-data | train | translate | evaluate.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error. Every
// subcommand prints its fully-resolved configuration before acting, and all
// randomness flows from explicit seeds.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "scgan/scgan.hpp"

namespace {

void print_resolved(const char* command, const nlohmann::json& cfg) {
    nlohmann::json line = {{"command", command}, {"resolved_config", cfg}};
    std::cout << line.dump() << "\n";
}

int run_synth_data(const std::string& out, const std::string& task_str,
                   std::size_t n_train, std::size_t n_test, std::size_t size,
                   std::uint64_t seed, bool overwrite) {
    scgan::SyntheticTask task;
    task.kind = scgan::parse_task(task_str);
    task.n_train = n_train;
    task.n_test = n_test;
    task.size = size;
    task.seed = seed;
    print_resolved("synth-data",
                   {{"out", out},
                    {"task", scgan::task_name(task.kind)},
                    {"n_train", n_train},
                    {"n_test", n_test},
                    {"size", size},
                    {"seed", seed},
                    {"overwrite", overwrite}});
    scgan::generate_synthetic(task, out, overwrite);
    std::cout << "wrote dataset to " << out << "\n";
    return 0;
}

int run_train(const std::string& config_path, std::size_t stop_after) {
    scgan::TrainConfig cfg = scgan::parse_config_file(config_path);
    cfg.validate();
    print_resolved("train", {{"config_file", config_path},
                             {"model", scgan::model_name(cfg)},
                             {"stop_after_epoch", stop_after},
                             {"config", cfg.to_json()}});
    scgan::Trainer trainer(cfg);
    scgan::TrainState final_state = trainer.fit(
        stop_after == 0 ? SIZE_MAX : stop_after);
    std::cout << "finished at epoch " << final_state.epoch << ", step "
              << final_state.global_step << "\n";
    return 0;
}

int run_translate(const std::string& checkpoint, const std::string& input_dir,
                  const std::string& output_dir,
                  const std::string& direction_str, std::size_t image_size) {
    const scgan::Direction direction = scgan::parse_direction(direction_str);
    // a trainer checkpoint records its image size; a bare parameter
    // directory relies on the flag
    std::ifstream sf(checkpoint + "/state.json");
    if (sf.good()) {
        nlohmann::json state = nlohmann::json::parse(sf);
        image_size =
            state.at("config").at("image_size").get<std::size_t>();
    }
    print_resolved("translate", {{"checkpoint", checkpoint},
                                 {"input_dir", input_dir},
                                 {"output_dir", output_dir},
                                 {"direction", direction_str},
                                 {"image_size", image_size}});
    scgan::TranslationModel<float> model(image_size, 0);
    scgan::load_model_params(checkpoint, model);
    scgan::Generator<float>& gen = direction == scgan::Direction::a_to_b
                                       ? model.gen_ab
                                       : model.gen_ba;
    const std::size_t n = scgan::translate_directory(
        input_dir, output_dir, scgan::generator_fn(gen));
    std::cout << "translated " << n << " images to " << output_dir << "\n";
    return 0;
}

int run_evaluate(const std::string& real_dir, const std::string& fake_dir,
                 const std::string& extractor_str, std::uint64_t seed,
                 std::size_t subset_size, std::size_t n_subsets,
                 std::uint64_t kid_seed, const std::string& weights,
                 const std::string& out_file) {
    const scgan::ExtractorKind kind = scgan::parse_extractor(extractor_str);
    print_resolved("evaluate", {{"real_dir", real_dir},
                                {"fake_dir", fake_dir},
                                {"extractor", extractor_str},
                                {"seed", seed},
                                {"subset_size", subset_size},
                                {"n_subsets", n_subsets},
                                {"kid_seed", kid_seed},
                                {"weights", weights},
                                {"out", out_file}});
    scgan::FeatureExtractor extractor(kind, seed, weights);
    scgan::EvaluateOptions opts;
    opts.subset_size = subset_size;
    opts.n_subsets = n_subsets;
    opts.kid_seed = kid_seed;
    scgan::MetricReport report =
        scgan::evaluate_dirs(real_dir, fake_dir, extractor, opts);
    const std::string json = report.to_json().dump(2);
    std::cout << json << "\n";
    if (!out_file.empty()) {
        std::ofstream f(out_file);
        SCGAN_CHECK(f.good(), scgan::IoError, "cannot write report to ",
                    out_file);
        f << json << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unpaired image translation: data synthesis, training, "
                 "translation, evaluation"};
    app.require_subcommand(1);

    // synth-data
    auto* synth = app.add_subcommand("synth-data",
                                     "Generate a synthetic two-domain dataset");
    std::string synth_out, synth_task = "channel-swap";
    std::size_t synth_n_train = 200, synth_n_test = 50, synth_size = 64;
    std::uint64_t synth_seed = 1;
    bool synth_overwrite = false;
    synth->add_option("--out", synth_out, "Output dataset root")->required();
    synth->add_option("--task", synth_task, "channel-swap or stripes");
    synth->add_option("--n-train", synth_n_train, "Training images per domain");
    synth->add_option("--n-test", synth_n_test, "Test images per domain");
    synth->add_option("--size", synth_size, "Image size in pixels");
    synth->add_option("--seed", synth_seed, "Generation seed");
    synth->add_flag("--overwrite", synth_overwrite,
                    "Replace an existing non-empty output directory");

    // train
    auto* train = app.add_subcommand("train", "Train a translation model");
    std::string train_config;
    std::size_t train_stop_after = 0;
    train->add_option("--config", train_config, "Path to key = value config")
        ->required();
    train->add_option("--stop-after-epoch", train_stop_after,
                      "Stop after this many epochs (run stays resumable; "
                      "0 = run to completion)");

    // translate
    auto* translate =
        app.add_subcommand("translate", "Translate a directory of images");
    std::string tr_checkpoint, tr_input, tr_output, tr_direction;
    std::size_t tr_image_size = 64;
    translate->add_option("--checkpoint", tr_checkpoint, "Checkpoint directory")
        ->required();
    translate->add_option("--input-dir", tr_input, "Input PNG directory")
        ->required();
    translate->add_option("--output-dir", tr_output, "Output PNG directory")
        ->required();
    translate->add_option("--direction", tr_direction, "AtoB or BtoA")
        ->required();
    translate->add_option("--image-size", tr_image_size,
                          "Model image size (ignored if the checkpoint "
                          "records one)");

    // evaluate
    auto* evaluate =
        app.add_subcommand("evaluate", "Compute FID/KID between two image "
                                       "directories");
    std::string ev_real, ev_fake, ev_extractor = "random-conv", ev_weights,
                            ev_out;
    std::uint64_t ev_seed = 2021, ev_kid_seed = 0;
    std::size_t ev_subset = 100, ev_n_subsets = 10;
    evaluate->add_option("--real-dir", ev_real, "Reference image directory")
        ->required();
    evaluate->add_option("--fake-dir", ev_fake, "Candidate image directory")
        ->required();
    evaluate->add_option("--extractor", ev_extractor,
                         "random-conv, flatten-downsample, external-file");
    evaluate->add_option("--seed", ev_seed, "Extractor seed");
    evaluate->add_option("--subset-size", ev_subset, "KID subset size");
    evaluate->add_option("--n-subsets", ev_n_subsets, "KID subset count");
    evaluate->add_option("--kid-seed", ev_kid_seed, "KID subset seed");
    evaluate->add_option("--weights", ev_weights,
                         "Weight directory for external-file");
    evaluate->add_option("--out", ev_out, "Also write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (synth->parsed())
            return run_synth_data(synth_out, synth_task, synth_n_train,
                                  synth_n_test, synth_size, synth_seed,
                                  synth_overwrite);
        if (train->parsed()) return run_train(train_config, train_stop_after);
        if (translate->parsed())
            return run_translate(tr_checkpoint, tr_input, tr_output,
                                 tr_direction, tr_image_size);
        if (evaluate->parsed())
            return run_evaluate(ev_real, ev_fake, ev_extractor, ev_seed,
                                ev_subset, ev_n_subsets, ev_kid_seed,
                                ev_weights, ev_out);
    } catch (const scgan::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const scgan::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2; // no subcommand
}
