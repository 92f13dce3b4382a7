/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/cli.hpp"
#include "cidn/checkpoint.hpp"
#include "cidn/config.hpp"
#include "cidn/errors.hpp"
#include "cidn/log.hpp"
#include "cidn/metrics.hpp"
#include "cidn/service.hpp"
#include "cidn/train.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <fstream>
#include <ostream>

namespace cidn {

namespace fs = std::filesystem;

namespace {

struct TrainArgs {
    std::string config;
    std::string resume;
};

struct EnhanceArgs {
    std::string input, guidance, checkpoint, output;
};

struct EvalArgs {
    std::string config, checkpoint, stub;
};

struct SimulateArgs {
    std::string input, output;
    int64_t shift = 0;
    std::optional<double> gaussian, poisson;
    uint64_t seed = 0;
};

struct ServeArgs {
    std::string checkpoint, gallery, host = "127.0.0.1";
    int port = 8080;
    int64_t max_pixels = 4096 * 4096;
    int max_concurrent = 2;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    const auto rc = load_run_config(a.config);
    if (rc.dataset_root.empty())
        throw ConfigError("dataset_root", "required for training");
    auto manifest = data::load_pairs(rc.dataset_root, data::Split::train);
    if (manifest.ids.empty())
        throw DatasetError("no pairs in '" + rc.dataset_root.string() + "'");
    manifest.recipe = rc.recipe;
    data::PairSource source(manifest);

    TrainOptions options;
    options.output_dir = rc.output_dir;
    options.metrics_log = rc.metrics_log;
    if (!a.resume.empty())
        options.resume_from = fs::path(a.resume);
    const auto result = train(source, rc.train, options);
    out << result.final_checkpoint.string() << '\n';
    return kExitOk;
}

int cmd_enhance(const EnhanceArgs& a, std::ostream& out) {
    const auto low = read_image(a.input);
    const auto guidance = read_image(a.guidance);
    const auto state = load_checkpoint(a.checkpoint);
    const auto result = enhance(low, guidance, state);
    write_png(result, a.output);
    const auto alignment = metrics::histogram_alignment(metrics::luminance_histogram(result),
                                                        metrics::luminance_histogram(guidance));
    out << "alignment " << alignment << '\n';
    return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const auto rc = load_run_config(a.config);
    if (rc.eval_root.empty())
        throw ConfigError("eval_root", "required for evaluation (or set dataset_root)");
    const auto manifest = data::load_pairs(rc.eval_root, data::Split::eval);
    if (manifest.ids.empty())
        throw DatasetError("no pairs in '" + rc.eval_root.string() + "'");
    const auto pairs = data::load_images(manifest);

    metrics::Enhancer enhancer;
    std::optional<ModelState> state;
    if (a.stub == "oracle") {
        enhancer = metrics::oracle_enhancer();
    } else if (a.stub == "identity") {
        enhancer = metrics::identity_enhancer();
    } else if (!a.stub.empty()) {
        throw std::invalid_argument("--stub must be oracle or identity");
    } else {
        if (a.checkpoint.empty())
            throw std::invalid_argument("--checkpoint is required");
        state.emplace(load_checkpoint(a.checkpoint));
        enhancer = [&state](const Image& low, const Image& guidance) { return enhance(low, guidance, *state); };
    }
    const Image guidance = rc.eval_guidance.empty() ? Image() : read_image(rc.eval_guidance);
    const auto report = metrics::evaluate(pairs, enhancer, guidance);
    metrics::write_report(report, rc.report_path);
    metrics::print_report(report, out);
    out << "mean PSNR " << report.mean_psnr << " dB, mean SSIM " << report.mean_ssim << '\n';
    out << "report " << rc.report_path.string() << '\n';
    return kExitOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    if (a.gaussian && a.poisson)
        throw std::invalid_argument("--gaussian and --poisson are mutually exclusive");
    data::CorruptionRecipe recipe;
    recipe.max_shift = a.shift;
    if (a.gaussian) {
        recipe.noise = data::NoiseKind::gaussian;
        recipe.level = *a.gaussian;
    } else if (a.poisson) {
        recipe.noise = data::NoiseKind::poisson;
        recipe.level = *a.poisson;
    }
    recipe.validate();

    const auto manifest = data::load_pairs(a.input, data::Split::train);
    const fs::path root(a.output);
    fs::create_directories(root / "low");
    fs::create_directories(root / "normal");
    std::ofstream log(root / "simulation.csv", std::ios::trunc);
    if (!log)
        throw IoError("cannot write '" + (root / "simulation.csv").string() + "'");
    log << "id,dx,dy,noise,level,seed\n";
    const char* noise_name[] = {"none", "gaussian", "poisson"};

    for (size_t i = 0; i < manifest.ids.size(); ++i) {
        const auto& id = manifest.ids[i];
        auto low = read_image(manifest.low_path(id));
        auto normal = read_image(manifest.normal_path(id));
        data::Shift shift;
        if (recipe.max_shift > 0) {
            auto rng = Rng::derive(a.seed, Stream::simulate, i, 0);
            std::tie(normal, shift) = data::simulate_misalignment(normal, recipe.max_shift, rng);
        }
        auto noise_rng = Rng::derive(a.seed, Stream::simulate, i, 1);
        low = data::apply_noise(low, recipe, noise_rng);
        write_png(low, root / "low" / id);
        write_png(normal, root / "normal" / id);
        log << id << ',' << shift.dx << ',' << shift.dy << ',' << noise_name[static_cast<int>(recipe.noise)] << ','
            << recipe.level << ',' << a.seed << '\n';
    }
    out << manifest.ids.size() << " pairs written to " << root.string() << '\n';
    return kExitOk;
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
    service::ServiceConfig config;
    config.gallery_dir = a.gallery;
    config.max_pixels = a.max_pixels;
    config.max_concurrent = a.max_concurrent;
    service::InferenceService svc(config);
    svc.load(a.checkpoint);
    httplib::Server server;
    svc.mount(server);
    out << "listening on http://" << a.host << ':' << a.port << std::endl;
    if (!server.listen(a.host, a.port))
        throw IoError("cannot listen on " + a.host + ":" + std::to_string(a.port));
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    log::configure_from_env();

    CLI::App app{"Cross-image disentanglement for low-light enhancement", "cidn"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train a model from a run configuration");
    train->add_option("--config", train_args.config, "Run configuration file")->required();
    train->add_option("--resume", train_args.resume, "Continue from this checkpoint");

    EnhanceArgs enhance_args;
    auto* enh = app.add_subcommand("enhance", "Enhance a low-light image with a guidance image");
    enh->add_option("--input", enhance_args.input, "Low-light PNG (sides divisible by 4)")->required();
    enh->add_option("--guidance", enhance_args.guidance, "Normal-light guidance image, any size")->required();
    enh->add_option("--checkpoint", enhance_args.checkpoint, "Model checkpoint")->required();
    enh->add_option("--output", enhance_args.output, "Output PNG")->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Score a checkpoint on the evaluation pairs");
    eval->add_option("--config", eval_args.config, "Run configuration file")->required();
    eval->add_option("--checkpoint", eval_args.checkpoint, "Model checkpoint");
    eval->add_option("--stub", eval_args.stub)->group("");  // test hook: oracle | identity

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Write misaligned / noisy copies of a paired dataset");
    sim->add_option("--input", sim_args.input, "Dataset root with low/ and normal/")->required();
    sim->add_option("--output", sim_args.output, "Output dataset root")->required();
    sim->add_option("--shift", sim_args.shift, "Maximum misalignment of the normal image (pixels)");
    sim->add_option("--gaussian", sim_args.gaussian, "Gaussian noise sigma (8-bit units) on the low image");
    sim->add_option("--poisson", sim_args.poisson, "Poisson noise lambda on the low image");
    sim->add_option("--seed", sim_args.seed, "Random seed");

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "Run the HTTP inference service");
    serve->add_option("--checkpoint", serve_args.checkpoint, "Model checkpoint")->required();
    serve->add_option("--port", serve_args.port, "TCP port");
    serve->add_option("--host", serve_args.host, "Bind address");
    serve->add_option("--gallery", serve_args.gallery, "Directory of guidance images");
    serve->add_option("--max-pixels", serve_args.max_pixels, "Per-image pixel cap");
    serve->add_option("--max-concurrent", serve_args.max_concurrent, "Simultaneous inferences");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (auto* sub : app.get_subcommands())
            target = sub;
        out << target->help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        const CLI::App* target = &app;
        for (auto* sub : app.get_subcommands())
            target = sub;
        err << "error: " << e.what() << "\n\n" << target->help();
        return kExitUser;
    }

    try {
        if (*train)
            return cmd_train(train_args, out);
        if (*enh)
            return cmd_enhance(enhance_args, out);
        if (*eval)
            return cmd_eval(eval_args, out);
        if (*sim)
            return cmd_simulate(sim_args, out);
        if (*serve)
            return cmd_serve(serve_args, out);
    } catch (const CheckpointError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const TrainingError& e) {
        err << "error: training diverged: " << e.what() << '\n';
        return kExitInternal;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const DatasetError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const std::invalid_argument& e) {
        // ShapeError and flag-level validation.
        err << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    err << app.help();
    return kExitUser;
}

} // namespace cidn
