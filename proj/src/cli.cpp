#include "trd/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "trd/diffusion.hpp"
#include "trd/pgm.hpp"
#include "trd/training.hpp"

namespace trd::cli {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> list_pgm(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: '" + dir + "'");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .pgm files in '" + dir + "'");
    return files;
}

struct Dataset {
    std::vector<TrainSample> samples;
    std::vector<std::string> names;
};

// Degrades each clean image per the task. Per-image noise seeds are
// seed + index over the lexicographically sorted file list, so a dataset
// directory plus a seed fully determines the samples.
Dataset build_dataset(const std::string& dir, Task task, double sigma, int quality,
                      uint64_t seed) {
    Dataset ds;
    auto files = list_pgm(dir);
    for (size_t i = 0; i < files.size(); ++i) {
        Image clean = load_pgm(files[i].string());
        TrainSample s;
        if (task == Task::denoise) {
            s.truth = clean;
            s.input = add_noise(clean, sigma, seed + i);
        } else {
            Image padded = pad_to_block_multiple(clean);
            DegradeResult dr = jpeg_degrade(padded, quality);
            s.truth = padded;
            s.input = dr.decoded;
            s.box = dr.box;
        }
        ds.samples.push_back(std::move(s));
        ds.names.push_back(files[i].filename().string());
    }
    return ds;
}

double vec_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void write_manifest(const std::string& model_path, const std::string& config_echo,
                    const TrainReport& report, double wall_seconds, const TrdModel& model) {
    std::ofstream out(model_path + ".manifest.txt");
    if (!out) throw DataError("cannot write manifest next to '" + model_path + "'");
    out << "trd training manifest\n" << config_echo;
    out << "warm_start: stage t>1 initialized from trained stage t-1 parameters\n";
    out << "threads: " << report.threads_used << "\n";
    for (size_t t = 0; t < report.greedy.size(); ++t) {
        out << "greedy_stage_" << t + 1 << "_cost:";
        for (double c : report.greedy[t].cost_history) out << ' ' << c;
        out << "\n";
    }
    if (!report.joint.cost_history.empty()) {
        out << "joint_cost:";
        for (double c : report.joint.cost_history) out << ' ' << c;
        out << "\n";
    }
    for (int t = 0; t < model.stage_count; ++t) {
        const StageParams& sp = model.stages[t];
        double cn = 0.0, wn = 0.0;
        for (const auto& c : sp.coeffs) cn += vec_norm(c) * vec_norm(c);
        for (const auto& mix : sp.mixtures) wn += vec_norm(mix.weights) * vec_norm(mix.weights);
        out << "stage_" << t + 1 << "_norms: coeffs=" << std::sqrt(cn)
            << " weights=" << std::sqrt(wn);
        if (model.task == Task::denoise) out << " lambda=" << sp.lambda();
        out << "\n";
    }
    out << "wall_time_seconds: " << wall_seconds << "\n";
}

int cmd_train(const std::string& task_s, double sigma, int quality, int stages, int filter_size,
              int filters, const std::string& rbf_kind, int rbf_count, double rbf_radius,
              double rbf_gamma, const std::string& mode, int lbfgs_iters,
              const std::string& data_dir, const std::string& holdout_dir, uint64_t seed,
              const std::string& out_path, bool freeze_influence, int threads) {
    Task task = task_s == "denoise" ? Task::denoise : Task::deblock;
    ModelConfig mc;
    mc.task = task;
    mc.sigma = sigma;
    mc.quality = quality;
    mc.stages = stages;
    mc.filter_size = filter_size;
    mc.filters = filters;
    mc.rbf = RbfConfig::make(rbf_kind == "gaussian" ? RbfKind::gaussian : RbfKind::triangular,
                             rbf_count, rbf_radius, rbf_gamma);

    Dataset train_ds = build_dataset(data_dir, task, sigma, quality, seed);

    TrainConfig tc;
    tc.lbfgs.max_iters = lbfgs_iters;
    tc.train_influence = !freeze_influence;
    tc.threads = threads;

    std::ostringstream echo;
    echo << "task: " << task_s;
    if (task == Task::denoise)
        echo << " sigma=" << sigma;
    else
        echo << " quality=" << quality;
    echo << "\nstages: " << stages << "\nfilter_size: " << filter_size
         << "\nfilters: " << filters << "\nrbf: " << rbf_kind << " M=" << rbf_count
         << " R=" << rbf_radius << " gamma=" << mc.rbf.gamma << "\nmode: " << mode
         << "\nlbfgs_iters: " << lbfgs_iters << "\nfreeze_influence: " << freeze_influence
         << "\nseed: " << seed << "\ndata: " << data_dir << " (" << train_ds.samples.size()
         << " images)\n";

    auto t0 = std::chrono::steady_clock::now();
    TrainReport report;
    TrdModel model = greedy_train(train_ds.samples, init_model(mc), tc, &report);
    if (mode == "joint") model = joint_train(train_ds.samples, model, tc, &report);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    save_model(model, out_path);
    write_manifest(out_path, echo.str(), report, wall, model);

    std::printf("trained %s model: %d stage(s), final cost %.6g\n", task_s.c_str(),
                model.stage_count,
                mode == "joint" ? report.joint_final_cost : report.greedy_final_cost);
    if (!holdout_dir.empty()) {
        Dataset hold = build_dataset(holdout_dir, task, sigma, quality, seed + 1000003);
        double in_db = 0.0, out_db = 0.0;
        for (const auto& s : hold.samples) {
            InferAux aux;
            if (task == Task::deblock) aux = s.box;
            Image restored = infer(model, s.input, aux);
            in_db += psnr(s.input, s.truth);
            out_db += psnr(restored, s.truth);
        }
        std::printf("holdout: input %.2f dB -> output %.2f dB (%zu images)\n",
                    in_db / hold.samples.size(), out_db / hold.samples.size(),
                    hold.samples.size());
    }
    return 0;
}

int cmd_restore(const std::string& model_path, const std::string& input_path,
                const std::string& output_path, int stop_at, bool expect_deblock) {
    TrdModel model = load_model(model_path);
    if ((model.task == Task::deblock) != expect_deblock)
        throw DataError(expect_deblock ? "model is not a deblocking model"
                                       : "model is not a denoising model");
    if (stop_at >= 0 && model.trained_mode == TrainedMode::joint)
        throw DataError("jointly trained models must run all stages; --stages is only valid "
                        "for greedily trained models");
    Image input = load_pgm(input_path);
    InferAux aux;
    if (model.task == Task::deblock) {
        // strict mode: re-derive the quantization box by re-quantizing the
        // decoded image with our own simulator
        Image padded = pad_to_block_multiple(input);
        aux = jpeg_degrade(padded, model.quality).box;
    }
    Image out = infer(model, input, aux, nullptr, stop_at);
    save_pgm(out, output_path);
    return 0;
}

int cmd_degrade(const std::string& task_s, double sigma, int quality, uint64_t seed,
                const std::string& input_path, const std::string& output_path) {
    Image img = load_pgm(input_path);
    if (task_s == "denoise") {
        save_pgm(add_noise(img, sigma, seed), output_path);
    } else {
        save_pgm(jpeg_degrade(img, quality).decoded, output_path);
    }
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_dir, uint64_t seed) {
    TrdModel model = load_model(model_path);
    Dataset ds = build_dataset(data_dir, model.task, model.sigma, model.quality, seed);
    double in_sum = 0.0, out_sum = 0.0;
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const TrainSample& s = ds.samples[i];
        InferAux aux;
        if (model.task == Task::deblock) aux = s.box;
        Image restored = infer(model, s.input, aux);
        double din = psnr(s.input, s.truth);
        double dout = psnr(restored, s.truth);
        in_sum += din;
        out_sum += dout;
        std::printf("%s %.2f %.2f\n", ds.names[i].c_str(), din, dout);
    }
    std::printf("average %.2f %.2f\n", in_sum / ds.samples.size(), out_sum / ds.samples.size());
    return 0;
}

int cmd_gradcheck(int instances, double h, double tol, uint64_t seed) {
    struct Family {
        const char* name;
        Task task;
        int stages;
    };
    const Family families[] = {{"denoise-stage", Task::denoise, 1},
                               {"deblock-stage", Task::deblock, 1},
                               {"joint-T3", Task::denoise, 3}};
    bool ok = true;
    for (const auto& fam : families) {
        double worst = 0.0;
        size_t excluded = 0;
        for (int i = 0; i < instances; ++i) {
            CheckInstance inst = make_check_instance(fam.task, fam.stages, seed + i);
            TrainConfig cfg;
            GradProblem p = fam.stages == 1
                                ? make_stage_problem(inst.model, 0, inst.samples, cfg)
                                : make_joint_problem(inst.model, inst.samples, cfg);
            GradCheckReport rep = grad_check(p, p.x0, h);
            worst = std::max(worst, rep.max_rel_err);
            excluded += rep.excluded.size();
        }
        bool pass = worst < tol;
        ok = ok && pass;
        std::printf("%-14s max rel err %.3e over %d instances (%zu coordinate(s) excluded) %s\n",
                    fam.name, worst, instances, excluded, pass ? "PASS" : "FAIL");
    }
    return ok ? 0 : 3;
}

int cmd_export_influence(const std::string& model_path, const std::string& out_dir) {
    TrdModel model = load_model(model_path);
    fs::create_directories(out_dir);
    const double R = model.rbf.radius;
    for (int t = 0; t < model.stage_count; ++t) {
        for (int i = 0; i < model.filters_per_stage; ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "stage%02d_filter%02d.csv", t + 1, i + 1);
            std::ofstream out(fs::path(out_dir) / name);
            if (!out) throw DataError("cannot write CSV in '" + out_dir + "'");
            out << "z,phi,rho\n";
            const RbfMixture& mix = model.stages[t].mixtures[i];
            for (int k = 0; k < 1000; ++k) {
                double z = -R + 2.0 * R * k / 999.0;
                char line[128];
                std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g\n", z, phi_eval(mix, z),
                              rho_eval(mix, z));
                out << line;
            }
        }
    }
    return 0;
}

int cmd_bench(const std::string& model_path, int stages, int filter_size, int filters) {
    TrdModel model;
    if (!model_path.empty()) {
        model = load_model(model_path);
    } else {
        ModelConfig mc;
        mc.stages = stages;
        mc.filter_size = filter_size;
        mc.filters = filters;
        mc.rbf = RbfConfig::make(RbfKind::gaussian, 63, 310.0);
        model = init_model(mc);
    }
    for (int n : {256, 512, 1024}) {
        Image img(n, n);
        std::mt19937_64 gen{uint64_t(n)};
        for (double& v : img.data) v = double(gen() % 256);
        InferAux aux;
        if (model.task == Task::deblock) aux = jpeg_degrade(img, model.quality).box;
        auto t0 = std::chrono::steady_clock::now();
        Image out = infer(model, img, aux);
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%4d x %-4d  %d stage(s)  %.3f s\n", n, n, model.stage_count, dt);
        (void)out;
    }
    return 0;
}

} // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"trainable nonlinear reaction diffusion for image restoration"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train a diffusion model");
    std::string task = "denoise", rbf_kind = "gaussian", mode = "greedy";
    std::string data_dir, holdout_dir, out_path = "model.json";
    double sigma = 25.0, rbf_radius = 310.0, rbf_gamma = 0.0;
    int quality = 10, stages = 5, filter_size = 5, filters = 24, rbf_count = 63;
    int lbfgs_iters = 200, threads = 0;
    uint64_t seed = 0;
    bool freeze_influence = false;
    train->add_option("--task", task)->check(CLI::IsMember({"denoise", "deblock"}));
    train->add_option("--sigma", sigma, "noise level (denoise)");
    train->add_option("--quality", quality, "JPEG quality (deblock)")
        ->check(CLI::Range(1, 100));
    train->add_option("--stages", stages)->check(CLI::PositiveNumber);
    train->add_option("--filter-size", filter_size)->check(CLI::IsMember({3, 5, 7, 9}));
    train->add_option("--filters", filters)->check(CLI::PositiveNumber);
    train->add_option("--rbf", rbf_kind)->check(CLI::IsMember({"gaussian", "triangular"}));
    train->add_option("--rbf-count", rbf_count)->check(CLI::Range(2, 100000));
    train->add_option("--rbf-radius", rbf_radius)->check(CLI::PositiveNumber);
    train->add_option("--rbf-gamma", rbf_gamma, "0 = center spacing");
    train->add_option("--mode", mode)->check(CLI::IsMember({"greedy", "joint"}));
    train->add_option("--lbfgs-iters", lbfgs_iters)->check(CLI::PositiveNumber);
    train->add_option("--data", data_dir, "directory of clean training .pgm images")
        ->required();
    train->add_option("--holdout", holdout_dir, "directory of clean held-out images");
    train->add_option("--seed", seed);
    train->add_option("--out", out_path);
    train->add_flag("--freeze-influence", freeze_influence,
                    "train filters only, influence functions stay at the plain init");
    train->add_option("--threads", threads);

    // denoise / deblock
    std::string model_path, input_path, output_path;
    int stop_at = -1;
    auto* denoise = app.add_subcommand("denoise", "run a denoising model on a PGM image");
    denoise->add_option("--model", model_path)->required();
    denoise->add_option("--input", input_path)->required();
    denoise->add_option("--output", output_path)->required();
    denoise->add_option("--stages", stop_at, "stop after this many stages (greedy models only)");
    auto* deblock = app.add_subcommand(
        "deblock", "run a deblocking model on a decoded-JPEG PGM image (strict mode: the "
                   "quantization box is re-derived with the built-in simulator)");
    deblock->add_option("--model", model_path)->required();
    deblock->add_option("--input", input_path)->required();
    deblock->add_option("--output", output_path)->required();
    deblock->add_option("--stages", stop_at);

    // degrade
    auto* degrade = app.add_subcommand("degrade", "apply noise or JPEG simulation to an image");
    degrade->add_option("--task", task)->check(CLI::IsMember({"denoise", "deblock"}));
    degrade->add_option("--sigma", sigma);
    degrade->add_option("--quality", quality)->check(CLI::Range(1, 100));
    degrade->add_option("--seed", seed);
    degrade->add_option("--input", input_path)->required();
    degrade->add_option("--output", output_path)->required();

    // eval
    auto* eval = app.add_subcommand("eval", "per-image and mean PSNR of a model over a dataset");
    eval->add_option("--model", model_path)->required();
    eval->add_option("--data", data_dir)->required();
    eval->add_option("--seed", seed);

    // gradcheck
    int instances = 20;
    double h = 1e-4, tol = 1e-5;
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient certification");
    gradcheck->add_option("--instances", instances)->check(CLI::PositiveNumber);
    gradcheck->add_option("--h", h)->check(CLI::PositiveNumber);
    gradcheck->add_option("--tol", tol)->check(CLI::PositiveNumber);
    gradcheck->add_option("--seed", seed);

    // export-influence
    std::string export_dir = "influence";
    auto* exp = app.add_subcommand("export-influence",
                                   "CSV of z, phi(z), rho(z) per (stage, filter)");
    exp->add_option("--model", model_path)->required();
    exp->add_option("--out", export_dir);

    // bench
    auto* bench = app.add_subcommand("bench", "time inference on synthetic images");
    bench->add_option("--model", model_path);
    bench->add_option("--stages", stages);
    bench->add_option("--filter-size", filter_size)->check(CLI::IsMember({3, 5, 7, 9}));
    bench->add_option("--filters", filters);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (train->parsed())
            return cmd_train(task, sigma, quality, stages, filter_size, filters, rbf_kind,
                             rbf_count, rbf_radius, rbf_gamma, mode, lbfgs_iters, data_dir,
                             holdout_dir, seed, out_path, freeze_influence, threads);
        if (denoise->parsed()) return cmd_restore(model_path, input_path, output_path, stop_at, false);
        if (deblock->parsed()) return cmd_restore(model_path, input_path, output_path, stop_at, true);
        if (degrade->parsed())
            return cmd_degrade(task, sigma, quality, seed, input_path, output_path);
        if (eval->parsed()) return cmd_eval(model_path, data_dir, seed);
        if (gradcheck->parsed()) return cmd_gradcheck(instances, h, tol, seed);
        if (exp->parsed()) return cmd_export_influence(model_path, export_dir);
        if (bench->parsed()) return cmd_bench(model_path, stages, filter_size, filters);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args);
}

} // namespace trd::cli
