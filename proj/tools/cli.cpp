#include "ssanet/cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssanet/arch/forward.hpp"
#include "ssanet/arch/variants.hpp"
#include "ssanet/common/csv.hpp"
#include "ssanet/common/error.hpp"
#include "ssanet/data/synthetic.hpp"
#include "ssanet/engine/gradcheck.hpp"
#include "ssanet/spectral/analysis.hpp"
#include "ssanet/train/ablation.hpp"
#include "ssanet/train/evaluate.hpp"
#include "ssanet/train/trainer.hpp"

namespace ssanet::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kGradTolerance = 1e-4;

/// Removes what a failed subcommand wrote. A target that did not exist
/// before is removed entirely; otherwise only the tracked files go.
class OutputGuard {
public:
    explicit OutputGuard(fs::path target) : target_(std::move(target)), existed_(fs::exists(target_)) {}
    OutputGuard(const OutputGuard&) = delete;
    OutputGuard& operator=(const OutputGuard&) = delete;
    ~OutputGuard() {
        if (committed_) return;
        std::error_code ec;
        if (!existed_) fs::remove_all(target_, ec);
        for (const fs::path& p : tracked_) fs::remove_all(p, ec);
    }

    const fs::path& track(const fs::path& p) {
        tracked_.push_back(p);
        return tracked_.back();
    }
    void commit() { committed_ = true; }

private:
    fs::path target_;
    bool existed_;
    bool committed_ = false;
    std::vector<fs::path> tracked_;
};

void log_config(std::ostream& err, const std::string& command, const ordered_json& cfg) {
    ordered_json line;
    line["command"] = command;
    line["config"] = cfg;
    err << "config: " << line.dump() << '\n';
}

std::vector<std::string> split_list(const std::string& list) {
    std::vector<std::string> items;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) items.push_back(item);
    return items;
}

void ensure_directory_target(const fs::path& dir) {
    if (fs::exists(dir) && !fs::is_directory(dir)) throw InvalidArgument("--out " + dir.string() + " is not a directory");
}

// ---- spectrum -------------------------------------------------------------

struct SpectrumArgs {
    std::size_t length = 64;
    double sigma = 0.70710678;
    std::uint64_t seed = 0;
    std::string out;
};

void run_spectrum(const SpectrumArgs& a, std::ostream& out, std::ostream& err) {
    log_config(err, "spectrum", {{"length", a.length}, {"sigma", a.sigma}, {"seed", a.seed}, {"out", a.out}});
    if (a.length < 8 || a.length % 2 != 0)
        throw InvalidArgument("--length must be even and at least 8, got " + std::to_string(a.length));
    if (!(a.sigma > 0.0) || !std::isfinite(a.sigma)) throw InvalidArgument("--sigma must be positive");
    const spectral::GaussianSpec gauss = spectral::GaussianSpec::with_min_radius(a.sigma);
    if (2 * gauss.radius + 1 > a.length)
        throw InvalidArgument("--sigma " + std::to_string(a.sigma) + " needs a kernel longer than --length");

    const spectral::Signal x = spectral::smooth_random_signal(a.length, a.seed);
    const std::vector<std::pair<std::string, spectral::Signal>> outputs{
        {"input", x},
        {"gaussian", spectral::gaussian_blur(x, gauss)},
        {"comb", spectral::comb_subsample(x)},
        {"decimated", spectral::decimate(x)},
        {"upsampled", spectral::upsample_linear(x)},
        {"ssa", spectral::ssa_downscale(x)},
    };
    const spectral::ApproximationReport report = spectral::approximation_report(x, gauss);
    for (const auto& [name, s] : outputs)
        for (double v : s.samples())
            if (!std::isfinite(v)) throw NumericalError("spectrum: non-finite sample in " + name);
    for (double v : {report.dist_ssa_gauss, report.dist_comb_gauss, report.bandwidth_in, report.bandwidth_decimated})
        if (!std::isfinite(v)) throw NumericalError("spectrum: non-finite report value");

    const fs::path dir(a.out);
    ensure_directory_target(dir);
    OutputGuard guard(dir);
    fs::create_directories(dir);
    for (const auto& [name, s] : outputs) {
        spectral::write_signal_csv(s, guard.track(dir / (name + "_signal.csv")));
        spectral::write_spectrum_csv(spectral::dft(s), guard.track(dir / (name + "_spectrum.csv")));
    }
    ordered_json j;
    j["length"] = a.length;
    j["sigma"] = a.sigma;
    j["seed"] = a.seed;
    j["dist_ssa_gauss"] = report.dist_ssa_gauss;
    j["dist_comb_gauss"] = report.dist_comb_gauss;
    j["bandwidth_in"] = report.bandwidth_in;
    j["bandwidth_decimated"] = report.bandwidth_decimated;
    {
        std::ofstream f(guard.track(dir / "report.json"), std::ios::binary);
        f << j.dump(2) << '\n';
        if (!f) throw DataError("cannot write report.json");
    }
    guard.commit();
    out << "dist_ssa_gauss " << format_double(report.dist_ssa_gauss) << " dist_comb_gauss "
        << format_double(report.dist_comb_gauss) << '\n';
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
    std::size_t n = 30;
    std::size_t size = 128;
    std::uint64_t seed = 0;
    std::string out;
};

void run_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
    log_config(err, "synth", {{"n", a.n}, {"size", a.size}, {"seed", a.seed}, {"out", a.out}});
    if (a.n == 0) throw InvalidArgument("--n must be positive");
    data::SynthConfig cfg;
    cfg.image_size = a.size;
    cfg.seed = a.seed;
    cfg.validate();
    const auto records = data::generate_dataset(cfg, a.n);

    const fs::path dir(a.out);
    ensure_directory_target(dir);
    OutputGuard guard(dir);
    guard.track(dir / "images");
    guard.track(dir / "masks");
    guard.track(dir / "fov");
    data::save_dataset(records, dir);
    guard.commit();
    out << "wrote " << records.size() << " records to " << dir.string() << '\n';
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
    std::string variant = "ssa2";
    std::string data;
    std::size_t train_count = 20;
    std::size_t epochs = 60;
    std::uint64_t seed = 0;
    std::string out;
};

void run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    train::TrainConfig cfg;
    cfg.variant = arch::parse_variant(a.variant);
    cfg.epochs = a.epochs;
    cfg.seed = a.seed;
    log_config(err, "train",
               {{"variant", a.variant}, {"data", a.data}, {"train_count", a.train_count}, {"epochs", a.epochs},
                {"seed", a.seed}, {"learning_rate", cfg.learning_rate}, {"momentum", cfg.momentum},
                {"batch_size", cfg.batch_size}, {"flips", cfg.flips}, {"profile", "desk"}, {"out", a.out}});
    const fs::path ckpt_path(a.out);
    if (fs::is_directory(ckpt_path)) throw InvalidArgument("--out names a directory; expected a checkpoint file");

    if (a.train_count == 0) throw InvalidArgument("--train-count must be positive");
    const data::DatasetSplit split = data::make_split(data::load_dataset(a.data), a.train_count);
    cfg.arch.input_channels = static_cast<std::uint32_t>(split.train.front().image.shape().c);
    const train::TrainResult result = train::train(cfg, split.train, [&](const train::EpochRecord& e) {
        err << "epoch " << e.epoch << " loss " << format_double(e.loss) << " seconds " << format_double(e.seconds)
            << '\n';
    });

    OutputGuard guard(ckpt_path);
    guard.track(ckpt_path);
    fs::path history = ckpt_path;
    history += ".history.csv";
    guard.track(history);
    train::save_checkpoint(result.checkpoint, ckpt_path);
    train::write_history_csv(result.history, history);
    guard.commit();
    out << "checkpoint " << ckpt_path.string() << " step " << result.checkpoint.step << '\n';
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
    std::string ckpt;
    std::string data;
    std::size_t train_count = 0;
    std::string out;
};

void run_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    const std::size_t threads = train::evaluation_threads();
    log_config(err, "eval",
               {{"ckpt", a.ckpt}, {"data", a.data}, {"train_count", a.train_count}, {"threads", threads},
                {"out", a.out}});
    const train::Checkpoint ckpt = train::load_checkpoint(a.ckpt);
    const data::DatasetSplit split = data::make_split(data::load_dataset(a.data), a.train_count);
    const train::Evaluation eval = train::evaluate(ckpt, split.test, threads);

    const fs::path dir(a.out);
    ensure_directory_target(dir);
    OutputGuard guard(dir);
    for (const char* name : {"pr_curve.csv", "roc_curve.csv", "summary.json", "per_image.csv"}) guard.track(dir / name);
    train::write_evaluation(eval, dir);
    guard.commit();
    out << format_double(eval.pooled.pr_auc) << ' ' << format_double(eval.pooled.roc_auc) << ' '
        << format_double(eval.pooled.best_dice) << '\n';
}

// ---- gradcheck ------------------------------------------------------------

struct GradcheckArgs {
    std::string ops;
};

void run_gradcheck(const GradcheckArgs& a, std::ostream& out, std::ostream& err) {
    constexpr std::uint64_t kSeed = 0;
    const engine::GradCheckOptions options;
    log_config(err, "gradcheck",
               {{"ops", a.ops.empty() ? "all" : a.ops}, {"seed", kSeed}, {"epsilon", options.epsilon},
                {"samples_per_probe", options.samples_per_probe}, {"tolerance", kGradTolerance}});

    std::vector<engine::GradCheckResult> primitives = engine::primitive_gradchecks(kSeed, options);
    std::vector<std::string> known;
    for (const auto& r : primitives) known.push_back(r.name);
    known.push_back("network");
    std::vector<std::string> wanted = a.ops.empty() ? known : split_list(a.ops);
    for (const auto& w : wanted)
        if (std::find(known.begin(), known.end(), w) == known.end())
            throw InvalidArgument("unknown op '" + w + "' for --ops");

    std::vector<engine::GradCheckResult> rows;
    for (const auto& r : primitives)
        if (std::find(wanted.begin(), wanted.end(), r.name) != wanted.end()) rows.push_back(r);
    if (std::find(wanted.begin(), wanted.end(), "network") != wanted.end()) {
        const arch::NetworkSpec spec = arch::build_variant(arch::VariantId::MsResNetSsa2, arch::ArchConfig::desk());
        engine::GradCheckResult net{"network", 0.0, 0, 0};
        for (const auto& r : arch::network_gradcheck(spec, kSeed, 16, options)) {
            net.max_rel_error = std::max(net.max_rel_error, r.max_rel_error);
            net.checked += r.checked;
            net.skipped += r.skipped;
        }
        rows.push_back(net);
    }

    bool ok = true;
    out << "op max_rel_error checked skipped status\n";
    for (const auto& r : rows) {
        const bool pass = r.max_rel_error < kGradTolerance && r.checked > 0;
        ok = ok && pass;
        out << r.name << ' ' << format_double(r.max_rel_error) << ' ' << r.checked << ' ' << r.skipped << ' '
            << (pass ? "ok" : "FAIL") << '\n';
    }
    if (!ok) throw NumericalError("gradient check exceeded relative error " + format_double(kGradTolerance));
}

// ---- ablate ---------------------------------------------------------------

struct AblateArgs {
    std::string data;
    std::string variants = "ssa2,ssa3,dec,noms,driu,driu-noms";
    std::size_t train_count = 0;
    std::size_t epochs = 60;
    std::uint64_t seed = 0;
    std::string out;
};

void run_ablate(const AblateArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<arch::VariantId> variants;
    for (const auto& name : split_list(a.variants)) variants.push_back(arch::parse_variant(name));
    if (variants.empty()) throw InvalidArgument("--variants is empty");
    auto records = data::load_dataset(a.data);
    const std::size_t train_count = a.train_count == 0 ? std::max<std::size_t>(1, records.size() / 2) : a.train_count;

    train::TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.seed = a.seed;
    cfg.arch.input_channels = static_cast<std::uint32_t>(records.front().image.shape().c);
    log_config(err, "ablate",
               {{"data", a.data}, {"variants", a.variants}, {"train_count", train_count}, {"epochs", a.epochs},
                {"seed", a.seed}, {"learning_rate", cfg.learning_rate}, {"momentum", cfg.momentum},
                {"batch_size", cfg.batch_size}, {"flips", cfg.flips}, {"profile", "desk"}, {"out", a.out}});
    const data::DatasetSplit split = data::make_split(std::move(records), train_count);

    const auto rows = train::ablation_sweep(variants, cfg, split, [&](const train::AblationRow& r) {
        err << "variant " << arch::variant_name(r.variant) << ' ' << r.status;
        if (!r.error.empty()) err << ": " << r.error;
        err << '\n';
    });
    const fs::path path(a.out);
    OutputGuard guard(path);
    train::write_ablation_csv(rows, path);
    guard.commit();
    const std::size_t failed =
        static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.status != "ok"; }));
    out << "wrote " << rows.size() << " rows (" << failed << " failed) to " << path.string() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scale-space approximated retinal vessel segmentation toolkit", "ssanet"};
    app.require_subcommand(1);

    SpectrumArgs spectrum;
    auto* sp = app.add_subcommand("spectrum", "Resampling spectra of a seeded signal");
    sp->add_option("--length", spectrum.length, "Signal length (even, >= 8)")->capture_default_str();
    sp->add_option("--sigma", spectrum.sigma, "Gaussian reference sigma")->capture_default_str();
    sp->add_option("--seed", spectrum.seed, "Signal seed")->capture_default_str();
    sp->add_option("--out", spectrum.out, "Output directory")->required();

    SynthArgs synth;
    auto* sy = app.add_subcommand("synth", "Generate a synthetic vessel dataset");
    sy->add_option("--n", synth.n, "Number of images")->capture_default_str();
    sy->add_option("--size", synth.size, "Image side (multiple of 4)")->capture_default_str();
    sy->add_option("--seed", synth.seed, "Dataset seed")->capture_default_str();
    sy->add_option("--out", synth.out, "Output dataset directory")->required();

    TrainArgs tr;
    auto* tc = app.add_subcommand("train", "Train one variant");
    tc->add_option("--variant", tr.variant, "ssa2|ssa3|dec|noms|driu|driu-noms")->capture_default_str();
    tc->add_option("--data", tr.data, "Dataset directory")->required();
    tc->add_option("--train-count", tr.train_count, "Leading records (by id) used for training")->capture_default_str();
    tc->add_option("--epochs", tr.epochs, "Epochs")->capture_default_str();
    tc->add_option("--seed", tr.seed, "Training seed")->capture_default_str();
    tc->add_option("--out", tr.out, "Checkpoint path")->required();

    EvalArgs ev;
    auto* ec = app.add_subcommand("eval", "Evaluate a checkpoint");
    ec->add_option("--ckpt", ev.ckpt, "Checkpoint path")->required();
    ec->add_option("--data", ev.data, "Dataset directory")->required();
    ec->add_option("--train-count", ev.train_count, "Leading records (by id) to skip")->capture_default_str();
    ec->add_option("--out", ev.out, "Output directory")->required();

    GradcheckArgs gc;
    auto* gcc = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
    gcc->add_option("--ops", gc.ops, "Comma-separated op names (default: all, plus 'network')");

    AblateArgs ab;
    auto* ac = app.add_subcommand("ablate", "Train and evaluate several variants");
    ac->add_option("--data", ab.data, "Dataset directory")->required();
    ac->add_option("--variants", ab.variants, "Comma-separated variants")->capture_default_str();
    ac->add_option("--train-count", ab.train_count, "Training records (default: half)");
    ac->add_option("--epochs", ab.epochs, "Epochs per variant")->capture_default_str();
    ac->add_option("--seed", ab.seed, "Shared seed")->capture_default_str();
    ac->add_option("--out", ab.out, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*sp) run_spectrum(spectrum, out, err);
        if (*sy) run_synth(synth, out, err);
        if (*tc) run_train(tr, out, err);
        if (*ec) run_eval(ev, out, err);
        if (*gcc) run_gradcheck(gc, out, err);
        if (*ac) run_ablate(ab, out, err);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
    return kOk;
}

}  // namespace ssanet::cli
