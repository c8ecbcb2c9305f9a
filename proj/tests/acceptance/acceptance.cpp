// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criterion numbers given as arguments restrict the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ssanet/arch/forward.hpp"
#include "ssanet/arch/variants.hpp"
#include "ssanet/common/rng.hpp"
#include "ssanet/data/synthetic.hpp"
#include "ssanet/engine/gradcheck.hpp"
#include "ssanet/engine/ops.hpp"
#include "ssanet/metrics/metrics.hpp"
#include "ssanet/spectral/analysis.hpp"
#include "ssanet/spectral/resampling.hpp"
#include "ssanet/train/ablation.hpp"
#include "ssanet/train/evaluate.hpp"
#include "ssanet/train/trainer.hpp"

using namespace ssanet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

std::vector<double> samples(const spectral::Signal& s) { return {s.samples().begin(), s.samples().end()}; }

// ---- 1 ----------------------------------------------------------------------

Outcome spectral_identities() {
    double worst_fold = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const spectral::Signal x = spectral::Signal::random(64, seed);
        const auto X = oracle::dft(samples(x));
        const auto Y = oracle::dft(samples(spectral::comb_subsample(x)));
        for (std::size_t k = 0; k < 64; ++k)
            worst_fold = std::max(worst_fold, std::abs(Y[k] - (X[k] + X[(k + 32) % 64]) / 2.0));
    }
    // cos(pi/4 n) over 64 samples sits in bin 8; decimated to 32 samples the
    // peak must sit at angular frequency pi/2.
    const spectral::Spectrum d = spectral::dft(spectral::decimate(spectral::Signal::cosine(64, 8.0)));
    std::size_t peak = 0;
    for (std::size_t k = 0; k <= d.size() / 2; ++k)
        if (std::abs(d[k]) > std::abs(d[peak])) peak = k;
    const double peak_freq = d.frequency(peak);
    const bool pass = worst_fold <= 1e-9 && peak_freq == std::numbers::pi / 2;
    return {pass, fmt("max folding error %.3e (<= 1e-9), decimated peak at %.6f rad (pi/2 = %.6f)", worst_fold,
                      peak_freq, std::numbers::pi / 2)};
}

// ---- 2 ----------------------------------------------------------------------

// Bandwidth is measured on DFT bins; at 64 samples a one-bin shift moves the
// ratio by ~14%, at 256 samples by ~4%.
constexpr std::size_t kBandLimitedLength = 256;

Outcome bandwidth_doubling() {
    const auto t0 = Clock::now();
    std::size_t in_band = 0, in_range = 0;
    double lo = 1e9, hi = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const spectral::Signal x = spectral::smooth_random_signal(kBandLimitedLength, seed);
        const double b_in = spectral::energy_bandwidth(spectral::dft(x));
        const double b_dec = spectral::energy_bandwidth(spectral::dft(spectral::decimate(x)));
        if (b_in <= std::numbers::pi / 2) ++in_band;
        const double ratio = b_dec / b_in;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        if (ratio >= 1.8 && ratio <= 2.2) ++in_range;
    }
    const double elapsed = seconds_since(t0);
    return {in_band == 100 && in_range == 100 && elapsed < 10.0,
            fmt("length %zu: %zu/100 inputs with bandwidth <= pi/2, %zu/100 ratios in [1.8, 2.2] (observed %.4f..%.4f), %.2f s",
                kBandLimitedLength, in_band, in_range, lo, hi, elapsed)};
}

// ---- 3 ----------------------------------------------------------------------

Outcome ssa_approximates_gaussian() {
    const auto gauss = spectral::GaussianSpec::with_min_radius(1.0 / std::numbers::sqrt2);
    std::size_t wins = 0;
    double worst_ratio = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto r = spectral::approximation_report(spectral::smooth_random_signal(kBandLimitedLength, seed), gauss);
        if (r.dist_ssa_gauss < r.dist_comb_gauss) ++wins;
        worst_ratio = std::max(worst_ratio, r.dist_ssa_gauss / r.dist_comb_gauss);
    }

    const spectral::Signal alt = spectral::Signal::alternating(64);
    const spectral::Signal s = spectral::ssa_downscale(alt);
    const bool ssa_constant = std::all_of(s.samples().begin(), s.samples().end(), [](double v) { return v == 1.0; });
    const spectral::Signal g = spectral::gaussian_blur(alt, gauss);
    double amplitude = 0.0;
    for (double v : g.samples()) amplitude = std::max(amplitude, std::abs(v));
    // Independent value: sum_k w_k (-1)^k / sum_k w_k with w_k = exp(-k^2),
    // |k| <= ceil(3 sigma) = 3.
    long double num = 0.0L, den = 0.0L;
    for (int k = -3; k <= 3; ++k) {
        const long double w = std::exp(-static_cast<long double>(k * k));
        num += (k % 2 == 0 ? 1.0L : -1.0L) * w;
        den += w;
    }
    const double expected = static_cast<double>(num / den);
    const bool amp_ok = std::abs(amplitude - expected) < 1e-12 && std::abs(amplitude - 0.1696) < 5e-5;
    return {wins == 100 && ssa_constant && amp_ok,
            fmt("ssa closer than comb in %zu/100 (worst ssa/comb distance ratio %.3f); alternating: ssa constant 1 = "
                "%s, gaussian amplitude %.6f (oracle %.6f, expected ~0.1696)",
                wins, worst_ratio, ssa_constant ? "yes" : "no", amplitude, expected)};
}

// ---- 4 ----------------------------------------------------------------------

Outcome interpolation_response() {
    constexpr std::size_t n = 64;
    std::vector<double> kernel(n, 0.0);
    kernel[n - 1] = 0.5;
    kernel[0] = 1.0;
    kernel[1] = 0.5;
    const spectral::Spectrum k = spectral::dft(spectral::Signal(kernel));
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double omega = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
        worst = std::max(worst, std::abs(k[i] - std::complex<double>(1.0 + std::cos(omega), 0.0)));
    }
    const double nyquist = std::abs(k[n / 2]);
    return {worst <= 1e-12 && nyquist <= 1e-12,
            fmt("max |K - (1 + cos w)| = %.3e (<= 1e-12), |K(pi)| = %.3e", worst, nyquist)};
}

// ---- 5 ----------------------------------------------------------------------

Outcome gradient_correctness() {
    const auto t0 = Clock::now();
    const engine::GradCheckOptions options;
    bool pass = options.samples_per_probe == 50;
    double worst_primitive = 0.0;
    std::string worst_name;
    std::size_t checked = 0, skipped = 0;
    for (const auto& r : engine::primitive_gradchecks(0, options)) {
        pass = pass && r.checked > 0 && r.max_rel_error < 1e-4;
        if (r.max_rel_error >= worst_primitive) worst_primitive = r.max_rel_error, worst_name = r.name;
        checked += r.checked;
        skipped += r.skipped;
    }
    const arch::NetworkSpec spec = arch::build_variant(arch::VariantId::MsResNetSsa2, arch::ArchConfig::desk());
    double worst_network = 0.0;
    std::size_t tensors = 0;
    for (const auto& r : arch::network_gradcheck(spec, 0, 16, options)) {
        pass = pass && r.checked > 0 && r.max_rel_error < 1e-4;
        worst_network = std::max(worst_network, r.max_rel_error);
        checked += r.checked;
        skipped += r.skipped;
        ++tensors;
    }
    const double elapsed = seconds_since(t0);
    pass = pass && elapsed < 60.0;
    return {pass, fmt("primitives max rel err %.3e (%s), SSA2 network max rel err %.3e over %zu tensors; %zu "
                      "coordinates checked, %zu skipped at kinks; %.1f s",
                      worst_primitive, worst_name.c_str(), worst_network, tensors, checked, skipped, elapsed)};
}

// ---- 6 ----------------------------------------------------------------------

Outcome convolution_oracle() {
    Rng rng(6);
    auto random_tensor = [&](engine::Shape s) {
        engine::Tensor t(s);
        for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
        return t;
    };
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t n = 1; n <= 2; ++n)
        for (std::size_t c = 1; c <= 4; ++c)
            for (std::size_t h = 1; h <= 8; ++h)
                for (std::size_t w = 1; w <= 8; ++w)
                    for (std::size_t k : {1u, 3u})
                        for (int stride : {1, 2}) {
                            const engine::Tensor x = random_tensor({n, c, h, w});
                            const engine::Tensor wt = random_tensor({4, c, k, k});
                            const engine::Tensor b = random_tensor({4, 1, 1, 1});
                            engine::Tape tape;
                            const engine::Tensor& y = tape.value(engine::conv2d(
                                tape, tape.constant(x), tape.constant(wt), tape.constant(b), stride,
                                static_cast<int>(k / 2)));
                            const engine::Tensor ref =
                                oracle::conv2d(x, wt, {b[0], b[1], b[2], b[3]}, stride, static_cast<int>(k / 2));
                            if (!(y.shape() == ref.shape())) return {false, "shape mismatch at " + x.shape().str()};
                            for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(y[i] - ref[i]));
                            ++cases;
                        }
    return {worst <= 1e-10, fmt("%zu shapes up to 2x4x8x8, kernels 1 and 3, strides 1 and 2: max abs err %.3e",
                                cases, worst)};
}

// ---- 7 ----------------------------------------------------------------------

engine::Tensor row(const std::vector<double>& v) { return engine::Tensor({1, 1, 1, v.size()}, v); }

Outcome metrics_oracle() {
    std::vector<std::string> failures;
    Rng rng(7);
    std::vector<double> gt(400), fov(400, 1.0), inverted(400);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        gt[i] = rng.uniform() < 0.2 ? 1.0 : 0.0;
        inverted[i] = 1.0 - gt[i];
    }
    const auto perfect = metrics::sweep_curves(row(gt), row(gt), row(fov));
    const auto worst = metrics::sweep_curves(row(inverted), row(gt), row(fov));
    if (perfect.roc_auc != 1.0) failures.push_back("perfect roc " + std::to_string(perfect.roc_auc));
    if (perfect.best_dice != 1.0) failures.push_back("perfect dice " + std::to_string(perfect.best_dice));
    if (worst.roc_auc != 0.0) failures.push_back("inverted roc " + std::to_string(worst.roc_auc));

    const auto hand = metrics::sweep_curves(row({0.9, 0.8, 0.3, 0.1}), row({1, 0, 1, 0}), row({1, 1, 1, 1}), {0.5});
    const auto& p = hand.pr_curve.at(0);
    const oracle::Counts o = oracle::confusion({0.9, 0.8, 0.3, 0.1}, {1, 0, 1, 0}, {1, 1, 1, 1}, 0.5);
    if (p.tp != 1 || p.fp != 1 || p.fn != 1 || p.tn != 1 || o.tp != 1 || o.fp != 1 || o.fn != 1 || o.tn != 1 ||
        metrics::dice(p.tp, p.fp, p.fn) != 0.5)
        failures.push_back("hand example");

    double worst_identity = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng r(seed);
        std::vector<double> prob(500), truth(500), mask(500);
        for (std::size_t i = 0; i < prob.size(); ++i) {
            prob[i] = r.uniform();
            truth[i] = r.uniform() < 0.3 ? 1.0 : 0.0;
            mask[i] = r.uniform() < 0.9 ? 1.0 : 0.0;
            if (mask[i] == 0.0) truth[i] = 0.0;
        }
        const auto rep = metrics::sweep_curves(row(prob), row(truth), row(mask));
        for (const auto& pt : rep.pr_curve) {
            const oracle::Counts c = oracle::confusion(prob, truth, mask, pt.threshold);
            if (c.tp != pt.tp || c.fp != pt.fp || c.fn != pt.fn || c.tn != pt.tn)
                failures.push_back("counts differ from brute force at seed " + std::to_string(seed));
            const double precision = c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / (c.tp + c.fp);
            const double recall = c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / (c.tp + c.fn);
            const double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
            worst_identity = std::max(worst_identity, std::abs(f1 - metrics::dice(pt.tp, pt.fp, pt.fn)));
        }
    }
    if (worst_identity > 1e-12) failures.push_back("dice/f1 identity");
    std::string detail = fmt("perfect roc %.1f dice %.1f, inverted roc %.1f, hand tp/fp/fn/tn %llu/%llu/%llu/%llu "
                             "dice %.2f, max |dice - f1| %.2e over 20x256 thresholds",
                             perfect.roc_auc, perfect.best_dice, worst.roc_auc,
                             static_cast<unsigned long long>(p.tp), static_cast<unsigned long long>(p.fp),
                             static_cast<unsigned long long>(p.fn), static_cast<unsigned long long>(p.tn),
                             metrics::dice(p.tp, p.fp, p.fn), worst_identity);
    for (const auto& f : failures) detail += "; " + f;
    return {failures.empty(), detail};
}

// ---- 8 ----------------------------------------------------------------------

Outcome desk_training() {
    const auto t0 = Clock::now();
    data::SynthConfig sc;
    sc.seed = 1;
    const data::DatasetSplit split = data::make_split(data::generate_dataset(sc, 30), 20);

    train::TrainConfig cfg;
    const train::TrainResult trained = train::train(cfg, split.train, [](const train::EpochRecord& e) {
        std::fprintf(stderr, "  criterion 8: epoch %zu loss %.5f (%.1f s)\n", e.epoch, e.loss, e.seconds);
    });
    const double train_seconds = seconds_since(t0);
    const auto& h = trained.history;
    if (h.size() != 60) return {false, "history has " + std::to_string(h.size()) + " epochs"};
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < 5; ++i) first += h[i].loss / 5.0, last += h[h.size() - 5 + i].loss / 5.0;

    const double roc = train::evaluate(trained.checkpoint, split.test, 1).pooled.roc_auc;
    train::TrainConfig untrained_cfg = cfg;
    untrained_cfg.epochs = 0;
    const double roc0 =
        train::evaluate(train::train(untrained_cfg, split.train).checkpoint, split.test, 1).pooled.roc_auc;
    const double total = seconds_since(t0);
    const bool pass = last < 0.5 * first && roc >= 0.90 && roc > roc0;
    return {pass, fmt("loss first-5 mean %.5f, last-5 mean %.5f (ratio %.3f < 0.5); test roc %.4f (>= 0.90), "
                      "untrained roc %.4f; training %.1f min, total %.1f min (target < 15 min)",
                      first, last, last / first, roc, roc0, train_seconds / 60.0, total / 60.0)};
}

// ---- 9 ----------------------------------------------------------------------

Outcome ablation_structure() {
    const arch::ArchConfig desk = arch::ArchConfig::desk();
    const auto ssa2 = arch::build_variant(arch::VariantId::MsResNetSsa2, desk);
    const auto dec = arch::build_variant(arch::VariantId::MsResNetDec, desk);
    const std::size_t p_ssa2 = arch::param_count(ssa2), p_dec = arch::param_count(dec);
    const std::size_t rf_ssa2 = arch::receptive_field(ssa2), rf_dec = arch::receptive_field(dec);

    // Reduced sweep: 12 images of 64x64, 6/6 split, 10 epochs.
    auto sweep_split = [](std::uint64_t seed) {
        data::SynthConfig sc;
        sc.image_size = 64;
        sc.seed = seed;
        return data::make_split(data::generate_dataset(sc, 12), 6);
    };
    train::TrainConfig cfg;
    cfg.epochs = 10;
    const std::vector<arch::VariantId> all{arch::VariantId::MsResNetSsa2, arch::VariantId::MsResNetSsa3,
                                           arch::VariantId::MsResNetDec,  arch::VariantId::ResNetNoMs,
                                           arch::VariantId::DriuLite,     arch::VariantId::DriuNoMs};
    const auto rows = train::ablation_sweep(all, cfg, sweep_split(0));
    bool complete = rows.size() == all.size();
    std::string table;
    for (const auto& r : rows) {
        complete = complete && r.status == "ok" && std::isfinite(r.pr_auc) && std::isfinite(r.roc_auc) &&
                   std::isfinite(r.best_dice);
        table += fmt(" %s(roc %.4f pr %.4f dice %.4f)", std::string(arch::variant_name(r.variant)).c_str(), r.roc_auc,
                     r.pr_auc, r.best_dice);
    }

    std::string ordering;
    std::size_t ssa2_ahead = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        std::vector<train::AblationRow> pair;
        if (seed == 0) {
            pair = {rows.at(0), rows.at(2)};
        } else {
            train::TrainConfig c = cfg;
            c.seed = seed;
            pair = train::ablation_sweep({arch::VariantId::MsResNetSsa2, arch::VariantId::MsResNetDec}, c,
                                         sweep_split(seed));
        }
        const bool ahead = pair[0].roc_auc >= pair[1].roc_auc;
        ssa2_ahead += ahead ? 1 : 0;
        ordering += fmt(" seed %llu ssa2 %.4f vs dec %.4f%s;", static_cast<unsigned long long>(seed), pair[0].roc_auc,
                        pair[1].roc_auc, ahead ? "" : " (dec ahead)");
    }
    const bool pass = p_ssa2 == p_dec && rf_dec > rf_ssa2 && complete;
    return {pass, fmt("params ssa2 %zu = dec %zu; receptive field dec %zu > ssa2 %zu; sweep complete: %s;", p_ssa2,
                      p_dec, rf_dec, rf_ssa2, complete ? "yes" : "no") +
                      table + "; soft ordering ssa2 >= dec in " + std::to_string(ssa2_ahead) + "/3 seeds (logged):" +
                      ordering};
}

// ---- 10 ---------------------------------------------------------------------

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const fs::path other = b / fs::relative(entry.path(), a);
        if (!fs::exists(other) || read_bytes(entry.path()) != read_bytes(other)) return false;
    }
    return files > 0;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "ssanet_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);

    data::SynthConfig sc;
    sc.image_size = 32;
    sc.radius_max = 3.0;
    sc.seed = 10;
    const auto records_a = data::generate_dataset(sc, 6);
    const auto records_b = data::generate_dataset(sc, 6);
    data::save_dataset(records_a, root / "data_a");
    data::save_dataset(records_b, root / "data_b");
    const bool data_same = records_a == records_b && same_tree(root / "data_a", root / "data_b");

    const data::DatasetSplit split = data::make_split(records_a, 3);
    train::TrainConfig cfg;
    cfg.epochs = 2;
    cfg.seed = 10;
    const train::TrainResult run_a = train::train(cfg, split.train);
    const train::TrainResult run_b = train::train(cfg, split.train);
    train::save_checkpoint(run_a.checkpoint, root / "a.ckpt");
    train::save_checkpoint(run_b.checkpoint, root / "b.ckpt");
    const bool ckpt_same = read_bytes(root / "a.ckpt") == read_bytes(root / "b.ckpt");

    train::write_evaluation(train::evaluate(run_a.checkpoint, split.test, 1), root / "eval_a");
    train::write_evaluation(train::evaluate(run_b.checkpoint, split.test, 2), root / "eval_b");
    const bool eval_same = same_tree(root / "eval_a", root / "eval_b");

    const train::Checkpoint loaded = train::load_checkpoint(root / "a.ckpt");
    train::write_evaluation(train::evaluate(loaded, split.test, 1), root / "eval_loaded");
    const bool round_trip = same_tree(root / "eval_a", root / "eval_loaded");

    fs::remove_all(root);
    auto yn = [](bool b) { return b ? "identical" : "DIFFERENT"; };
    return {data_same && ckpt_same && eval_same && round_trip,
            fmt("synthetic datasets %s, checkpoints %s, evaluation reports %s, evaluation after save/load %s",
                yn(data_same), yn(ckpt_same), yn(eval_same), yn(round_trip))};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"spectral identities", spectral_identities},
        {"bandwidth doubling", bandwidth_doubling},
        {"scale-space approximation of Gaussian blur", ssa_approximates_gaussian},
        {"interpolation filter response", interpolation_response},
        {"gradient correctness", gradient_correctness},
        {"convolution oracle", convolution_oracle},
        {"metrics oracle", metrics_oracle},
        {"end-to-end desk training", desk_training},
        {"ablation structure", ablation_structure},
        {"determinism", determinism},
    };
    std::vector<bool> selected(criteria.size(), argc == 1);
    for (int a = 1; a < argc; ++a) {
        const int k = std::atoi(argv[a]);
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "unknown criterion '%s'\n", argv[a]);
            return 2;
        }
        selected[static_cast<std::size_t>(k - 1)] = true;
    }
    int failed = 0, ran = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected[i]) continue;
        ++ran;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria failed\n", failed, ran);
    return failed == 0 ? 0 : 1;
}
