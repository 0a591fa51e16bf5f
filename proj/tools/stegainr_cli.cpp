// stegainr: command-line front end for cover fitting, embedding, recovery
// and evaluation. One subcommand per invocation.
//
// Every subcommand accepts `--config FILE` with one `key = value` per line
// (`#` starts a comment). Keys are long flag names without dashes; flags on
// the command line override the file.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stegainr/stegainr.hpp"

namespace fs = std::filesystem;
using namespace stegainr;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw UsageError(msg);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (const auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

/// Decimal, or hexadecimal with a 0x prefix.
std::uint64_t parse_seed(const std::string& text) {
    const std::string s = trim(text);
    int base = 10;
    std::size_t skip = 0;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        base = 16;
        skip = 2;
    }
    std::uint64_t v = 0;
    const char* first = s.data() + skip;
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v, base);
    require(ec == std::errc() && ptr == last && first != last, "invalid seed '" + text + "'");
    return v;
}

std::pair<std::size_t, std::size_t> parse_resolution(const std::string& text) {
    const auto x = text.find_first_of("xX");
    auto num = [&](const std::string& s) {
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        require(ec == std::errc() && ptr == s.data() + s.size() && v >= 1, "invalid resolution '" + text + "'");
        return v;
    };
    if (x == std::string::npos) {
        const std::size_t n = num(text);
        return {n, n};
    }
    return {num(text.substr(0, x)), num(text.substr(x + 1))};
}

std::pair<std::size_t, std::size_t> resolution_or_trained(const std::string& res, const ModelFile& m) {
    if (!res.empty()) return parse_resolution(res);
    require(m.train_height > 0 && m.train_width > 0, "model records no training resolution; pass --res");
    return {m.train_height, m.train_width};
}

/// Expands `--config FILE` into flags placed before the user's own flags so
/// the latter win (options keep their last value).
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::vector<std::string> from_file;
    for (std::size_t i = 1; i + 1 < args.size(); ++i) {
        if (args[i] != "--config") continue;
        std::ifstream in(args[i + 1]);
        if (!in) throw IoError("cannot open config file '" + args[i + 1] + "'");
        std::string line;
        for (std::size_t n = 1; std::getline(in, line); ++n) {
            line = trim(line.substr(0, line.find('#')));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            require(eq != std::string::npos, args[i + 1] + ":" + std::to_string(n) + ": expected key = value");
            from_file.push_back("--" + trim(line.substr(0, eq)));
            from_file.push_back(trim(line.substr(eq + 1)));
        }
    }
    if (from_file.empty() || args.size() < 2) return args;
    std::vector<std::string> out{args[0], args[1]};
    out.insert(out.end(), from_file.begin(), from_file.end());
    out.insert(out.end(), args.begin() + 2, args.end());
    return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

// --- subcommands -----------------------------------------------------------

struct FitCoverArgs {
    std::string image, out, report;
    std::size_t epochs = 20000, width = 128, depth = 8, log_every = 1000;
    double lr = 1e-3, omega0 = 30.0;
    std::string seed = "0";
};

int run_fit_cover(const FitCoverArgs& a) {
    ArchSpec arch;
    arch.hidden_layers = a.depth;
    arch.width = a.width;
    arch.omega0 = a.omega0;
    TrainingConfig cfg;
    cfg.cover_epochs = a.epochs;
    cfg.cover_lr = a.lr;
    cfg.log_every = a.log_every;
    require(a.lr > 0, "--lr must be positive");
    require(a.omega0 > 0, "--omega0 must be positive");
    require(a.depth >= 1 && a.width >= 1, "--depth and --width must be at least 1");
    const std::uint64_t seed = parse_seed(a.seed);
    const ImageBuffer img = read_image(a.image);

    const auto [params, report] = fit_cover(img, arch, cfg, seed);
    save_model(a.out, params, static_cast<std::uint32_t>(img.height), static_cast<std::uint32_t>(img.width));
    const fs::path report_path = a.report.empty() ? fs::path(a.out + ".fit.json") : fs::path(a.report);
    write_json(report_path, {{"image", a.image},
                             {"arch", arch.to_string()},
                             {"epochs_run", report.epochs_run},
                             {"best_epoch", report.best_epoch},
                             {"best_loss", report.best_loss},
                             {"final_psnr", report.final_psnr}});
    std::cout << "cover fit: " << arch.to_string() << ", best epoch " << report.best_epoch << ", PSNR "
              << fmt(report.final_psnr, 2) << " dB\n";
    return 0;
}

struct EmbedArgs {
    std::string cover_model, stego_target, secrets, seeds, out, keys_out, log, mask_out;
    std::string optimizer = "sgd", init_mode = "pretrained", init_seed = "0";
    double ratio = 0.05, lr = 1e-3;
    std::optional<double> lambda_st, lambda_se;
    std::size_t epochs = 50000, log_every = 100;
};

int run_embed(const EmbedArgs& a) {
    require(a.ratio > 0.0 && a.ratio < 1.0, "--ratio must lie strictly between 0 and 1");
    require(a.lr > 0, "--lr must be positive");
    const auto secret_paths = split_list(a.secrets);
    const auto seed_texts = split_list(a.seeds);
    require(!secret_paths.empty(), "--secrets needs at least one image");
    require(secret_paths.size() == seed_texts.size(), "--secrets and --seeds must have the same length");
    std::vector<std::uint64_t> seeds;
    for (const auto& s : seed_texts) seeds.push_back(parse_seed(s));
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) require(seeds[i] != seeds[j], "--seeds must be pairwise distinct");

    TrainingConfig cfg;
    cfg.ratio = a.ratio;
    cfg.lr = a.lr;
    cfg.joint_epochs = a.epochs;
    cfg.optimizer = parse_optimizer(a.optimizer);
    cfg.init_mode = parse_init_mode(a.init_mode);
    cfg.log_every = a.log_every;
    const auto [lst, lse] = lambda_defaults(seeds.size());
    cfg.lambda_st = a.lambda_st.value_or(lst);
    cfg.lambda_se = a.lambda_se.value_or(lse);
    try {
        cfg.validate();
    } catch (const ContractError& e) {
        throw UsageError(e.what());
    }

    const ModelFile cover = load_model(a.cover_model);
    const ImageBuffer target = read_image(a.stego_target);
    std::vector<ImageBuffer> secrets;
    for (const auto& p : secret_paths) secrets.push_back(read_image(p));

    const EmbeddingStart start = prepare_start(cfg.init_mode, cover.params, cfg.ratio, parse_seed(a.init_seed));

    std::ofstream log_file;
    if (!a.log.empty()) {
        log_file.open(a.log, std::ios::trunc);
        if (!log_file) throw IoError("cannot open '" + a.log + "' for writing");
        write_quality_csv_header(log_file);
    }
    auto on_row = [&](const QualityRow& r) {
        if (log_file.is_open()) {
            write_quality_csv_row(log_file, r);
            log_file.flush();
        }
    };
    const JointResult result = joint_train(start.network, start.mask, target, secrets, seeds, cfg, on_row);
    const StegoBundle& b = result.bundle;
    const ArchSpec& arch = b.stego_params.arch;

    save_model(a.out, b.stego_params, static_cast<std::uint32_t>(target.height),
               static_cast<std::uint32_t>(target.width));
    const fs::path keys_dir = a.keys_out.empty() ? fs::path(a.out).parent_path() : fs::path(a.keys_out);
    if (!keys_dir.empty()) fs::create_directories(keys_dir);
    const SparseMask sparse = to_sparse(b.mask, arch);
    for (std::size_t i = 0; i < seeds.size(); ++i)
        save_key(keys_dir / ("secret" + std::to_string(i + 1) + ".key"), make_key(sparse, seeds[i], arch));
    save_mask(a.mask_out.empty() ? keys_dir / "mask.smsk" : fs::path(a.mask_out), sparse, arch);

    std::cout << "embedded " << seeds.size() << " secret(s), " << sparse.count() << " frozen weights of "
              << arch.weight_count() << "\n";
    std::cout << "stego PSNR " << fmt(psnr(b.stego_sample, target), 2) << " dB";
    for (std::size_t i = 0; i < secrets.size(); ++i)
        std::cout << ", secret" << i + 1 << " " << fmt(psnr(b.secret_samples[i], secrets[i]), 2) << " dB";
    std::cout << "\n";
    return 0;
}

struct SampleArgs {
    std::string model, key, res, out;
};

int run_sample(const SampleArgs& a) {
    const ModelFile m = load_model(a.model);
    const auto [h, w] = resolution_or_trained(a.res, m);
    write_image(a.out, sample(m.params, h, w));
    std::cout << "wrote " << h << "x" << w << " sample to " << a.out << "\n";
    return 0;
}

int run_recover(const SampleArgs& a) {
    const ModelFile m = load_model(a.model);
    const auto [h, w] = resolution_or_trained(a.res, m);
    const StegoKey key = load_key(a.key, m.params.arch);
    write_image(a.out, sample(recover(m.params, key), h, w));
    std::cout << "recovered " << h << "x" << w << " secret to " << a.out << "\n";
    return 0;
}

struct MetricsArgs {
    std::string ref, test, json;
};

int run_metrics(const MetricsArgs& a) {
    const MetricReport r = evaluate(read_image(a.ref), read_image(a.test));
    std::cout << "psnr=" << fmt(r.psnr) << " ssim=" << fmt(r.ssim, 6) << " rmse=" << fmt(r.rmse) << " mae="
              << fmt(r.mae) << "\n";
    if (!a.json.empty()) write_json(a.json, {{"psnr", r.psnr}, {"ssim", r.ssim}, {"rmse", r.rmse}, {"mae", r.mae}});
    return 0;
}

struct PruneArgs {
    std::string model, method = "l1_unstructured", out;
    double rate = 0.0;
};

int run_prune(const PruneArgs& a) {
    require(a.rate >= 0.0 && a.rate < 1.0, "--rate must lie in [0, 1)");
    PruneSpec spec{parse_prune_method(a.method), a.rate};
    ModelFile m = load_model(a.model);
    m.params = prune(m.params, spec);
    save_model(a.out, m);
    std::cout << "pruned (" << to_string(spec.method) << ", rate " << a.rate << ") to " << a.out << "\n";
    return 0;
}

struct AttackArgs {
    std::string model, mask, secrets, seed = "0", report, inject;
    std::size_t trials = 1000;
};

int run_attack(const AttackArgs& a) {
    require(a.trials >= 1, "--trials must be at least 1");
    const auto secret_paths = split_list(a.secrets);
    require(!secret_paths.empty(), "--secrets needs at least one image");
    std::vector<std::uint64_t> injected;
    for (const auto& s : split_list(a.inject)) injected.push_back(parse_seed(s));
    const std::uint64_t attack_seed = parse_seed(a.seed);

    const ModelFile m = load_model(a.model);
    const SparseMask mask = load_mask(a.mask, m.params.arch);
    std::vector<ImageBuffer> secrets;
    for (const auto& p : secret_paths) secrets.push_back(read_image(p));

    const AttackReport r = random_key_attack(m.params, mask, secrets, a.trials, attack_seed, injected);
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : r.trials)
        trials.push_back({{"seed", t.seed}, {"injected", t.injected}, {"psnr", t.psnr}});
    const nlohmann::json j{{"trials", a.trials},
                           {"attack_seed", attack_seed},
                           {"secrets", secret_paths},
                           {"max_psnr", r.max_psnr},
                           {"max_random_psnr", r.max_random_psnr},
                           {"entries", trials}};
    if (!a.report.empty()) write_json(a.report, j);
    std::cout << "attack: " << a.trials << " random seed(s), max PSNR " << fmt(r.max_random_psnr, 2) << " dB\n";
    return 0;
}

struct HistogramArgs {
    std::string model, out;
    std::size_t bins = 100;
};

int run_histogram(const HistogramArgs& a) {
    require(a.bins >= 1, "--bins must be at least 1");
    const ModelFile m = load_model(a.model);
    std::ofstream out(a.out, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + a.out + "' for writing");
    out << "bin_low,bin_high,count,layer\n" << std::setprecision(9);
    for (const Histogram& h : weight_histogram(m.params, a.bins))
        for (std::size_t b = 0; b < h.counts.size(); ++b)
            out << h.bin_low(b) << ',' << h.bin_high(b) << ',' << h.counts[b] << ',' << h.layer << '\n';
    std::cout << "wrote " << a.bins << "-bin histograms to " << a.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hide images inside the weights of an image-fitting sine network."};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;
    auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config_path, "key = value defaults file"); };

    FitCoverArgs fit;
    auto* fit_cmd = app.add_subcommand("fit-cover", "Fit a cover network to an image");
    fit_cmd->add_option("--image", fit.image, "Cover image (PNG)")->required();
    fit_cmd->add_option("--out", fit.out, "Output model file")->required();
    fit_cmd->add_option("--report", fit.report, "Fit report JSON (default: <out>.fit.json)");
    fit_cmd->add_option("--epochs", fit.epochs, "Training epochs")->capture_default_str();
    fit_cmd->add_option("--lr", fit.lr, "Adam learning rate")->capture_default_str();
    fit_cmd->add_option("--width", fit.width, "Hidden layer width")->capture_default_str();
    fit_cmd->add_option("--depth", fit.depth, "Number of hidden layers")->capture_default_str();
    fit_cmd->add_option("--omega0", fit.omega0, "First-layer sine frequency")->capture_default_str();
    fit_cmd->add_option("--seed", fit.seed, "Initialization seed (decimal or 0x hex)")->capture_default_str();
    add_config(fit_cmd);

    EmbedArgs emb;
    auto* emb_cmd = app.add_subcommand("embed", "Hide secret images in a fitted cover network");
    emb_cmd->add_option("--cover-model", emb.cover_model, "Fitted cover model")->required();
    emb_cmd->add_option("--stego-target", emb.stego_target, "Image the published network must show")->required();
    emb_cmd->add_option("--secrets", emb.secrets, "Comma-separated secret images")->required();
    emb_cmd->add_option("--seeds", emb.seeds, "Comma-separated seeds, one per secret")->required();
    emb_cmd->add_option("--ratio", emb.ratio, "Fraction of weights frozen as the key mask")->capture_default_str();
    emb_cmd->add_option("--epochs", emb.epochs, "Joint training epochs")->capture_default_str();
    emb_cmd->add_option("--lr", emb.lr, "Learning rate")->capture_default_str();
    emb_cmd->add_option("--optimizer", emb.optimizer, "sgd or adam")->capture_default_str();
    emb_cmd->add_option("--init-mode", emb.init_mode, "pretrained, xavier_scratch or random_positions")
        ->capture_default_str();
    emb_cmd->add_option("--init-seed", emb.init_seed, "Seed for the non-pretrained init modes")->capture_default_str();
    emb_cmd->add_option("--lambda-st", emb.lambda_st, "Stego loss weight (default 1/(N+1))");
    emb_cmd->add_option("--lambda-se", emb.lambda_se, "Secret loss weight (default 1/(N+1))");
    emb_cmd->add_option("--out", emb.out, "Output stego model")->required();
    emb_cmd->add_option("--keys-out", emb.keys_out, "Directory for key files and the mask file");
    emb_cmd->add_option("--mask-out", emb.mask_out, "Mask file path (default: <keys-out>/mask.smsk)");
    emb_cmd->add_option("--log", emb.log, "CSV quality log (epoch,view,psnr,loss)");
    emb_cmd->add_option("--log-every", emb.log_every, "Log interval in epochs")->capture_default_str();
    add_config(emb_cmd);

    SampleArgs smp;
    auto* smp_cmd = app.add_subcommand("sample", "Render a model at any resolution");
    smp_cmd->add_option("--model", smp.model, "Model file")->required();
    smp_cmd->add_option("--res", smp.res, "H or HxW (default: training resolution)");
    smp_cmd->add_option("--out", smp.out, "Output PNG")->required();
    add_config(smp_cmd);

    SampleArgs rec;
    auto* rec_cmd = app.add_subcommand("recover", "Extract a secret image with a key");
    rec_cmd->add_option("--model", rec.model, "Stego model file")->required();
    rec_cmd->add_option("--key", rec.key, "Key file")->required();
    rec_cmd->add_option("--res", rec.res, "H or HxW (default: training resolution)");
    rec_cmd->add_option("--out", rec.out, "Output PNG")->required();
    add_config(rec_cmd);

    MetricsArgs met;
    auto* met_cmd = app.add_subcommand("metrics", "Compare two images (PSNR, SSIM, RMSE, MAE)");
    met_cmd->add_option("--ref", met.ref, "Reference image")->required();
    met_cmd->add_option("--test", met.test, "Test image")->required();
    met_cmd->add_option("--json", met.json, "Also write the report as JSON");
    add_config(met_cmd);

    PruneArgs prn;
    auto* prn_cmd = app.add_subcommand("prune", "Prune a model");
    prn_cmd->add_option("--model", prn.model, "Model file")->required();
    prn_cmd->add_option("--method", prn.method, "l1_unstructured or structured")->capture_default_str();
    prn_cmd->add_option("--rate", prn.rate, "Pruning rate in [0, 1)")->required();
    prn_cmd->add_option("--out", prn.out, "Output model")->required();
    add_config(prn_cmd);

    AttackArgs atk;
    auto* atk_cmd = app.add_subcommand("attack", "Try random seeds against a stego model");
    atk_cmd->add_option("--model", atk.model, "Stego model file")->required();
    atk_cmd->add_option("--mask", atk.mask, "Mask file")->required();
    atk_cmd->add_option("--secrets", atk.secrets, "Comma-separated true secret images")->required();
    atk_cmd->add_option("--trials", atk.trials, "Number of random seeds")->capture_default_str();
    atk_cmd->add_option("--seed", atk.seed, "Attack seed")->capture_default_str();
    atk_cmd->add_option("--inject", atk.inject, "Comma-separated seeds to add as flagged trials");
    atk_cmd->add_option("--report", atk.report, "JSON report path");
    add_config(atk_cmd);

    HistogramArgs hst;
    auto* hst_cmd = app.add_subcommand("histogram", "Export weight histograms as CSV");
    hst_cmd->add_option("--model", hst.model, "Model file")->required();
    hst_cmd->add_option("--bins", hst.bins, "Bins per histogram")->capture_default_str();
    hst_cmd->add_option("--out", hst.out, "Output CSV")->required();
    add_config(hst_cmd);

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin() + 1, args.end()); // CLI11 consumes a reversed vector
        args.erase(args.begin());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*fit_cmd) return run_fit_cover(fit);
        if (*emb_cmd) return run_embed(emb);
        if (*smp_cmd) return run_sample(smp);
        if (*rec_cmd) return run_recover(rec);
        if (*met_cmd) return run_metrics(met);
        if (*prn_cmd) return run_prune(prn);
        if (*atk_cmd) return run_attack(atk);
        if (*hst_cmd) return run_histogram(hst);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ContractError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const KeyError& e) {
        std::cerr << "key error: " << e.what() << "\n";
        return 3;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const TrainingError& e) {
        std::cerr << "training error at epoch " << e.epoch() << ": " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
