#include "dsreg/config.hpp"
#include "dsreg/errors.hpp"
#include "dsreg/losses.hpp"
#include "dsreg/meta_image.hpp"
#include "dsreg/metrics.hpp"
#include "dsreg/phantom.hpp"
#include "dsreg/registration.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace dsreg;

namespace {

std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::ostringstream os;
        os.precision(1);
        os << std::fixed << v;
        return os.str();
    }
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << text;
}

int run_phantom(const std::string& spec_path, const std::string& out_dir) {
    ConfigFile cfg = ConfigFile::parse_file(spec_path);
    PhantomSpec spec = load_phantom_spec(cfg);
    cfg.reject_unknown();

    const PhantomCase pc = generate(spec);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_volume((dir / "fixed.mha").string(), pc.fixed_mr);
    write_volume((dir / "moving.mha").string(), pc.moving_ct);
    write_volume((dir / "fixed_ct.mha").string(), pc.fixed_ct);
    write_volume((dir / "translated.mha").string(), pc.moving_mr);
    write_field((dir / "gt_field.mha").string(), pc.gt_field);
    for (std::size_t i = 0; i < pc.organ_names.size(); ++i) {
        write_mask((dir / ("mask_" + pc.organ_names[i] + "_fixed.mha")).string(),
                   pc.fixed_masks[i]);
        write_mask((dir / ("mask_" + pc.organ_names[i] + "_moving.mha")).string(),
                   pc.moving_masks[i]);
    }
    write_landmarks((dir / "landmarks_fixed.csv").string(), pc.fixed_landmarks);
    write_landmarks((dir / "landmarks_moving.csv").string(), pc.moving_landmarks);
    write_text(dir / "spec.cfg", serialize_phantom_spec(spec));
    return 0;
}

int run_register(const std::string& moving_path, const std::string& fixed_path,
                 const std::string& config_path, const std::string& out_dir,
                 const std::string& translated_path, const std::string& mode) {
    const Volume3 moving = read_volume(moving_path);
    const Volume3 fixed = read_volume(fixed_path);

    RegistrationConfig rc;
    std::unique_ptr<Translator> translator;
    if (!config_path.empty()) {
        ConfigFile cfg = ConfigFile::parse_file(config_path);
        rc = load_registration_config(cfg);
        translator = load_translator(cfg, "translator", moving.dims);
        cfg.reject_unknown();
    } else {
        translator = std::make_unique<IdentityTranslator>();
    }
    if (!translated_path.empty())
        translator = std::make_unique<FixedVolumeTranslator>(read_volume(translated_path));

    RegistrationResult res;
    if (mode == "dual") {
        res = register_dual(moving, fixed, *translator, rc);
    } else if (mode == "uni") {
        const Volume3 tmr = translator->apply(normalize_min_max(moving));
        res = register_single_stream(tmr, fixed, Similarity::ssim, rc);
        // phi_os warps the original moving volume for the outputs below
        res.moved = warp(normalize_min_max(moving), res.phi_os);
    } else if (mode == "multi") {
        res = register_single_stream(moving, fixed, Similarity::mind, rc);
    } else {
        throw ConfigError("--mode must be dual, uni or multi");
    }

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_field((dir / "phi_o.mha").string(), res.phi_o);
    write_field((dir / "phi_s.mha").string(), res.phi_s);
    write_field((dir / "phi_os.mha").string(), res.phi_os);
    write_volume((dir / "moved.mha").string(), res.moved);
    write_text(dir / "loss_trace.txt", serialize_trace(res.trace));
    write_fusion_kernel((dir / "fusion_kernel.txt").string(), res.kernel);
    return 0;
}

int run_warp(const std::string& input_path, const std::string& field_path,
             const std::string& out_path, bool as_mask) {
    const DisplacementField field = read_field(field_path);
    if (as_mask) {
        const BinaryMask mask = read_mask(input_path);
        write_mask(out_path, warp_mask(mask, field));
    } else {
        const Volume3 vol = read_volume(input_path);
        write_volume(out_path, warp(vol, field));
    }
    return 0;
}

int run_metrics(const std::string& which, const std::vector<std::string>& inputs,
                double peak) {
    if (which == "dice") {
        if (inputs.size() != 2) throw ConfigError("metrics dice takes two mask files");
        std::cout << "dice = " << format_value(dice(read_mask(inputs[0]), read_mask(inputs[1])))
                  << "\n";
    } else if (which == "tre") {
        if (inputs.size() != 3)
            throw ConfigError("metrics tre takes fixed.csv moving.csv field.mha");
        const LandmarkSet fixed_lm = read_landmarks(inputs[0]);
        const LandmarkSet moving_lm = read_landmarks(inputs[1]);
        const DisplacementField field = read_field(inputs[2]);
        std::cout << "tre = " << format_value(tre(moving_lm, fixed_lm, field, field.spacing))
                  << "\n";
    } else if (which == "psnr") {
        if (inputs.size() != 2) throw ConfigError("metrics psnr takes two volume files");
        std::cout << "psnr = "
                  << format_value(psnr(read_volume(inputs[0]), read_volume(inputs[1]), peak))
                  << "\n";
    } else if (which == "ssim") {
        if (inputs.size() != 2) throw ConfigError("metrics ssim takes two volume files");
        std::cout << "ssim = "
                  << format_value(ssim_index(read_volume(inputs[0]), read_volume(inputs[1])))
                  << "\n";
    } else {
        throw ConfigError("unknown metric '" + which + "' (dice|tre|psnr|ssim)");
    }
    return 0;
}

std::vector<Volume3> read_volume_dir(const std::string& dir) {
    std::vector<fs::path> paths;
    if (!fs::is_directory(dir)) throw IoError(dir + ": not a directory");
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".mha") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    std::vector<Volume3> vols;
    for (const auto& p : paths) {
        if (read_meta_header(p.string()).channels != 1) continue;
        vols.push_back(read_volume(p.string()));
    }
    if (vols.empty()) throw IoError(dir + ": no scalar .mha volumes found");
    return vols;
}

int run_translate_score(const std::string& config_path, const std::string& ct_dir,
                        const std::string& mr_dir) {
    ConfigFile cfg = ConfigFile::parse_file(config_path);
    const std::vector<Volume3> ct_vols = read_volume_dir(ct_dir);
    const std::vector<Volume3> mr_vols = read_volume_dir(mr_dir);

    auto fwd = load_translator(cfg, "translator", ct_vols.front().dims);
    auto bwd = load_translator(cfg, "translator_backward", mr_vols.front().dims);
    TranslationLossWeights weights;
    weights.cyc = cfg.get_double("weights.cyc", weights.cyc);
    weights.identity = cfg.get_double("weights.identity", weights.identity);
    weights.mind = cfg.get_double("weights.mind", weights.mind);
    cfg.reject_unknown();

    const TranslationScore score = translation_score(*fwd, *bwd, ct_vols, mr_vols, weights);
    std::cout << score.serialize();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-stream deformable multimodal registration"};
    app.require_subcommand(1);

    std::string spec_path, out_dir;
    auto* phantom_cmd = app.add_subcommand("phantom", "Generate a synthetic phantom case");
    phantom_cmd->add_option("--spec", spec_path, "Phantom spec config")->required();
    phantom_cmd->add_option("--out", out_dir, "Output directory")->required();

    std::string moving_path, fixed_path, config_path, translated_path, mode = "dual";
    auto* reg_cmd = app.add_subcommand("register", "Register a moving volume to a fixed volume");
    reg_cmd->add_option("--moving", moving_path)->required();
    reg_cmd->add_option("--fixed", fixed_path)->required();
    reg_cmd->add_option("--config", config_path);
    reg_cmd->add_option("--out", out_dir)->required();
    reg_cmd->add_option("--translated", translated_path);
    reg_cmd->add_option("--mode", mode)->check(CLI::IsMember({"dual", "uni", "multi"}));

    std::string input_path, field_path, out_path;
    bool as_mask = false;
    auto* warp_cmd = app.add_subcommand("warp", "Warp a volume or mask by a field");
    warp_cmd->add_option("--input", input_path)->required();
    warp_cmd->add_option("--field", field_path)->required();
    warp_cmd->add_option("--out", out_path)->required();
    warp_cmd->add_flag("--mask", as_mask, "Treat the input as a binary mask");

    std::string metric;
    std::vector<std::string> metric_inputs;
    double peak = 1.0;
    auto* metrics_cmd = app.add_subcommand("metrics", "Evaluate dice|tre|psnr|ssim");
    metrics_cmd->add_option("metric", metric)->required();
    metrics_cmd->add_option("inputs", metric_inputs);
    metrics_cmd->add_option("--peak", peak, "PSNR peak value");

    std::string ct_dir, mr_dir;
    auto* score_cmd = app.add_subcommand("translate-score",
                                         "Deterministic translation quality report");
    score_cmd->add_option("--config", config_path)->required();
    score_cmd->add_option("--ct", ct_dir)->required();
    score_cmd->add_option("--mr", mr_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (phantom_cmd->parsed()) return run_phantom(spec_path, out_dir);
        if (reg_cmd->parsed())
            return run_register(moving_path, fixed_path, config_path, out_dir, translated_path,
                                mode);
        if (warp_cmd->parsed()) return run_warp(input_path, field_path, out_path, as_mask);
        if (metrics_cmd->parsed()) return run_metrics(metric, metric_inputs, peak);
        if (score_cmd->parsed()) return run_translate_score(config_path, ct_dir, mr_dir);
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: input: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
