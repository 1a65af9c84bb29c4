#include "dsreg/registration.hpp"

#include "dsreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dsreg {

FusionKernel FusionKernel::averaging() {
    FusionKernel k;
    const int center = tap(0, 0, 0);
    for (int c = 0; c < 3; ++c) {
        k.w(center, c, c) = 0.5;     // phi_o component
        k.w(center, 3 + c, c) = 0.5; // phi_s component
    }
    return k;
}

std::string to_string(Similarity s) {
    switch (s) {
        case Similarity::ssim: return "ssim";
        case Similarity::mind: return "mind";
        case Similarity::mse: return "mse";
    }
    return "ssim";
}

Similarity similarity_from_string(const std::string& s) {
    if (s == "ssim") return Similarity::ssim;
    if (s == "mind") return Similarity::mind;
    if (s == "mse") return Similarity::mse;
    throw ConfigError("unknown similarity '" + s + "' (expected ssim|mind|mse)");
}

void RegistrationConfig::validate() const {
    if (lambda_smooth < 0.0 || alpha_o < 0.0 || alpha_s < 0.0)
        throw ConfigError("registration weights must be nonnegative");
    if (pyramid_levels < 1) throw ConfigError("pyramid_levels must be >= 1");
    if (iterations.empty()) throw ConfigError("iterations must not be empty");
    for (int it : iterations)
        if (it < 1) throw ConfigError("iterations must be >= 1");
}

int RegistrationConfig::iterations_at(int idx) const {
    if (idx < int(iterations.size())) return iterations[std::size_t(idx)];
    return iterations.back();
}

DisplacementField fuse(const DisplacementField& phi_o, const DisplacementField& phi_s,
                       const FusionKernel& k) {
    if (!(phi_o.dims == phi_s.dims))
        throw std::invalid_argument("fuse: field dims mismatch");
    const Dims d = phi_o.dims;
    DisplacementField out(d, phi_o.spacing);

    std::size_t n = 0;
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x, ++n) {
                double acc[3] = {k.biases[0], k.biases[1], k.biases[2]};
                for (int dz = -1; dz <= 1; ++dz) {
                    const int zz = z + dz;
                    if (zz < 0 || zz >= d.nz) continue;
                    for (int dy = -1; dy <= 1; ++dy) {
                        const int yy = y + dy;
                        if (yy < 0 || yy >= d.ny) continue;
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int xx = x + dx;
                            if (xx < 0 || xx >= d.nx) continue;
                            const int t = FusionKernel::tap(dx, dy, dz);
                            const std::size_t m = phi_o.index(xx, yy, zz, 0);
                            const double in[6] = {phi_o.data[m],     phi_o.data[m + 1],
                                                  phi_o.data[m + 2], phi_s.data[m],
                                                  phi_s.data[m + 1], phi_s.data[m + 2]};
                            const double* kw = &k.weights[std::size_t(t) * 6 * 3];
                            for (int ci = 0; ci < 6; ++ci) {
                                acc[0] += kw[ci * 3 + 0] * in[ci];
                                acc[1] += kw[ci * 3 + 1] * in[ci];
                                acc[2] += kw[ci * 3 + 2] * in[ci];
                            }
                        }
                    }
                }
                out.data[3 * n] = acc[0];
                out.data[3 * n + 1] = acc[1];
                out.data[3 * n + 2] = acc[2];
            }
    return out;
}

void fuse_adjoint(const DisplacementField& phi_o, const DisplacementField& phi_s,
                  const FusionKernel& k, const DisplacementField& g,
                  DisplacementField& g_phi_o, DisplacementField& g_phi_s,
                  FusionKernel& g_kernel) {
    if (!(phi_o.dims == phi_s.dims) || !(phi_o.dims == g.dims))
        throw std::invalid_argument("fuse_adjoint: field dims mismatch");
    const Dims d = phi_o.dims;

    std::size_t n = 0;
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x, ++n) {
                const double go[3] = {g.data[3 * n], g.data[3 * n + 1], g.data[3 * n + 2]};
                g_kernel.biases[0] += go[0];
                g_kernel.biases[1] += go[1];
                g_kernel.biases[2] += go[2];
                for (int dz = -1; dz <= 1; ++dz) {
                    const int zz = z + dz;
                    if (zz < 0 || zz >= d.nz) continue;
                    for (int dy = -1; dy <= 1; ++dy) {
                        const int yy = y + dy;
                        if (yy < 0 || yy >= d.ny) continue;
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int xx = x + dx;
                            if (xx < 0 || xx >= d.nx) continue;
                            const int t = FusionKernel::tap(dx, dy, dz);
                            const std::size_t m = phi_o.index(xx, yy, zz, 0);
                            const double in[6] = {phi_o.data[m],     phi_o.data[m + 1],
                                                  phi_o.data[m + 2], phi_s.data[m],
                                                  phi_s.data[m + 1], phi_s.data[m + 2]};
                            const double* kw = &k.weights[std::size_t(t) * 6 * 3];
                            double* gkw = &g_kernel.weights[std::size_t(t) * 6 * 3];
                            for (int ci = 0; ci < 6; ++ci) {
                                const double gin =
                                    kw[ci * 3] * go[0] + kw[ci * 3 + 1] * go[1] +
                                    kw[ci * 3 + 2] * go[2];
                                gkw[ci * 3] += in[ci] * go[0];
                                gkw[ci * 3 + 1] += in[ci] * go[1];
                                gkw[ci * 3 + 2] += in[ci] * go[2];
                                if (ci < 3)
                                    g_phi_o.data[m + std::size_t(ci)] += gin;
                                else
                                    g_phi_s.data[m + std::size_t(ci - 3)] += gin;
                            }
                        }
                    }
                }
            }
}

Volume3 normalize_min_max(const Volume3& vol) {
    const auto [lo, hi] = std::minmax_element(vol.data.begin(), vol.data.end());
    Volume3 out(vol.dims, vol.spacing);
    const double range = *hi - *lo;
    if (range <= 0.0) return out; // constant volume maps to zeros
    for (std::size_t i = 0; i < vol.data.size(); ++i)
        out.data[i] = (vol.data[i] - *lo) / range;
    return out;
}

namespace {

// Accumulates scale * gLoss/dMoved chained through the warp sampling into
// the field gradient. `stride`/`offset` address multi-channel cotangents.
void chain_warp_grad(const Volume3& moving, const DisplacementField& field,
                     const std::vector<double>& g_moved, std::size_t stride,
                     std::size_t offset, double scale, DisplacementField& g_field) {
    const Dims d = field.dims;
    std::size_t n = 0;
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i, ++n) {
                const double gm = g_moved[stride * n + offset];
                if (gm == 0.0) continue;
                const Vec3 u = field.at(i, j, k);
                const Vec3 gp =
                    sample_trilinear_grad(moving, {i + u[0], j + u[1], k + u[2]});
                const std::size_t m = 3 * n;
                g_field.data[m] += scale * gm * gp[0];
                g_field.data[m + 1] += scale * gm * gp[1];
                g_field.data[m + 2] += scale * gm * gp[2];
            }
}

struct LevelData {
    Volume3 moving;  // the stream's moving volume (rct for the fused term)
    Volume3 fixed;   // rmr
    Volume3 tmr;     // translated moving (unimodal stream)
    std::array<Volume3, MindVolume::kChannels> mind_moving_ch;
    MindVolume mind_fixed;
    bool has_mind = false;
};

void add_mind_data(LevelData& ld, const MindParams& params) {
    if (ld.has_mind) return;
    const MindVolume mm = mind(ld.moving, params);
    for (int c = 0; c < MindVolume::kChannels; ++c) ld.mind_moving_ch[c] = mm.channel(c);
    ld.mind_fixed = mind(ld.fixed, params);
    ld.has_mind = true;
}

// Similarity between fixed and moving-warped-by-field; gradient w.r.t. the
// field scaled by `scale` accumulated into g_field.
double sim_with_grad(Similarity sim, const LevelData& ld, const DisplacementField& field,
                     const SsimParams& ssim_params, double scale,
                     DisplacementField& g_field) {
    switch (sim) {
        case Similarity::ssim: {
            const Volume3 moved = warp(ld.moving, field);
            const LossValueGrad lv = ssim_loss(ld.fixed, moved, ssim_params);
            chain_warp_grad(ld.moving, field, lv.grad, 1, 0, scale, g_field);
            return lv.value;
        }
        case Similarity::mse: {
            const Volume3 moved = warp(ld.moving, field);
            const LossValueGrad lv = mse_loss(ld.fixed, moved);
            chain_warp_grad(ld.moving, field, lv.grad, 1, 0, scale, g_field);
            return lv.value;
        }
        case Similarity::mind: {
            MindVolume warped(ld.fixed.dims, ld.fixed.spacing);
            for (int c = 0; c < MindVolume::kChannels; ++c) {
                const Volume3 wc = warp(ld.mind_moving_ch[std::size_t(c)], field);
                for (std::size_t n = 0; n < wc.data.size(); ++n)
                    warped.data[MindVolume::kChannels * n + c] = wc.data[n];
            }
            const LossValueGrad lv = mind_l1_loss(ld.mind_fixed, warped);
            for (int c = 0; c < MindVolume::kChannels; ++c)
                chain_warp_grad(ld.mind_moving_ch[std::size_t(c)], field, lv.grad,
                                MindVolume::kChannels, std::size_t(c), scale, g_field);
            return lv.value;
        }
    }
    throw std::logic_error("unreachable");
}

// SSIM between fixed and tmr warped by the unimodal field.
double unimodal_term(const LevelData& ld, const DisplacementField& field,
                     const SsimParams& ssim_params, double scale,
                     DisplacementField& g_field) {
    const Volume3 moved = warp(ld.tmr, field);
    const LossValueGrad lv = ssim_loss(ld.fixed, moved, ssim_params);
    chain_warp_grad(ld.tmr, field, lv.grad, 1, 0, scale, g_field);
    return lv.value;
}

// MIND-L1 between fixed descriptors and moving descriptors warped by the
// multimodal field.
double multimodal_term(const LevelData& ld, const DisplacementField& field, double scale,
                       DisplacementField& g_field) {
    MindVolume warped(ld.fixed.dims, ld.fixed.spacing);
    for (int c = 0; c < MindVolume::kChannels; ++c) {
        const Volume3 wc = warp(ld.mind_moving_ch[std::size_t(c)], field);
        for (std::size_t n = 0; n < wc.data.size(); ++n)
            warped.data[MindVolume::kChannels * n + c] = wc.data[n];
    }
    const LossValueGrad lv = mind_l1_loss(ld.mind_fixed, warped);
    for (int c = 0; c < MindVolume::kChannels; ++c)
        chain_warp_grad(ld.mind_moving_ch[std::size_t(c)], field, lv.grad,
                        MindVolume::kChannels, std::size_t(c), scale, g_field);
    return lv.value;
}

TotalLossResult total_loss_on(const LevelData& ld, const DisplacementField& phi_o,
                              const DisplacementField& phi_s, const FusionKernel& k,
                              const RegistrationConfig& cfg) {
    TotalLossResult res;
    res.g_phi_o = DisplacementField(phi_o.dims, phi_o.spacing);
    res.g_phi_s = DisplacementField(phi_s.dims, phi_s.spacing);

    const DisplacementField phi_os = fuse(phi_o, phi_s, k);
    DisplacementField g_os(phi_os.dims, phi_os.spacing);

    res.sim = sim_with_grad(cfg.similarity, ld, phi_os, cfg.ssim, 1.0, g_os);

    const LossValueGrad sm = smoothness_loss(phi_os);
    res.smooth = sm.value;
    for (std::size_t i = 0; i < g_os.data.size(); ++i)
        g_os.data[i] += cfg.lambda_smooth * sm.grad[i];

    fuse_adjoint(phi_o, phi_s, k, g_os, res.g_phi_o, res.g_phi_s, res.g_kernel);

    if (cfg.alpha_o > 0.0)
        res.aux_o = multimodal_term(ld, phi_o, cfg.alpha_o, res.g_phi_o);
    if (cfg.alpha_s > 0.0)
        res.aux_s = unimodal_term(ld, phi_s, cfg.ssim, cfg.alpha_s, res.g_phi_s);

    res.total = res.sim + cfg.lambda_smooth * res.smooth + cfg.alpha_o * res.aux_o +
                cfg.alpha_s * res.aux_s;
    if (!std::isfinite(res.total))
        throw NumericalError("total loss is not finite");
    return res;
}

struct AdamState {
    std::vector<double> m, v;
    double beta1, beta2, eps;
    long t = 0;

    AdamState(std::size_t n, const OptimizerParams& p)
        : m(n, 0.0), v(n, 0.0), beta1(p.beta1), beta2(p.beta2), eps(p.epsilon) {}

    void step(double* x, const double* g, std::size_t n, double lr) {
        ++t;
        const double c1 = 1.0 - std::pow(beta1, double(t));
        const double c2 = 1.0 - std::pow(beta2, double(t));
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

// Gradients at numerical-noise scale would still be normalized to
// near-full steps by Adam; treat them as an exact stationary point instead.
bool negligible(const double* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(g[i]) >= 1e-12) return false;
    return true;
}

double level_factor(int idx, int levels) {
    return 1.0 / double(1 << (levels - 1 - idx));
}

Volume3 to_level(const Volume3& full, double f) {
    if (f == 1.0) return full;
    return resample(full, {f, f, f});
}

struct EngineSetup {
    // dual: uses fusion + aux terms; single: one field, no fusion.
    bool dual = true;
    Similarity single_similarity = Similarity::ssim;
};

RegistrationResult run_engine(const Volume3& moving_full, const Volume3& fixed_full,
                              const Volume3& tmr_full, const RegistrationConfig& cfg,
                              const EngineSetup& setup) {
    cfg.validate();
    RegistrationResult result;
    result.kernel = FusionKernel::averaging();

    const bool need_mind =
        setup.dual ? (cfg.similarity == Similarity::mind || cfg.alpha_o > 0.0)
                   : (setup.single_similarity == Similarity::mind);

    DisplacementField phi_o, phi_s;
    FusionKernel kernel = FusionKernel::averaging();
    int global_iter = 0;

    for (int idx = 0; idx < cfg.pyramid_levels; ++idx) {
        const double f = level_factor(idx, cfg.pyramid_levels);
        LevelData ld;
        ld.moving = to_level(moving_full, f);
        ld.fixed = to_level(fixed_full, f);
        if (setup.dual) ld.tmr = to_level(tmr_full, f);
        if (need_mind) add_mind_data(ld, cfg.mind);

        if (idx == 0) {
            phi_o = DisplacementField(ld.fixed.dims, ld.fixed.spacing);
            phi_s = DisplacementField(ld.fixed.dims, ld.fixed.spacing);
        } else {
            phi_o = upsample_field(phi_o, ld.fixed.dims);
            phi_s = upsample_field(phi_s, ld.fixed.dims);
        }

        AdamState adam_o(phi_o.data.size(), cfg.optimizer);
        AdamState adam_s(phi_s.data.size(), cfg.optimizer);
        AdamState adam_k(FusionKernel::kWeights + FusionKernel::kOut, cfg.optimizer);

        const bool finest = idx == cfg.pyramid_levels - 1;
        double best_loss = std::numeric_limits<double>::infinity();
        DisplacementField best_o, best_s;
        FusionKernel best_k;

        const int iters = cfg.iterations_at(idx);
        for (int it = 0; it < iters; ++it, ++global_iter) {
            RegistrationConfig level_cfg = cfg;
            if (!setup.dual) {
                level_cfg.similarity = setup.single_similarity;
                level_cfg.alpha_o = 0.0;
                level_cfg.alpha_s = 0.0;
            }
            TotalLossResult res;
            try {
                if (setup.dual) {
                    res = total_loss_on(ld, phi_o, phi_s, kernel, level_cfg);
                } else {
                    // single stream: the field is phi_o, no fusion
                    res.g_phi_o = DisplacementField(phi_o.dims, phi_o.spacing);
                    res.sim = sim_with_grad(level_cfg.similarity, ld, phi_o, cfg.ssim, 1.0,
                                            res.g_phi_o);
                    const LossValueGrad sm = smoothness_loss(phi_o);
                    res.smooth = sm.value;
                    for (std::size_t i = 0; i < res.g_phi_o.data.size(); ++i)
                        res.g_phi_o.data[i] += cfg.lambda_smooth * sm.grad[i];
                    res.total = res.sim + cfg.lambda_smooth * res.smooth;
                    if (!std::isfinite(res.total))
                        throw NumericalError("total loss is not finite");
                }
            } catch (const NumericalError& e) {
                std::ostringstream os;
                os << e.what() << " (level " << idx << ", iteration " << global_iter << ")";
                throw NumericalError(os.str());
            }

            result.trace.push_back(
                {global_iter, idx, res.total, res.sim, res.smooth, res.aux_o, res.aux_s});

            if (finest && res.total < best_loss) {
                best_loss = res.total;
                best_o = phi_o;
                best_s = phi_s;
                best_k = kernel;
            }

            if (!negligible(res.g_phi_o.data.data(), phi_o.data.size()))
                adam_o.step(phi_o.data.data(), res.g_phi_o.data.data(), phi_o.data.size(),
                            cfg.optimizer.step_field);
            if (setup.dual) {
                if (!negligible(res.g_phi_s.data.data(), phi_s.data.size()))
                    adam_s.step(phi_s.data.data(), res.g_phi_s.data.data(), phi_s.data.size(),
                                cfg.optimizer.step_field);
                std::array<double, FusionKernel::kWeights + FusionKernel::kOut> kp, kg;
                std::copy(kernel.weights.begin(), kernel.weights.end(), kp.begin());
                std::copy(kernel.biases.begin(), kernel.biases.end(),
                          kp.begin() + FusionKernel::kWeights);
                std::copy(res.g_kernel.weights.begin(), res.g_kernel.weights.end(), kg.begin());
                std::copy(res.g_kernel.biases.begin(), res.g_kernel.biases.end(),
                          kg.begin() + FusionKernel::kWeights);
                if (!negligible(kg.data(), kg.size())) {
                    adam_k.step(kp.data(), kg.data(), kp.size(), cfg.optimizer.step_kernel);
                    std::copy(kp.begin(), kp.begin() + FusionKernel::kWeights,
                              kernel.weights.begin());
                    std::copy(kp.begin() + FusionKernel::kWeights, kp.end(),
                              kernel.biases.begin());
                }
            }
        }

        if (finest) {
            // Keep the best finest-level iterate; never end above the
            // finest-level starting loss.
            RegistrationConfig level_cfg = cfg;
            if (!setup.dual) {
                level_cfg.similarity = setup.single_similarity;
                level_cfg.alpha_o = 0.0;
                level_cfg.alpha_s = 0.0;
            }
            double final_loss;
            if (setup.dual) {
                final_loss = total_loss_on(ld, phi_o, phi_s, kernel, level_cfg).total;
            } else {
                DisplacementField dummy(phi_o.dims, phi_o.spacing);
                final_loss =
                    sim_with_grad(level_cfg.similarity, ld, phi_o, cfg.ssim, 0.0, dummy) +
                    cfg.lambda_smooth * smoothness_loss(phi_o).value;
            }
            if (best_loss < final_loss) {
                phi_o = best_o;
                phi_s = best_s;
                kernel = best_k;
            }
        }
    }

    result.phi_o = phi_o;
    result.kernel = kernel;
    if (setup.dual) {
        result.phi_s = phi_s;
        result.phi_os = fuse(phi_o, phi_s, kernel);
    } else {
        result.phi_s = phi_o;
        result.phi_os = phi_o;
    }
    result.moved = warp(moving_full, result.phi_os);
    return result;
}

} // namespace

TotalLossResult total_loss(const Volume3& rct, const Volume3& rmr, const Volume3& tmr,
                           const DisplacementField& phi_o, const DisplacementField& phi_s,
                           const FusionKernel& k, const RegistrationConfig& cfg) {
    if (!(rct.dims == rmr.dims) || !(rct.dims == tmr.dims) || !(rct.dims == phi_o.dims) ||
        !(rct.dims == phi_s.dims))
        throw std::invalid_argument("total_loss: dims mismatch");
    LevelData ld;
    ld.moving = rct;
    ld.fixed = rmr;
    ld.tmr = tmr;
    if (cfg.similarity == Similarity::mind || cfg.alpha_o > 0.0) add_mind_data(ld, cfg.mind);
    return total_loss_on(ld, phi_o, phi_s, k, cfg);
}

RegistrationResult register_dual(const Volume3& rct, const Volume3& rmr,
                                 const Translator& translator,
                                 const RegistrationConfig& cfg) {
    if (!(rct.dims == rmr.dims) || !(rct.spacing == rmr.spacing))
        throw std::invalid_argument("register: moving and fixed grids differ");
    const Volume3 moving = normalize_min_max(rct);
    const Volume3 fixed = normalize_min_max(rmr);
    const Volume3 tmr = translator.apply(moving);
    if (!(tmr.dims == moving.dims))
        throw std::invalid_argument("register: translator changed dims");
    EngineSetup setup;
    setup.dual = true;
    return run_engine(moving, fixed, tmr, cfg, setup);
}

RegistrationResult register_single_stream(const Volume3& moving, const Volume3& fixed,
                                          Similarity similarity,
                                          const RegistrationConfig& cfg) {
    if (!(moving.dims == fixed.dims) || !(moving.spacing == fixed.spacing))
        throw std::invalid_argument("register: moving and fixed grids differ");
    const Volume3 m = normalize_min_max(moving);
    const Volume3 f = normalize_min_max(fixed);
    EngineSetup setup;
    setup.dual = false;
    setup.single_similarity = similarity;
    return run_engine(m, f, m, cfg, setup);
}

std::string serialize_trace(const std::vector<TraceEntry>& trace) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& e : trace) {
        os << e.iter << " " << e.level << " total " << e.total << "\n";
        os << e.iter << " " << e.level << " sim " << e.sim << "\n";
        os << e.iter << " " << e.level << " smooth " << e.smooth << "\n";
        os << e.iter << " " << e.level << " aux_o " << e.aux_o << "\n";
        os << e.iter << " " << e.level << " aux_s " << e.aux_s << "\n";
    }
    return os.str();
}

} // namespace dsreg
