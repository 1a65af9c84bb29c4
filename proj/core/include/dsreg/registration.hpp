#pragma once

#include "dsreg/losses.hpp"
#include "dsreg/mind.hpp"
#include "dsreg/translator.hpp"
#include "dsreg/volume.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace dsreg {

// 3x3x3 convolution fusing the stacked stream fields (6 input channels:
// phi_o xyz then phi_s xyz) into the final 3-component field. Zero padding
// at borders, bias per output channel, no activation.
struct FusionKernel {
    static constexpr int kTaps = 27;
    static constexpr int kIn = 6;
    static constexpr int kOut = 3;
    static constexpr int kWeights = kTaps * kIn * kOut;

    std::array<double, kWeights> weights{};
    std::array<double, kOut> biases{};

    // tap index for spatial offset (dx, dy, dz), each in {-1, 0, 1}
    static int tap(int dx, int dy, int dz) { return (dz + 1) * 9 + (dy + 1) * 3 + (dx + 1); }

    double& w(int tap_, int cin, int cout) {
        return weights[(std::size_t(tap_) * kIn + cin) * kOut + cout];
    }
    double w(int tap_, int cin, int cout) const {
        return weights[(std::size_t(tap_) * kIn + cin) * kOut + cout];
    }

    // Center-tap 0.5 on matching components of each stream, zero elsewhere,
    // zero bias: fuse(F, F) == F exactly.
    static FusionKernel averaging();
};

enum class Similarity { ssim, mind, mse };

std::string to_string(Similarity s);
Similarity similarity_from_string(const std::string& s);

struct OptimizerParams {
    double step_field = 0.1;
    double step_kernel = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct RegistrationConfig {
    double lambda_smooth = 1.0;
    Similarity similarity = Similarity::ssim; // fused term
    double alpha_o = 0.5;                     // multimodal stream MIND term
    double alpha_s = 0.5;                     // unimodal stream SSIM term
    int pyramid_levels = 3;                   // coarsest is x4 downsample
    std::vector<int> iterations = {200, 100, 50}; // coarse -> fine
    OptimizerParams optimizer;
    SsimParams ssim;
    MindParams mind;
    std::uint64_t seed = 0;

    void validate() const;
    // Iterations for pyramid level `idx` (0 = coarsest); reuses the last
    // entry when fewer entries than levels are given.
    int iterations_at(int idx) const;
};

struct TraceEntry {
    int iter = 0;  // global iteration index
    int level = 0; // 0 = coarsest
    double total = 0.0, sim = 0.0, smooth = 0.0, aux_o = 0.0, aux_s = 0.0;
};

struct RegistrationResult {
    DisplacementField phi_o, phi_s, phi_os;
    FusionKernel kernel;
    std::vector<TraceEntry> trace;
    Volume3 moved; // warp of the (normalized) moving volume by phi_os
};

// Stacks the two fields and applies the fusion convolution.
DisplacementField fuse(const DisplacementField& phi_o, const DisplacementField& phi_s,
                       const FusionKernel& k);

// Adjoint of the linear part of fuse plus kernel/bias gradients: given the
// cotangent g on the output, accumulates gradients on both input fields and
// on the kernel.
void fuse_adjoint(const DisplacementField& phi_o, const DisplacementField& phi_s,
                  const FusionKernel& k, const DisplacementField& g,
                  DisplacementField& g_phi_o, DisplacementField& g_phi_s,
                  FusionKernel& g_kernel);

struct TotalLossResult {
    double total = 0.0, sim = 0.0, smooth = 0.0, aux_o = 0.0, aux_s = 0.0;
    DisplacementField g_phi_o, g_phi_s;
    FusionKernel g_kernel;
};

// The full dual-stream objective and its gradients:
//   sim(rmr, rct o phi_os) + lambda * smooth(phi_os)
//   + alpha_o * mindL1(M(rmr), M(rct) o phi_o)
//   + alpha_s * (1 - ssim(rmr, tmr o phi_s))
// where phi_os = fuse(phi_o, phi_s, k). Descriptors are computed once per
// call on the unwarped inputs and their channels warped by the field.
TotalLossResult total_loss(const Volume3& rct, const Volume3& rmr, const Volume3& tmr,
                           const DisplacementField& phi_o, const DisplacementField& phi_s,
                           const FusionKernel& k, const RegistrationConfig& cfg);

// Dual-stream registration of moving rct to fixed rmr across a pyramid.
// Inputs are min-max normalized to [0,1] internally; the translator runs
// once at full resolution on the normalized moving volume.
RegistrationResult register_dual(const Volume3& rct, const Volume3& rmr,
                                 const Translator& translator,
                                 const RegistrationConfig& cfg);

// Single-field variant (no fusion, phi_os is the field itself) with the
// given similarity for the data term.
RegistrationResult register_single_stream(const Volume3& moving, const Volume3& fixed,
                                          Similarity similarity,
                                          const RegistrationConfig& cfg);

// Min-max normalization to [0,1]; a constant volume maps to all zeros.
Volume3 normalize_min_max(const Volume3& vol);

std::string serialize_trace(const std::vector<TraceEntry>& trace);

} // namespace dsreg
