#pragma once

#include "dsreg/mind.hpp"
#include "dsreg/translator.hpp"
#include "dsreg/volume.hpp"

#include <string>
#include <vector>

namespace dsreg {

// Scalar loss value plus its gradient with respect to the differentiated
// argument, laid out like that argument's data array.
struct LossValueGrad {
    double value = 0.0;
    std::vector<double> grad;
};

struct SsimParams {
    int window_radius = 3; // 7x7x7 uniform window
    double c1 = 1e-4;      // (0.01 * L)^2, L = 1
    double c2 = 9e-4;      // (0.03 * L)^2
};

struct TranslationLossWeights {
    double cyc = 10.0;
    double identity = 5.0;
    double mind = 5.0;
};

// Mean local SSIM over all voxels; uniform window truncated at borders.
double ssim_index(const Volume3& a, const Volume3& b, const SsimParams& params = {});

// value = 1 - ssim_index(a, b); grad with respect to b.
LossValueGrad ssim_loss(const Volume3& a, const Volume3& b, const SsimParams& params = {});

// value = mean squared difference; grad = 2 (b - a) / N with respect to b.
LossValueGrad mse_loss(const Volume3& a, const Volume3& b);

// value = sum |ma - mb| / (N * 6); grad = sign(mb - ma) / (N * 6) w.r.t. mb.
LossValueGrad mind_l1_loss(const MindVolume& ma, const MindVolume& mb);

// Mean over components, voxels and the 3 forward-difference directions of
// the squared difference; far-border differences omitted. Grad w.r.t. the
// field (the discrete negative-Laplacian adjoint).
LossValueGrad smoothness_loss(const DisplacementField& field);

// Mean absolute change a translator applies to an image already in its
// target domain (one direction of the identity penalty).
double identity_translation_loss(const Translator& t, const Volume3& same_domain);

// Mean absolute difference between bwd(fwd(vol)) and vol.
double cycle_consistency_loss(const Translator& fwd, const Translator& bwd,
                              const Volume3& vol);

// Deterministic translator score: cycle, identity and descriptor terms in
// both directions plus their weighted sum. Adversarial terms are not
// computed here (no discriminators exist in this artifact).
struct TranslationScore {
    double cycle_ct = 0.0;    // ct -> fwd -> bwd -> ct
    double cycle_mr = 0.0;    // mr -> bwd -> fwd -> mr
    double identity_mr = 0.0; // |fwd(mr) - mr|
    double identity_ct = 0.0; // |bwd(ct) - ct|
    double mind_ct = 0.0;     // descriptor distance, fwd(ct) vs ct
    double mind_mr = 0.0;     // descriptor distance, bwd(mr) vs mr
    double cycle = 0.0;
    double identity = 0.0;
    double mind = 0.0;
    double weighted_total = 0.0;

    // One `name = value` per line; adversarial terms marked not computed.
    std::string serialize() const;
};

// fwd translates CT -> MR, bwd translates MR -> CT.
TranslationScore translation_score(const Translator& fwd, const Translator& bwd,
                                   const std::vector<Volume3>& ct_vols,
                                   const std::vector<Volume3>& mr_vols,
                                   const TranslationLossWeights& weights = {},
                                   const MindParams& mind_params = {});

} // namespace dsreg
