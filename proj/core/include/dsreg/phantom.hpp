#pragma once

#include "dsreg/metrics.hpp"
#include "dsreg/volume.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dsreg {

// Ellipsoidal organ with per-modality intensities. Coordinates are in
// voxels of the phantom grid.
struct PhantomOrgan {
    std::string name;
    Vec3 center;
    Vec3 semi_axes;
    double ct_intensity = 0.5;
    double mr_intensity = 0.5;
};

struct PhantomSpec {
    Dims dims{64, 64, 64};
    Spacing spacing{1.0, 1.0, 1.0};
    std::vector<PhantomOrgan> organs; // empty -> default_organs(dims)
    double noise_sigma_ct = 0.02;
    double noise_sigma_mr = 0.02;
    double deform_max = 3.0;   // voxels
    double deform_sigma = 8.0; // voxels
    std::uint64_t seed = 0;
    int landmarks_per_organ = 10; // interior points in addition to the centroid

    void validate() const;
};

// Contrast order deliberately differs between the two intensity tables so
// the pair is genuinely multimodal.
std::vector<PhantomOrgan> default_organs(Dims dims);

struct PhantomCase {
    Volume3 fixed_mr;  // fixed image
    Volume3 moving_ct; // moving image
    Volume3 fixed_ct;  // CT render of the fixed geometry (modality-gap checks)
    Volume3 moving_mr; // MR render of the moving geometry (faithful translation)
    DisplacementField gt_field; // maps fixed coordinates to moving samples
    std::vector<std::string> organ_names;
    std::vector<BinaryMask> fixed_masks;
    std::vector<BinaryMask> moving_masks;
    LandmarkSet fixed_landmarks;
    LandmarkSet moving_landmarks;
};

// Deterministic per seed, bitwise.
PhantomCase generate(const PhantomSpec& spec);

} // namespace dsreg
