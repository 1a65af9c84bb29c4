#pragma once

#include "dsreg/volume.hpp"

#include <string>
#include <vector>

namespace dsreg {

// Anatomical landmarks in physical (millimeter) coordinates.
struct Landmark {
    std::string label;
    Vec3 point_mm;
};

struct LandmarkSet {
    std::vector<Landmark> points;
};

// 2|A n B| / (|A| + |B|); 1.0 when both masks are empty.
double dice(const BinaryMask& a, const BinaryMask& b);

// Trilinear warp of the mask as a real-valued volume, thresholded at 0.5.
BinaryMask warp_mask(const BinaryMask& mask, const DisplacementField& field);

// Mean target registration error in millimeters. Each fixed-space landmark
// is mapped through the field (mm -> voxels via spacing, plus interpolated
// displacement, back to mm) and compared to its moving-space correspondent.
double tre(const LandmarkSet& moving_lm, const LandmarkSet& fixed_lm,
           const DisplacementField& field, const Spacing& spacing);

// 10 log10(peak^2 / MSE); +infinity when MSE == 0.
double psnr(const Volume3& a, const Volume3& b, double peak);

} // namespace dsreg
