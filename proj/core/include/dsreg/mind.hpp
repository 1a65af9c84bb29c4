#pragma once

#include "dsreg/volume.hpp"

namespace dsreg {

// 6-channel modality independent neighbourhood descriptor field.
// Channel order follows the six-neighborhood offsets:
//   0:+x 1:-x 2:+y 3:-y 4:+z 5:-z
// Values lie in (0,1]; the per-voxel channel maximum is exactly 1.
struct MindVolume {
    static constexpr int kChannels = 6;

    Dims dims;
    Spacing spacing;
    std::vector<double> data; // 6 interleaved channels per voxel

    MindVolume() = default;
    MindVolume(Dims d, Spacing s);

    std::size_t index(int i, int j, int k, int c) const {
        return kChannels * (static_cast<std::size_t>(i) +
                            static_cast<std::size_t>(dims.nx) *
                                (static_cast<std::size_t>(j) +
                                 static_cast<std::size_t>(dims.ny) *
                                     static_cast<std::size_t>(k))) +
               static_cast<std::size_t>(c);
    }
    double operator()(int i, int j, int k, int c) const { return data[index(i, j, k, c)]; }
    double& operator()(int i, int j, int k, int c) { return data[index(i, j, k, c)]; }

    // Copies one channel out as a scalar volume.
    Volume3 channel(int c) const;
};

struct MindParams {
    int patch_radius = 1;    // 3x3x3 patch
    double patch_sigma = 0.5; // Gaussian patch weighting, voxels
    double variance_floor = 1e-6;
};

// Self-similarity descriptor over the six-neighborhood. For each voxel x and
// offset r: D(x,r) is the Gaussian-weighted SSD between the (clamped) patch
// at x and the patch at x+r; V(x) = mean_r D(x,r) floored at variance_floor;
// channels are exp(-D/V) normalized by their per-voxel maximum.
MindVolume mind(const Volume3& vol, const MindParams& params = {});

} // namespace dsreg
