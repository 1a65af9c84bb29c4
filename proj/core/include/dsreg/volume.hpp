#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace dsreg {

struct Dims {
    int nx = 0, ny = 0, nz = 0;

    std::size_t voxels() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    bool operator==(const Dims&) const = default;
};

struct Spacing {
    double sx = 1.0, sy = 1.0, sz = 1.0;
    bool operator==(const Spacing&) const = default;
};

using Vec3 = std::array<double, 3>;

// Dense scalar 3D image. Data is row-major with x fastest:
// index = x + nx*(y + ny*z). Values are float64.
struct Volume3 {
    Dims dims;
    Spacing spacing;
    std::vector<double> data;

    Volume3() = default;
    Volume3(Dims d, Spacing s, double fill = 0.0);
    Volume3(Dims d, Spacing s, std::vector<double> values);

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims.nx) *
                   (static_cast<std::size_t>(j) +
                    static_cast<std::size_t>(dims.ny) * static_cast<std::size_t>(k));
    }
    double operator()(int i, int j, int k) const { return data[index(i, j, k)]; }
    double& operator()(int i, int j, int k) { return data[index(i, j, k)]; }
};

// Dense displacement field: 3 interleaved components per voxel, in voxel
// units of the grid it lives on.
struct DisplacementField {
    Dims dims;
    Spacing spacing;
    std::vector<double> data;

    DisplacementField() = default;
    DisplacementField(Dims d, Spacing s);
    DisplacementField(Dims d, Spacing s, std::vector<double> values);

    std::size_t index(int i, int j, int k, int c) const {
        return 3 * (static_cast<std::size_t>(i) +
                    static_cast<std::size_t>(dims.nx) *
                        (static_cast<std::size_t>(j) +
                         static_cast<std::size_t>(dims.ny) * static_cast<std::size_t>(k))) +
               static_cast<std::size_t>(c);
    }
    double operator()(int i, int j, int k, int c) const { return data[index(i, j, k, c)]; }
    double& operator()(int i, int j, int k, int c) { return data[index(i, j, k, c)]; }

    Vec3 at(int i, int j, int k) const {
        std::size_t n = index(i, j, k, 0);
        return {data[n], data[n + 1], data[n + 2]};
    }
};

struct BinaryMask {
    Dims dims;
    Spacing spacing;
    std::vector<std::uint8_t> data;

    BinaryMask() = default;
    BinaryMask(Dims d, Spacing s, std::uint8_t fill = 0);
    BinaryMask(Dims d, Spacing s, std::vector<std::uint8_t> values);

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims.nx) *
                   (static_cast<std::size_t>(j) +
                    static_cast<std::size_t>(dims.ny) * static_cast<std::size_t>(k));
    }
    bool operator()(int i, int j, int k) const { return data[index(i, j, k)] != 0; }
};

// Trilinear interpolation with clamp-to-edge boundaries; total for any
// finite p.
double sample_trilinear(const Volume3& vol, const Vec3& p);

// Derivative of sample_trilinear with respect to p. Zero along axes where
// p is clamped outside the grid.
Vec3 sample_trilinear_grad(const Volume3& vol, const Vec3& p);

// out[x] = moving(x + field(x)).
Volume3 warp(const Volume3& moving, const DisplacementField& field);

// Channel-wise warp with a shared field.
std::vector<Volume3> warp_multichannel(const std::vector<Volume3>& channels,
                                       const DisplacementField& field);

// Resample by a per-axis factor. Downsampling pre-blurs with a 3x3x3
// Gaussian (sigma 1 voxel). Spacing is rescaled to preserve physical extent.
Volume3 resample(const Volume3& vol, const std::array<double, 3>& factor);

// Trilinear upsample of each component, scaled by the per-axis dimension
// ratio so displacements stay in voxel units of the target grid.
DisplacementField upsample_field(const DisplacementField& field, Dims target);

// Separable 3x3x3 Gaussian blur (sigma in voxels), clamped borders,
// weights normalized per axis.
Volume3 gaussian_blur_3x3x3(const Volume3& vol, double sigma);

} // namespace dsreg
