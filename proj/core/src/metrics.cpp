#include "dsreg/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dsreg {

double dice(const BinaryMask& a, const BinaryMask& b) {
    if (!(a.dims == b.dims)) throw std::invalid_argument("dice: dims mismatch");
    std::size_t na = 0, nb = 0, inter = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const bool va = a.data[i] != 0, vb = b.data[i] != 0;
        na += va;
        nb += vb;
        inter += va && vb;
    }
    if (na + nb == 0) return 1.0; // agreement on absence
    return 2.0 * double(inter) / double(na + nb);
}

BinaryMask warp_mask(const BinaryMask& mask, const DisplacementField& field) {
    if (!(mask.dims == field.dims)) throw std::invalid_argument("warp_mask: dims mismatch");
    Volume3 real(mask.dims, mask.spacing);
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        real.data[i] = mask.data[i] ? 1.0 : 0.0;
    const Volume3 warped = warp(real, field);
    BinaryMask out(mask.dims, mask.spacing);
    for (std::size_t i = 0; i < warped.data.size(); ++i)
        out.data[i] = warped.data[i] >= 0.5 ? 1 : 0;
    return out;
}

double tre(const LandmarkSet& moving_lm, const LandmarkSet& fixed_lm,
           const DisplacementField& field, const Spacing& spacing) {
    if (moving_lm.points.size() != fixed_lm.points.size())
        throw std::invalid_argument("tre: landmark sets have different sizes");
    if (fixed_lm.points.empty()) throw std::invalid_argument("tre: empty landmark sets");

    const Dims d = field.dims;
    double sum = 0.0;
    for (std::size_t i = 0; i < fixed_lm.points.size(); ++i) {
        const auto& f = fixed_lm.points[i];
        const auto& m = moving_lm.points[i];
        if (f.label != m.label)
            throw std::invalid_argument("tre: unpaired landmark '" + f.label + "'");
        const Vec3 pv = {f.point_mm[0] / spacing.sx, f.point_mm[1] / spacing.sy,
                         f.point_mm[2] / spacing.sz};
        if (pv[0] < 0 || pv[0] > d.nx - 1 || pv[1] < 0 || pv[1] > d.ny - 1 || pv[2] < 0 ||
            pv[2] > d.nz - 1)
            throw std::invalid_argument("tre: landmark '" + f.label +
                                        "' outside the field extent");
        Vec3 u{};
        // trilinear interpolation of the 3 components at pv
        {
            const int nx = d.nx, ny = d.ny, nz = d.nz;
            const int i0 = std::min(int(std::floor(pv[0])), nx - 1);
            const int j0 = std::min(int(std::floor(pv[1])), ny - 1);
            const int k0 = std::min(int(std::floor(pv[2])), nz - 1);
            const int i1 = std::min(i0 + 1, nx - 1);
            const int j1 = std::min(j0 + 1, ny - 1);
            const int k1 = std::min(k0 + 1, nz - 1);
            const double fx = pv[0] - i0, fy = pv[1] - j0, fz = pv[2] - k0;
            for (int c = 0; c < 3; ++c) {
                const double c00 = field(i0, j0, k0, c) +
                                   fx * (field(i1, j0, k0, c) - field(i0, j0, k0, c));
                const double c10 = field(i0, j1, k0, c) +
                                   fx * (field(i1, j1, k0, c) - field(i0, j1, k0, c));
                const double c01 = field(i0, j0, k1, c) +
                                   fx * (field(i1, j0, k1, c) - field(i0, j0, k1, c));
                const double c11 = field(i0, j1, k1, c) +
                                   fx * (field(i1, j1, k1, c) - field(i0, j1, k1, c));
                const double c0 = c00 + fy * (c10 - c00);
                const double c1 = c01 + fy * (c11 - c01);
                u[c] = c0 + fz * (c1 - c0);
            }
        }
        const double dx = f.point_mm[0] + u[0] * spacing.sx - m.point_mm[0];
        const double dy = f.point_mm[1] + u[1] * spacing.sy - m.point_mm[1];
        const double dz = f.point_mm[2] + u[2] * spacing.sz - m.point_mm[2];
        sum += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    return sum / double(fixed_lm.points.size());
}

double psnr(const Volume3& a, const Volume3& b, double peak) {
    if (!(a.dims == b.dims)) throw std::invalid_argument("psnr: dims mismatch");
    if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double diff = a.data[i] - b.data[i];
        mse += diff * diff;
    }
    mse /= double(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

} // namespace dsreg
