#include "dsreg/volume.hpp"

#include "dsreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsreg {

namespace {

void check_dims(const Dims& d) {
    if (d.nx <= 0 || d.ny <= 0 || d.nz <= 0)
        throw std::invalid_argument("volume dims must be positive");
}

void check_spacing(const Spacing& s) {
    if (!(s.sx > 0.0) || !(s.sy > 0.0) || !(s.sz > 0.0))
        throw std::invalid_argument("spacing components must be strictly positive");
}

} // namespace

Volume3::Volume3(Dims d, Spacing s, double fill) : dims(d), spacing(s) {
    check_dims(d);
    check_spacing(s);
    if (!std::isfinite(fill)) throw std::invalid_argument("fill value must be finite");
    data.assign(d.voxels(), fill);
}

Volume3::Volume3(Dims d, Spacing s, std::vector<double> values)
    : dims(d), spacing(s), data(std::move(values)) {
    check_dims(d);
    check_spacing(s);
    if (data.size() != d.voxels())
        throw std::invalid_argument("volume data length does not match dims");
    for (double v : data)
        if (!std::isfinite(v)) throw std::invalid_argument("volume contains non-finite values");
}

DisplacementField::DisplacementField(Dims d, Spacing s) : dims(d), spacing(s) {
    check_dims(d);
    check_spacing(s);
    data.assign(3 * d.voxels(), 0.0);
}

DisplacementField::DisplacementField(Dims d, Spacing s, std::vector<double> values)
    : dims(d), spacing(s), data(std::move(values)) {
    check_dims(d);
    check_spacing(s);
    if (data.size() != 3 * d.voxels())
        throw std::invalid_argument("field data length does not match 3*dims");
    for (double v : data)
        if (!std::isfinite(v)) throw std::invalid_argument("field contains non-finite values");
}

BinaryMask::BinaryMask(Dims d, Spacing s, std::uint8_t fill) : dims(d), spacing(s) {
    check_dims(d);
    check_spacing(s);
    data.assign(d.voxels(), fill ? 1 : 0);
}

BinaryMask::BinaryMask(Dims d, Spacing s, std::vector<std::uint8_t> values)
    : dims(d), spacing(s), data(std::move(values)) {
    check_dims(d);
    check_spacing(s);
    if (data.size() != d.voxels())
        throw std::invalid_argument("mask data length does not match dims");
}

double sample_trilinear(const Volume3& vol, const Vec3& p) {
    const int nx = vol.dims.nx, ny = vol.dims.ny, nz = vol.dims.nz;
    const double x = std::clamp(p[0], 0.0, double(nx - 1));
    const double y = std::clamp(p[1], 0.0, double(ny - 1));
    const double z = std::clamp(p[2], 0.0, double(nz - 1));

    const int i0 = std::min(int(std::floor(x)), nx - 1);
    const int j0 = std::min(int(std::floor(y)), ny - 1);
    const int k0 = std::min(int(std::floor(z)), nz - 1);
    const int i1 = std::min(i0 + 1, nx - 1);
    const int j1 = std::min(j0 + 1, ny - 1);
    const int k1 = std::min(k0 + 1, nz - 1);
    const double fx = x - i0, fy = y - j0, fz = z - k0;

    const double c000 = vol(i0, j0, k0), c100 = vol(i1, j0, k0);
    const double c010 = vol(i0, j1, k0), c110 = vol(i1, j1, k0);
    const double c001 = vol(i0, j0, k1), c101 = vol(i1, j0, k1);
    const double c011 = vol(i0, j1, k1), c111 = vol(i1, j1, k1);

    const double c00 = c000 + fx * (c100 - c000);
    const double c10 = c010 + fx * (c110 - c010);
    const double c01 = c001 + fx * (c101 - c001);
    const double c11 = c011 + fx * (c111 - c011);
    const double c0 = c00 + fy * (c10 - c00);
    const double c1 = c01 + fy * (c11 - c01);
    return c0 + fz * (c1 - c0);
}

Vec3 sample_trilinear_grad(const Volume3& vol, const Vec3& p) {
    const int nx = vol.dims.nx, ny = vol.dims.ny, nz = vol.dims.nz;
    const bool cx = p[0] < 0.0 || p[0] > double(nx - 1);
    const bool cy = p[1] < 0.0 || p[1] > double(ny - 1);
    const bool cz = p[2] < 0.0 || p[2] > double(nz - 1);
    const double x = std::clamp(p[0], 0.0, double(nx - 1));
    const double y = std::clamp(p[1], 0.0, double(ny - 1));
    const double z = std::clamp(p[2], 0.0, double(nz - 1));

    const int i0 = std::min(int(std::floor(x)), nx - 1);
    const int j0 = std::min(int(std::floor(y)), ny - 1);
    const int k0 = std::min(int(std::floor(z)), nz - 1);
    const int i1 = std::min(i0 + 1, nx - 1);
    const int j1 = std::min(j0 + 1, ny - 1);
    const int k1 = std::min(k0 + 1, nz - 1);
    const double fx = x - i0, fy = y - j0, fz = z - k0;

    const double c000 = vol(i0, j0, k0), c100 = vol(i1, j0, k0);
    const double c010 = vol(i0, j1, k0), c110 = vol(i1, j1, k0);
    const double c001 = vol(i0, j0, k1), c101 = vol(i1, j0, k1);
    const double c011 = vol(i0, j1, k1), c111 = vol(i1, j1, k1);

    const double gx = (1 - fy) * (1 - fz) * (c100 - c000) + fy * (1 - fz) * (c110 - c010) +
                      (1 - fy) * fz * (c101 - c001) + fy * fz * (c111 - c011);
    const double gy = (1 - fx) * (1 - fz) * (c010 - c000) + fx * (1 - fz) * (c110 - c100) +
                      (1 - fx) * fz * (c011 - c001) + fx * fz * (c111 - c101);
    const double gz = (1 - fx) * (1 - fy) * (c001 - c000) + fx * (1 - fy) * (c101 - c100) +
                      (1 - fx) * fy * (c011 - c010) + fx * fy * (c111 - c110);
    return {cx ? 0.0 : gx, cy ? 0.0 : gy, cz ? 0.0 : gz};
}

Volume3 warp(const Volume3& moving, const DisplacementField& field) {
    if (!(moving.dims == field.dims))
        throw std::invalid_argument("warp: moving and field dims differ");
    Volume3 out(moving.dims, moving.spacing);
    std::size_t n = 0;
    for (int k = 0; k < moving.dims.nz; ++k)
        for (int j = 0; j < moving.dims.ny; ++j)
            for (int i = 0; i < moving.dims.nx; ++i, ++n) {
                const double ux = field.data[3 * n], uy = field.data[3 * n + 1],
                             uz = field.data[3 * n + 2];
                out.data[n] = sample_trilinear(moving, {i + ux, j + uy, k + uz});
            }
    return out;
}

std::vector<Volume3> warp_multichannel(const std::vector<Volume3>& channels,
                                       const DisplacementField& field) {
    std::vector<Volume3> out;
    out.reserve(channels.size());
    for (const auto& c : channels) {
        if (!(c.dims == field.dims))
            throw std::invalid_argument("warp_multichannel: channel dims differ from field");
        out.push_back(warp(c, field));
    }
    return out;
}

Volume3 gaussian_blur_3x3x3(const Volume3& vol, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("blur sigma must be positive");
    const double w1 = std::exp(-0.5 / (sigma * sigma));
    const double norm = 1.0 + 2.0 * w1;
    const double wc = 1.0 / norm, ws = w1 / norm;

    const Dims d = vol.dims;
    auto pass = [&](const Volume3& in, int axis) {
        Volume3 out(d, vol.spacing);
        const int n[3] = {d.nx, d.ny, d.nz};
        for (int k = 0; k < d.nz; ++k)
            for (int j = 0; j < d.ny; ++j)
                for (int i = 0; i < d.nx; ++i) {
                    int c[3] = {i, j, k};
                    int lo[3] = {i, j, k}, hi[3] = {i, j, k};
                    lo[axis] = std::max(0, c[axis] - 1);
                    hi[axis] = std::min(n[axis] - 1, c[axis] + 1);
                    out(i, j, k) = wc * in(i, j, k) + ws * (in(lo[0], lo[1], lo[2]) +
                                                           in(hi[0], hi[1], hi[2]));
                }
        return out;
    };
    Volume3 tmp = pass(vol, 0);
    tmp = pass(tmp, 1);
    return pass(tmp, 2);
}

Volume3 resample(const Volume3& vol, const std::array<double, 3>& factor) {
    for (double f : factor)
        if (!(f > 0.0)) throw std::invalid_argument("resample factor must be positive");

    const Dims in = vol.dims;
    Dims out{int(std::lround(in.nx * factor[0])), int(std::lround(in.ny * factor[1])),
             int(std::lround(in.nz * factor[2]))};
    if (out.nx < 2 || out.ny < 2 || out.nz < 2)
        throw std::invalid_argument("resample: output dims degenerate (< 2 per axis)");

    if (out == in) return vol;

    const bool down = out.nx < in.nx || out.ny < in.ny || out.nz < in.nz;
    Volume3 blurred;
    const Volume3* sp = &vol;
    if (down) {
        blurred = gaussian_blur_3x3x3(vol, 1.0);
        sp = &blurred;
    }

    Spacing sout{vol.spacing.sx * double(in.nx) / double(out.nx),
                 vol.spacing.sy * double(in.ny) / double(out.ny),
                 vol.spacing.sz * double(in.nz) / double(out.nz)};
    Volume3 res(out, sout);
    const double rx = out.nx > 1 ? double(in.nx - 1) / double(out.nx - 1) : 0.0;
    const double ry = out.ny > 1 ? double(in.ny - 1) / double(out.ny - 1) : 0.0;
    const double rz = out.nz > 1 ? double(in.nz - 1) / double(out.nz - 1) : 0.0;
    for (int k = 0; k < out.nz; ++k)
        for (int j = 0; j < out.ny; ++j)
            for (int i = 0; i < out.nx; ++i)
                res(i, j, k) = sample_trilinear(*sp, {i * rx, j * ry, k * rz});
    return res;
}

DisplacementField upsample_field(const DisplacementField& field, Dims target) {
    const Dims in = field.dims;
    if (target.nx < in.nx || target.ny < in.ny || target.nz < in.nz)
        throw std::invalid_argument("upsample_field: target smaller than source");
    if (target == in) return field;

    const double sx = double(target.nx) / double(in.nx);
    const double sy = double(target.ny) / double(in.ny);
    const double sz = double(target.nz) / double(in.nz);
    Spacing sp{field.spacing.sx * double(in.nx) / double(target.nx),
               field.spacing.sy * double(in.ny) / double(target.ny),
               field.spacing.sz * double(in.nz) / double(target.nz)};

    // Per-component trilinear upsample on the align-corners lattice.
    const double rx = target.nx > 1 ? double(in.nx - 1) / double(target.nx - 1) : 0.0;
    const double ry = target.ny > 1 ? double(in.ny - 1) / double(target.ny - 1) : 0.0;
    const double rz = target.nz > 1 ? double(in.nz - 1) / double(target.nz - 1) : 0.0;

    Volume3 comp(in, field.spacing);
    DisplacementField out(target, sp);
    const double scale[3] = {sx, sy, sz};
    for (int c = 0; c < 3; ++c) {
        for (std::size_t n = 0; n < in.voxels(); ++n) comp.data[n] = field.data[3 * n + c];
        std::size_t m = 0;
        for (int k = 0; k < target.nz; ++k)
            for (int j = 0; j < target.ny; ++j)
                for (int i = 0; i < target.nx; ++i, ++m)
                    out.data[3 * m + c] =
                        scale[c] * sample_trilinear(comp, {i * rx, j * ry, k * rz});
    }
    return out;
}

} // namespace dsreg
