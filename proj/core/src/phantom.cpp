#include "dsreg/phantom.hpp"

#include "dsreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace dsreg {

void PhantomSpec::validate() const {
    if (dims.nx < 8 || dims.ny < 8 || dims.nz < 8)
        throw ConfigError("phantom.dims: must be at least 8 per axis");
    if (!(spacing.sx > 0.0 && spacing.sy > 0.0 && spacing.sz > 0.0))
        throw ConfigError("phantom.spacing: must be strictly positive");
    if (noise_sigma_ct < 0.0) throw ConfigError("phantom.noise_ct: must be nonnegative");
    if (noise_sigma_mr < 0.0) throw ConfigError("phantom.noise_mr: must be nonnegative");
    if (deform_max < 0.0) throw ConfigError("phantom.deform_max: must be nonnegative");
    if (!(deform_sigma > 0.0)) throw ConfigError("phantom.deform_sigma: must be positive");
    if (landmarks_per_organ < 0)
        throw ConfigError("phantom.landmarks_per_organ: must be nonnegative");
    const auto check = [&](double c, double a, int n, const std::string& name) {
        if (!(a > 0.0)) throw ConfigError("phantom.organ." + name + ": semi-axes must be positive");
        if (c - a < 0.0 || c + a > double(n - 1))
            throw ConfigError("phantom.organ." + name + ": out of bounds");
    };
    for (const auto& o : organs) {
        check(o.center[0], o.semi_axes[0], dims.nx, o.name);
        check(o.center[1], o.semi_axes[1], dims.ny, o.name);
        check(o.center[2], o.semi_axes[2], dims.nz, o.name);
    }
}

std::vector<PhantomOrgan> default_organs(Dims d) {
    auto at = [&](double fx, double fy, double fz) -> Vec3 {
        return {fx * (d.nx - 1), fy * (d.ny - 1), fz * (d.nz - 1)};
    };
    // CT contrast order: body < liver < kidney < spleen
    // MR contrast order: body < kidney < spleen < liver
    return {
        {"body", at(0.50, 0.50, 0.50), at(0.42, 0.42, 0.44), 0.25, 0.15},
        {"liver", at(0.34, 0.42, 0.44), at(0.17, 0.14, 0.16), 0.55, 0.85},
        {"kidney", at(0.64, 0.58, 0.48), at(0.12, 0.10, 0.14), 0.75, 0.40},
        {"spleen", at(0.68, 0.30, 0.62), at(0.09, 0.09, 0.10), 0.90, 0.65},
    };
}

namespace {

// Normalized ellipsoid radius and an approximate signed distance to the
// boundary (voxels), used for the 1-voxel linear falloff.
double organ_membership(const PhantomOrgan& o, const Vec3& p) {
    const double ex = (p[0] - o.center[0]) / o.semi_axes[0];
    const double ey = (p[1] - o.center[1]) / o.semi_axes[1];
    const double ez = (p[2] - o.center[2]) / o.semi_axes[2];
    const double rho = std::sqrt(ex * ex + ey * ey + ez * ez);
    if (rho < 0.5) return 1.0;
    const double gx = ex / o.semi_axes[0];
    const double gy = ey / o.semi_axes[1];
    const double gz = ez / o.semi_axes[2];
    const double grad = std::sqrt(gx * gx + gy * gy + gz * gz) / rho;
    const double dist = (1.0 - rho) / grad; // > 0 inside
    return std::clamp(dist + 0.5, 0.0, 1.0);
}

double organ_rho(const PhantomOrgan& o, const Vec3& p) {
    const double ex = (p[0] - o.center[0]) / o.semi_axes[0];
    const double ey = (p[1] - o.center[1]) / o.semi_axes[1];
    const double ez = (p[2] - o.center[2]) / o.semi_axes[2];
    return std::sqrt(ex * ex + ey * ey + ez * ez);
}

double render(const std::vector<PhantomOrgan>& organs, const Vec3& p, bool ct) {
    double val = 0.0;
    for (const auto& o : organs) {
        const double m = organ_membership(o, p);
        if (m > 0.0) val += m * ((ct ? o.ct_intensity : o.mr_intensity) - val);
    }
    return val;
}

// Separable Gaussian smoothing with clamped borders, truncated at 3 sigma.
void smooth_component(std::vector<double>& comp, Dims d, double sigma) {
    const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(std::size_t(2 * radius + 1));
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        kernel[std::size_t(t + radius)] = std::exp(-0.5 * t * t / (sigma * sigma));
        sum += kernel[std::size_t(t + radius)];
    }
    for (auto& w : kernel) w /= sum;

    const int n[3] = {d.nx, d.ny, d.nz};
    const std::size_t stride[3] = {1, std::size_t(d.nx), std::size_t(d.nx) * d.ny};
    std::vector<double> tmp(comp.size());
    for (int axis = 0; axis < 3; ++axis) {
        const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
        for (int q = 0; q < n[a2]; ++q)
            for (int p = 0; p < n[a1]; ++p) {
                const std::size_t base =
                    std::size_t(p) * stride[a1] + std::size_t(q) * stride[a2];
                for (int x = 0; x < n[axis]; ++x) {
                    double acc = 0.0;
                    for (int t = -radius; t <= radius; ++t) {
                        const int xx = std::clamp(x + t, 0, n[axis] - 1);
                        acc += kernel[std::size_t(t + radius)] *
                               comp[base + std::size_t(xx) * stride[axis]];
                    }
                    tmp[base + std::size_t(x) * stride[axis]] = acc;
                }
            }
        comp.swap(tmp);
    }
}

DisplacementField make_gt_field(const PhantomSpec& spec) {
    DisplacementField field(spec.dims, spec.spacing);
    if (spec.deform_max == 0.0) return field;

    std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ULL + 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t nvox = spec.dims.voxels();
    std::vector<double> comp(nvox);
    for (int c = 0; c < 3; ++c) {
        for (auto& v : comp) v = gauss(rng);
        smooth_component(comp, spec.dims, spec.deform_sigma);
        for (std::size_t i = 0; i < nvox; ++i) field.data[3 * i + c] = comp[i];
    }

    double max_mag = 0.0;
    for (std::size_t i = 0; i < nvox; ++i) {
        const double ux = field.data[3 * i], uy = field.data[3 * i + 1],
                     uz = field.data[3 * i + 2];
        max_mag = std::max(max_mag, std::sqrt(ux * ux + uy * uy + uz * uz));
    }
    if (max_mag > 0.0) {
        const double scale = spec.deform_max / max_mag;
        for (auto& v : field.data) v *= scale;
    }
    return field;
}

Vec3 sample_field(const DisplacementField& f, const Vec3& p) {
    const Dims d = f.dims;
    const double x = std::clamp(p[0], 0.0, double(d.nx - 1));
    const double y = std::clamp(p[1], 0.0, double(d.ny - 1));
    const double z = std::clamp(p[2], 0.0, double(d.nz - 1));
    const int i0 = std::min(int(std::floor(x)), d.nx - 1);
    const int j0 = std::min(int(std::floor(y)), d.ny - 1);
    const int k0 = std::min(int(std::floor(z)), d.nz - 1);
    const int i1 = std::min(i0 + 1, d.nx - 1);
    const int j1 = std::min(j0 + 1, d.ny - 1);
    const int k1 = std::min(k0 + 1, d.nz - 1);
    const double fx = x - i0, fy = y - j0, fz = z - k0;
    Vec3 out;
    for (int c = 0; c < 3; ++c) {
        const double c00 = f(i0, j0, k0, c) + fx * (f(i1, j0, k0, c) - f(i0, j0, k0, c));
        const double c10 = f(i0, j1, k0, c) + fx * (f(i1, j1, k0, c) - f(i0, j1, k0, c));
        const double c01 = f(i0, j0, k1, c) + fx * (f(i1, j0, k1, c) - f(i0, j0, k1, c));
        const double c11 = f(i0, j1, k1, c) + fx * (f(i1, j1, k1, c) - f(i0, j1, k1, c));
        const double c0 = c00 + fy * (c10 - c00);
        const double c1 = c01 + fy * (c11 - c01);
        out[c] = c0 + fz * (c1 - c0);
    }
    return out;
}

// Fixed-point inversion: v(y) = -u(y + v(y)).
DisplacementField invert_field(const DisplacementField& u) {
    const Dims d = u.dims;
    DisplacementField v(d, u.spacing);
    for (int pass = 0; pass < 100; ++pass) {
        double max_change = 0.0;
        std::size_t n = 0;
        for (int k = 0; k < d.nz; ++k)
            for (int j = 0; j < d.ny; ++j)
                for (int i = 0; i < d.nx; ++i, ++n) {
                    const Vec3 cur{v.data[3 * n], v.data[3 * n + 1], v.data[3 * n + 2]};
                    const Vec3 s = sample_field(
                        u, {i + cur[0], j + cur[1], k + cur[2]});
                    for (int c = 0; c < 3; ++c) {
                        const double next = -s[c];
                        max_change = std::max(max_change, std::abs(next - v.data[3 * n + c]));
                        v.data[3 * n + c] = next;
                    }
                }
        if (max_change < 1e-12) break;
    }
    return v;
}

void add_noise(Volume3& vol, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (auto& v : vol.data) v = std::clamp(v + gauss(rng), 0.0, 1.0);
}

} // namespace

PhantomCase generate(const PhantomSpec& spec_in) {
    PhantomSpec spec = spec_in;
    if (spec.organs.empty()) spec.organs = default_organs(spec.dims);
    spec.validate();

    const Dims d = spec.dims;
    PhantomCase pc;
    pc.gt_field = make_gt_field(spec);
    const DisplacementField inv = invert_field(pc.gt_field);

    pc.fixed_mr = Volume3(d, spec.spacing);
    pc.fixed_ct = Volume3(d, spec.spacing);
    pc.moving_ct = Volume3(d, spec.spacing);
    pc.moving_mr = Volume3(d, spec.spacing);
    for (const auto& o : spec.organs) {
        pc.organ_names.push_back(o.name);
        pc.fixed_masks.emplace_back(d, spec.spacing);
        pc.moving_masks.emplace_back(d, spec.spacing);
    }

    std::size_t n = 0;
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i, ++n) {
                const Vec3 p{double(i), double(j), double(k)};
                pc.fixed_mr.data[n] = render(spec.organs, p, /*ct=*/false);
                pc.fixed_ct.data[n] = render(spec.organs, p, /*ct=*/true);
                const Vec3 w = sample_field(inv, p);
                const Vec3 q{p[0] + w[0], p[1] + w[1], p[2] + w[2]};
                pc.moving_ct.data[n] = render(spec.organs, q, /*ct=*/true);
                pc.moving_mr.data[n] = render(spec.organs, q, /*ct=*/false);
                for (std::size_t oi = 0; oi < spec.organs.size(); ++oi) {
                    pc.fixed_masks[oi].data[n] = organ_rho(spec.organs[oi], p) <= 1.0;
                    pc.moving_masks[oi].data[n] = organ_rho(spec.organs[oi], q) <= 1.0;
                }
            }

    add_noise(pc.fixed_mr, spec.noise_sigma_mr, spec.seed * 0x9e3779b97f4a7c15ULL + 2);
    add_noise(pc.fixed_ct, spec.noise_sigma_ct, spec.seed * 0x9e3779b97f4a7c15ULL + 3);
    add_noise(pc.moving_ct, spec.noise_sigma_ct, spec.seed * 0x9e3779b97f4a7c15ULL + 4);
    add_noise(pc.moving_mr, spec.noise_sigma_mr, spec.seed * 0x9e3779b97f4a7c15ULL + 5);

    // Landmarks: organ centroids plus seeded interior points, transported
    // by the ground-truth field.
    std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ULL + 6);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto add_landmark = [&](const std::string& label, const Vec3& p) {
        const Vec3 u = sample_field(pc.gt_field, p);
        const Vec3 f_mm{p[0] * spec.spacing.sx, p[1] * spec.spacing.sy,
                        p[2] * spec.spacing.sz};
        const Vec3 m_mm{(p[0] + u[0]) * spec.spacing.sx, (p[1] + u[1]) * spec.spacing.sy,
                        (p[2] + u[2]) * spec.spacing.sz};
        pc.fixed_landmarks.points.push_back({label, f_mm});
        pc.moving_landmarks.points.push_back({label, m_mm});
    };
    for (const auto& o : spec.organs) {
        add_landmark(o.name + "_centroid", o.center);
        int placed = 0;
        int guard = 0;
        while (placed < spec.landmarks_per_organ && guard < 10000) {
            ++guard;
            const Vec3 cand{o.center[0] + unit(rng) * o.semi_axes[0],
                            o.center[1] + unit(rng) * o.semi_axes[1],
                            o.center[2] + unit(rng) * o.semi_axes[2]};
            if (organ_rho(o, cand) < 0.7) {
                std::ostringstream label;
                label << o.name << "_p" << placed;
                add_landmark(label.str(), cand);
                ++placed;
            }
        }
    }
    return pc;
}

} // namespace dsreg
