#include "dsreg/mind.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsreg {

MindVolume::MindVolume(Dims d, Spacing s) : dims(d), spacing(s) {
    if (d.nx <= 0 || d.ny <= 0 || d.nz <= 0)
        throw std::invalid_argument("mind dims must be positive");
    data.assign(kChannels * d.voxels(), 0.0);
}

Volume3 MindVolume::channel(int c) const {
    if (c < 0 || c >= kChannels) throw std::invalid_argument("mind channel out of range");
    Volume3 out(dims, spacing);
    for (std::size_t n = 0; n < dims.voxels(); ++n) out.data[n] = data[kChannels * n + c];
    return out;
}

namespace {

struct PatchTap {
    int dx, dy, dz;
    double w;
};

std::vector<PatchTap> patch_taps(int radius, double sigma) {
    std::vector<PatchTap> taps;
    double sum = 0.0;
    for (int dz = -radius; dz <= radius; ++dz)
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                const double d2 = double(dx * dx + dy * dy + dz * dz);
                const double w = std::exp(-0.5 * d2 / (sigma * sigma));
                taps.push_back({dx, dy, dz, w});
                sum += w;
            }
    for (auto& t : taps) t.w /= sum;
    return taps;
}

} // namespace

MindVolume mind(const Volume3& vol, const MindParams& params) {
    if (params.patch_radius < 1) throw std::invalid_argument("mind: patch_radius must be >= 1");
    if (!(params.patch_sigma > 0.0)) throw std::invalid_argument("mind: patch_sigma must be > 0");
    if (!(params.variance_floor > 0.0))
        throw std::invalid_argument("mind: variance_floor must be > 0");
    const Dims d = vol.dims;
    if (d.nx < 3 || d.ny < 3 || d.nz < 3)
        throw std::invalid_argument("mind: volume must be at least 3 voxels per axis");

    static constexpr int offsets[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                          {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
    const auto taps = patch_taps(params.patch_radius, params.patch_sigma);

    auto clampv = [&](int i, int j, int k) {
        return vol(std::clamp(i, 0, d.nx - 1), std::clamp(j, 0, d.ny - 1),
                   std::clamp(k, 0, d.nz - 1));
    };

    MindVolume out(d, vol.spacing);
    std::size_t n = 0;
    double dist[6];
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i, ++n) {
                double mean = 0.0;
                for (int r = 0; r < 6; ++r) {
                    const int ox = offsets[r][0], oy = offsets[r][1], oz = offsets[r][2];
                    double ssd = 0.0;
                    for (const auto& t : taps) {
                        const double a = clampv(i + t.dx, j + t.dy, k + t.dz);
                        const double b = clampv(i + ox + t.dx, j + oy + t.dy, k + oz + t.dz);
                        ssd += t.w * (a - b) * (a - b);
                    }
                    dist[r] = ssd;
                    mean += ssd;
                }
                const double var = std::max(mean / 6.0, params.variance_floor);
                double maxraw = 0.0;
                for (int r = 0; r < 6; ++r) {
                    dist[r] = std::exp(-dist[r] / var);
                    maxraw = std::max(maxraw, dist[r]);
                }
                for (int r = 0; r < 6; ++r)
                    out.data[MindVolume::kChannels * n + r] = dist[r] / maxraw;
            }
    return out;
}

} // namespace dsreg
