#include "dsreg/translator.hpp"

#include "dsreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dsreg {

GammaRemapTranslator::GammaRemapTranslator(double gamma,
                                           std::vector<std::pair<double, double>> table)
    : gamma_(gamma), table_(std::move(table)) {
    if (!(gamma_ > 0.0)) throw std::invalid_argument("gamma must be positive");
    for (std::size_t i = 0; i < table_.size(); ++i) {
        const auto& [x, y] = table_[i];
        if (x < 0.0 || x > 1.0) throw std::invalid_argument("table breakpoints must lie in [0,1]");
        if (i > 0) {
            if (!(x > table_[i - 1].first))
                throw std::invalid_argument("table breakpoints must be strictly increasing");
            if (y < table_[i - 1].second)
                throw std::invalid_argument("table values must be nondecreasing");
        }
    }
}

double GammaRemapTranslator::map_value(double v) const {
    double t = std::pow(std::clamp(v, 0.0, 1.0), gamma_);
    if (!table_.empty()) {
        if (t <= table_.front().first) {
            t = table_.front().second;
        } else if (t >= table_.back().first) {
            t = table_.back().second;
        } else {
            auto it = std::upper_bound(table_.begin(), table_.end(), t,
                                       [](double a, const auto& b) { return a < b.first; });
            const auto& [x1, y1] = *it;
            const auto& [x0, y0] = *(it - 1);
            t = y0 + (y1 - y0) * (t - x0) / (x1 - x0);
        }
    }
    return std::clamp(t, 0.0, 1.0);
}

Volume3 GammaRemapTranslator::apply(const Volume3& vol) const {
    Volume3 out(vol.dims, vol.spacing);
    for (std::size_t n = 0; n < vol.data.size(); ++n) out.data[n] = map_value(vol.data[n]);
    return out;
}

Volume3 FixedVolumeTranslator::apply(const Volume3& input) const {
    if (!(input.dims == vol_.dims))
        throw std::invalid_argument("fixed translated volume dims differ from input");
    return vol_;
}

ArtifactInjector::ArtifactInjector(std::shared_ptr<const Translator> base,
                                   std::vector<Blob> blobs, std::uint64_t seed)
    : base_(std::move(base)), blobs_(std::move(blobs)), seed_(seed) {
    if (!base_) throw std::invalid_argument("artifact injector requires a base translator");
    for (const auto& b : blobs_) {
        if (!(b.radius > 0.0)) throw std::invalid_argument("blob radius must be positive");
        if (b.sign != 1 && b.sign != -1) throw std::invalid_argument("blob sign must be +1 or -1");
    }
}

ArtifactInjector ArtifactInjector::with_random_blobs(std::shared_ptr<const Translator> base,
                                                     Dims dims, int count, double radius,
                                                     double amplitude, std::uint64_t seed) {
    if (count < 0) throw std::invalid_argument("blob count must be nonnegative");
    std::mt19937_64 rng(seed);
    // Keep centers away from the border by one radius.
    auto coord = [&](int n) {
        const double lo = std::min(radius, 0.45 * n);
        std::uniform_real_distribution<double> d(lo, n - 1 - lo);
        return d(rng);
    };
    std::vector<Blob> blobs;
    std::uniform_int_distribution<int> signd(0, 1);
    for (int i = 0; i < count; ++i) {
        Blob b;
        b.center = {coord(dims.nx), coord(dims.ny), coord(dims.nz)};
        b.radius = radius;
        b.amplitude = amplitude;
        b.sign = signd(rng) ? 1 : -1;
        blobs.push_back(b);
    }
    return ArtifactInjector(std::move(base), std::move(blobs), seed);
}

Volume3 ArtifactInjector::apply(const Volume3& vol) const {
    for (const auto& b : blobs_) {
        if (b.center[0] < 0 || b.center[0] > vol.dims.nx - 1 || b.center[1] < 0 ||
            b.center[1] > vol.dims.ny - 1 || b.center[2] < 0 || b.center[2] > vol.dims.nz - 1)
            throw std::invalid_argument("blob center outside volume");
    }
    Volume3 out = base_->apply(vol);
    for (const auto& b : blobs_) {
        if (b.amplitude == 0.0) continue;
        const double sigma = b.radius / 2.0;
        const double amp = b.sign * b.amplitude;
        for (int k = 0; k < vol.dims.nz; ++k)
            for (int j = 0; j < vol.dims.ny; ++j)
                for (int i = 0; i < vol.dims.nx; ++i) {
                    const double dx = i - b.center[0], dy = j - b.center[1],
                                 dz = k - b.center[2];
                    const double r2 = dx * dx + dy * dy + dz * dz;
                    out(i, j, k) += amp * std::exp(-0.5 * r2 / (sigma * sigma));
                }
    }
    for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

} // namespace dsreg
