#pragma once

#include "dsreg/volume.hpp"

#include <cstdint>
#include <memory>
#include <utility>

namespace dsreg {

// Deterministic stand-in for a modality translation generator. Outputs keep
// the input dims and spacing; intensities are clipped to [0,1].
class Translator {
public:
    virtual ~Translator() = default;
    virtual Volume3 apply(const Volume3& vol) const = 0;
};

class IdentityTranslator final : public Translator {
public:
    Volume3 apply(const Volume3& vol) const override { return vol; }
};

// Pointwise v -> remap(v^gamma). The optional remap table is piecewise
// linear with strictly increasing x-breakpoints and nondecreasing values,
// so intensity ordering is preserved.
class GammaRemapTranslator final : public Translator {
public:
    explicit GammaRemapTranslator(double gamma,
                                  std::vector<std::pair<double, double>> table = {});

    Volume3 apply(const Volume3& vol) const override;
    double map_value(double v) const;

private:
    double gamma_;
    std::vector<std::pair<double, double>> table_;
};

// Returns a fixed volume regardless of input; used to plug a precomputed
// translated image into the registration engine.
class FixedVolumeTranslator final : public Translator {
public:
    explicit FixedVolumeTranslator(Volume3 vol) : vol_(std::move(vol)) {}
    Volume3 apply(const Volume3& input) const override;

private:
    Volume3 vol_;
};

// Wraps a base translator and adds smooth Gaussian blobs (sigma = radius/2),
// emulating anatomically implausible features introduced by translation.
class ArtifactInjector final : public Translator {
public:
    struct Blob {
        Vec3 center;     // voxel coordinates
        double radius;   // voxels, > 0
        double amplitude;
        int sign;        // +1 or -1
    };

    ArtifactInjector(std::shared_ptr<const Translator> base, std::vector<Blob> blobs,
                     std::uint64_t seed = 0);

    // Seeded random blob placement inside the given grid.
    static ArtifactInjector with_random_blobs(std::shared_ptr<const Translator> base,
                                              Dims dims, int count, double radius,
                                              double amplitude, std::uint64_t seed);

    Volume3 apply(const Volume3& vol) const override;
    const std::vector<Blob>& blobs() const { return blobs_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::shared_ptr<const Translator> base_;
    std::vector<Blob> blobs_;
    std::uint64_t seed_;
};

} // namespace dsreg
