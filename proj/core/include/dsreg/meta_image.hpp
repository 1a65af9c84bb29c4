#pragma once

#include "dsreg/metrics.hpp"
#include "dsreg/mind.hpp"
#include "dsreg/registration.hpp"
#include "dsreg/volume.hpp"

#include <string>

namespace dsreg {

// MetaImage-compatible subset: NDims 3, little-endian, raw payload after
// the header (ElementDataFile = LOCAL). Element types MET_DOUBLE, MET_FLOAT
// and MET_UCHAR; 1, 3 or 6 interleaved channels.
enum class ElementType { f64, f32, u8 };

struct MetaImageHeader {
    Dims dims;
    Spacing spacing{1.0, 1.0, 1.0};
    int channels = 1;
    ElementType type = ElementType::f64;
};

MetaImageHeader read_meta_header(const std::string& path);

Volume3 read_volume(const std::string& path);
DisplacementField read_field(const std::string& path);
BinaryMask read_mask(const std::string& path);
MindVolume read_mind(const std::string& path);

void write_volume(const std::string& path, const Volume3& vol);
void write_field(const std::string& path, const DisplacementField& field);
void write_mask(const std::string& path, const BinaryMask& mask);
void write_mind(const std::string& path, const MindVolume& mv);

LandmarkSet read_landmarks(const std::string& path);
void write_landmarks(const std::string& path, const LandmarkSet& lm);

FusionKernel read_fusion_kernel(const std::string& path);
void write_fusion_kernel(const std::string& path, const FusionKernel& k);

} // namespace dsreg
