#include "dsreg/meta_image.hpp"

#include "dsreg/errors.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace dsreg {

namespace {

struct RawImage {
    MetaImageHeader header;
    std::vector<double> data; // converted to float64, interleaved channels
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

RawImage read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");

    MetaImageHeader h;
    bool have_dims = false, have_type = false;
    std::string line;
    bool local = false;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError(path + ": malformed header line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "ObjectType" || key == "CompressedData" || key == "BinaryData" ||
            key == "TransformMatrix" || key == "Offset" || key == "CenterOfRotation" ||
            key == "AnatomicalOrientation") {
            if (key == "CompressedData" && value != "False")
                throw IoError(path + ": CompressedData not supported");
            continue;
        }
        if (key == "NDims") {
            if (value != "3") throw IoError(path + ": NDims must be 3");
        } else if (key == "DimSize") {
            std::istringstream ss(value);
            if (!(ss >> h.dims.nx >> h.dims.ny >> h.dims.nz) || h.dims.nx <= 0 ||
                h.dims.ny <= 0 || h.dims.nz <= 0)
                throw IoError(path + ": DimSize must be three positive integers");
            have_dims = true;
        } else if (key == "ElementSpacing") {
            std::istringstream ss(value);
            if (!(ss >> h.spacing.sx >> h.spacing.sy >> h.spacing.sz) || h.spacing.sx <= 0 ||
                h.spacing.sy <= 0 || h.spacing.sz <= 0)
                throw IoError(path + ": ElementSpacing must be three positive reals");
        } else if (key == "ElementNumberOfChannels") {
            std::istringstream ss(value);
            if (!(ss >> h.channels) || (h.channels != 1 && h.channels != 3 && h.channels != 6))
                throw IoError(path + ": ElementNumberOfChannels must be 1, 3 or 6");
        } else if (key == "ElementByteOrderMSB" || key == "BinaryDataByteOrderMSB") {
            if (value != "False") throw IoError(path + ": " + key + " must be False");
        } else if (key == "ElementType") {
            if (value == "MET_DOUBLE") h.type = ElementType::f64;
            else if (value == "MET_FLOAT") h.type = ElementType::f32;
            else if (value == "MET_UCHAR") h.type = ElementType::u8;
            else throw IoError(path + ": unsupported ElementType '" + value + "'");
            have_type = true;
        } else if (key == "ElementDataFile") {
            if (value != "LOCAL") throw IoError(path + ": ElementDataFile must be LOCAL");
            local = true;
            break;
        } else {
            throw IoError(path + ": unknown header key '" + key + "'");
        }
    }
    if (!local) throw IoError(path + ": missing ElementDataFile");
    if (!have_dims) throw IoError(path + ": missing DimSize");
    if (!have_type) throw IoError(path + ": missing ElementType");

    const std::size_t count = h.dims.voxels() * std::size_t(h.channels);
    std::size_t elem_size = h.type == ElementType::f64 ? 8 : h.type == ElementType::f32 ? 4 : 1;
    std::vector<char> raw(count * elem_size);
    in.read(raw.data(), std::streamsize(raw.size()));
    if (std::size_t(in.gcount()) != raw.size())
        throw IoError(path + ": payload shorter than DimSize declares");
    char extra;
    if (in.read(&extra, 1))
        throw IoError(path + ": payload longer than DimSize declares");

    RawImage img;
    img.header = h;
    img.data.resize(count);
    if (h.type == ElementType::f64) {
        std::memcpy(img.data.data(), raw.data(), raw.size());
    } else if (h.type == ElementType::f32) {
        const float* p = reinterpret_cast<const float*>(raw.data());
        for (std::size_t i = 0; i < count; ++i) img.data[i] = double(p[i]);
    } else {
        const unsigned char* p = reinterpret_cast<const unsigned char*>(raw.data());
        for (std::size_t i = 0; i < count; ++i) img.data[i] = double(p[i]);
    }
    return img;
}

void write_raw(const std::string& path, const MetaImageHeader& h, const void* payload,
               std::size_t bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << "ObjectType = Image\n";
    out << "NDims = 3\n";
    out << "BinaryData = True\n";
    out << "BinaryDataByteOrderMSB = False\n";
    out << "DimSize = " << h.dims.nx << " " << h.dims.ny << " " << h.dims.nz << "\n";
    out.precision(17);
    out << "ElementSpacing = " << h.spacing.sx << " " << h.spacing.sy << " " << h.spacing.sz
        << "\n";
    if (h.channels != 1) out << "ElementNumberOfChannels = " << h.channels << "\n";
    out << "ElementType = "
        << (h.type == ElementType::f64 ? "MET_DOUBLE"
                                       : h.type == ElementType::f32 ? "MET_FLOAT" : "MET_UCHAR")
        << "\n";
    out << "ElementDataFile = LOCAL\n";
    out.write(static_cast<const char*>(payload), std::streamsize(bytes));
    if (!out) throw IoError(path + ": write failed");
}

} // namespace

MetaImageHeader read_meta_header(const std::string& path) { return read_raw(path).header; }

Volume3 read_volume(const std::string& path) {
    RawImage img = read_raw(path);
    if (img.header.channels != 1)
        throw IoError(path + ": expected 1 channel for a scalar volume, got " +
                      std::to_string(img.header.channels));
    return Volume3(img.header.dims, img.header.spacing, std::move(img.data));
}

DisplacementField read_field(const std::string& path) {
    RawImage img = read_raw(path);
    if (img.header.channels != 3)
        throw IoError(path + ": expected 3 channels for a displacement field, got " +
                      std::to_string(img.header.channels));
    return DisplacementField(img.header.dims, img.header.spacing, std::move(img.data));
}

BinaryMask read_mask(const std::string& path) {
    RawImage img = read_raw(path);
    if (img.header.channels != 1)
        throw IoError(path + ": expected 1 channel for a mask, got " +
                      std::to_string(img.header.channels));
    std::vector<std::uint8_t> bits(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) bits[i] = img.data[i] != 0.0 ? 1 : 0;
    return BinaryMask(img.header.dims, img.header.spacing, std::move(bits));
}

MindVolume read_mind(const std::string& path) {
    RawImage img = read_raw(path);
    if (img.header.channels != 6)
        throw IoError(path + ": expected 6 channels for a descriptor volume, got " +
                      std::to_string(img.header.channels));
    MindVolume mv(img.header.dims, img.header.spacing);
    mv.data = std::move(img.data);
    return mv;
}

void write_volume(const std::string& path, const Volume3& vol) {
    MetaImageHeader h{vol.dims, vol.spacing, 1, ElementType::f64};
    write_raw(path, h, vol.data.data(), vol.data.size() * sizeof(double));
}

void write_field(const std::string& path, const DisplacementField& field) {
    MetaImageHeader h{field.dims, field.spacing, 3, ElementType::f64};
    write_raw(path, h, field.data.data(), field.data.size() * sizeof(double));
}

void write_mask(const std::string& path, const BinaryMask& mask) {
    MetaImageHeader h{mask.dims, mask.spacing, 1, ElementType::u8};
    write_raw(path, h, mask.data.data(), mask.data.size());
}

void write_mind(const std::string& path, const MindVolume& mv) {
    MetaImageHeader h{mv.dims, mv.spacing, 6, ElementType::f64};
    write_raw(path, h, mv.data.data(), mv.data.size() * sizeof(double));
}

LandmarkSet read_landmarks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || trim(line) != "label,x,y,z")
        throw IoError(path + ": missing 'label,x,y,z' header line");
    LandmarkSet lm;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream ss(line);
        Landmark p;
        std::string field;
        if (!std::getline(ss, p.label, ',')) throw IoError(path + ": bad landmark line '" + line + "'");
        for (int c = 0; c < 3; ++c) {
            if (!std::getline(ss, field, ','))
                throw IoError(path + ": bad landmark line '" + line + "'");
            try {
                p.point_mm[std::size_t(c)] = std::stod(field);
            } catch (const std::exception&) {
                throw IoError(path + ": bad coordinate '" + field + "'");
            }
        }
        lm.points.push_back(std::move(p));
    }
    return lm;
}

void write_landmarks(const std::string& path, const LandmarkSet& lm) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.precision(17);
    out << "label,x,y,z\n";
    for (const auto& p : lm.points)
        out << p.label << "," << p.point_mm[0] << "," << p.point_mm[1] << "," << p.point_mm[2]
            << "\n";
}

FusionKernel read_fusion_kernel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open");
    FusionKernel k;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string first;
        ss >> first;
        if (first == "bias") {
            int cout;
            double value;
            if (!(ss >> cout >> value) || cout < 0 || cout >= FusionKernel::kOut)
                throw IoError(path + ": bad bias line '" + line + "'");
            k.biases[std::size_t(cout)] = value;
        } else {
            int dz, dy, dx, cin, cout;
            double value;
            std::istringstream ss2(line);
            if (!(ss2 >> dz >> dy >> dx >> cin >> cout >> value) || dz < -1 || dz > 1 ||
                dy < -1 || dy > 1 || dx < -1 || dx > 1 || cin < 0 || cin >= FusionKernel::kIn ||
                cout < 0 || cout >= FusionKernel::kOut)
                throw IoError(path + ": bad kernel line '" + line + "'");
            k.w(FusionKernel::tap(dx, dy, dz), cin, cout) = value;
        }
    }
    return k;
}

void write_fusion_kernel(const std::string& path, const FusionKernel& k) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.precision(17);
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
                for (int cin = 0; cin < FusionKernel::kIn; ++cin)
                    for (int cout = 0; cout < FusionKernel::kOut; ++cout)
                        out << dz << " " << dy << " " << dx << " " << cin << " " << cout << " "
                            << k.w(FusionKernel::tap(dx, dy, dz), cin, cout) << "\n";
    for (int cout = 0; cout < FusionKernel::kOut; ++cout)
        out << "bias " << cout << " " << k.biases[std::size_t(cout)] << "\n";
}

} // namespace dsreg
