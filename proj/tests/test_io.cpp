#include "dsreg/config.hpp"
#include "dsreg/errors.hpp"
#include "dsreg/meta_image.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

using namespace dsreg;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    const fs::path dir = fs::temp_directory_path() / "dsreg_io_tests";
    fs::create_directories(dir);
    return dir;
}

std::string tmp_file(const std::string& name) { return (tmp_dir() / name).string(); }

} // namespace

TEST_CASE("volume round-trip is bit-identical") {
    Volume3 v = oracle::random_volume({8, 8, 8}, 131);
    v.spacing = {0.75, 1.25, 2.0};
    const std::string path = tmp_file("vol.mha");
    write_volume(path, v);
    const Volume3 r = read_volume(path);
    CHECK(r.dims == v.dims);
    CHECK(r.spacing == v.spacing);
    CHECK(r.data == v.data);
}

TEST_CASE("field and mask and descriptor round-trips preserve everything") {
    DisplacementField f = oracle::random_field({5, 6, 4}, 132);
    const std::string fpath = tmp_file("field.mha");
    write_field(fpath, f);
    const DisplacementField rf = read_field(fpath);
    CHECK(rf.dims == f.dims);
    CHECK(rf.data == f.data);
    CHECK(read_meta_header(fpath).channels == 3);

    BinaryMask m({4, 4, 4}, {1, 1, 1});
    for (std::size_t i = 0; i < m.data.size(); i += 3) m.data[i] = 1;
    const std::string mpath = tmp_file("mask.mha");
    write_mask(mpath, m);
    CHECK(read_mask(mpath).data == m.data);

    const MindVolume mv = mind(oracle::random_volume({5, 5, 5}, 133));
    const std::string dpath = tmp_file("desc.mha");
    write_mind(dpath, mv);
    const MindVolume rmv = read_mind(dpath);
    CHECK(rmv.dims == mv.dims);
    CHECK(rmv.data == mv.data);
}

TEST_CASE("reading a volume as the wrong kind is rejected") {
    const std::string path = tmp_file("scalar.mha");
    write_volume(path, oracle::random_volume({4, 4, 4}, 134));
    CHECK_THROWS_AS(read_field(path), IoError);
    const std::string fpath = tmp_file("vec.mha");
    write_field(fpath, oracle::random_field({4, 4, 4}, 135));
    CHECK_THROWS_AS(read_volume(fpath), IoError);
}

TEST_CASE("a hand-written minimal header decodes bytes in x-fastest order") {
    const std::string path = tmp_file("hand.mha");
    {
        std::ofstream out(path, std::ios::binary);
        out << "NDims = 3\n";
        out << "DimSize = 2 2 2\n";
        out << "ElementType = MET_DOUBLE\n";
        out << "ElementDataFile = LOCAL\n";
        const double values[8] = {0, 1, 2, 3, 4, 5, 6, 7};
        out.write(reinterpret_cast<const char*>(values), sizeof(values));
    }
    const Volume3 v = read_volume(path);
    REQUIRE(v.dims == Dims{2, 2, 2});
    CHECK(v(1, 0, 0) == 1.0);
    CHECK(v(0, 1, 0) == 2.0);
    CHECK(v(0, 0, 1) == 4.0);
    CHECK(v(1, 1, 1) == 7.0);
    // spacing falls back to unit when absent
    CHECK(v.spacing == Spacing{1, 1, 1});
}

TEST_CASE("float32 payloads are widened to float64") {
    const std::string path = tmp_file("f32.mha");
    {
        std::ofstream out(path, std::ios::binary);
        out << "NDims = 3\nDimSize = 2 2 2\nElementType = MET_FLOAT\nElementDataFile = LOCAL\n";
        const float values[8] = {0.5f, 1.5f, 2, 3, 4, 5, 6, 7};
        out.write(reinterpret_cast<const char*>(values), sizeof(values));
    }
    const Volume3 v = read_volume(path);
    CHECK(v(0, 0, 0) == 0.5);
    CHECK(v(1, 0, 0) == 1.5);
}

TEST_CASE("malformed headers are rejected with the offending key named") {
    auto write_header = [&](const std::string& name, const std::string& text) {
        const std::string path = tmp_file(name);
        std::ofstream out(path, std::ios::binary);
        out << text;
        return path;
    };

    const std::string four = write_header(
        "four.mha",
        "NDims = 3\nDimSize = 2 2 2\nElementNumberOfChannels = 4\n"
        "ElementType = MET_DOUBLE\nElementDataFile = LOCAL\n");
    CHECK_THROWS_WITH_AS(read_volume(four), doctest::Contains("ElementNumberOfChannels"),
                         IoError);

    const std::string msb = write_header(
        "msb.mha", "NDims = 3\nDimSize = 2 2 2\nElementByteOrderMSB = True\n"
                   "ElementType = MET_DOUBLE\nElementDataFile = LOCAL\n");
    CHECK_THROWS_WITH_AS(read_volume(msb), doctest::Contains("ElementByteOrderMSB"), IoError);

    const std::string ext = write_header(
        "ext.mha", "NDims = 3\nDimSize = 2 2 2\nElementType = MET_DOUBLE\n"
                   "ElementDataFile = data.raw\n");
    CHECK_THROWS_WITH_AS(read_volume(ext), doctest::Contains("LOCAL"), IoError);

    const std::string unknown = write_header(
        "unknown.mha", "NDims = 3\nFancyKey = 1\nDimSize = 2 2 2\n"
                       "ElementType = MET_DOUBLE\nElementDataFile = LOCAL\n");
    CHECK_THROWS_WITH_AS(read_volume(unknown), doctest::Contains("FancyKey"), IoError);

    const std::string ndims = write_header(
        "ndims.mha", "NDims = 2\nDimSize = 2 2 2\nElementType = MET_DOUBLE\n"
                     "ElementDataFile = LOCAL\n");
    CHECK_THROWS_AS(read_volume(ndims), IoError);
}

TEST_CASE("payload size must match the declared dims exactly") {
    auto write_with_payload = [&](const std::string& name, std::size_t count) {
        const std::string path = tmp_file(name);
        std::ofstream out(path, std::ios::binary);
        out << "NDims = 3\nDimSize = 2 2 2\nElementType = MET_DOUBLE\nElementDataFile = LOCAL\n";
        const std::vector<double> values(count, 1.0);
        out.write(reinterpret_cast<const char*>(values.data()),
                  std::streamsize(count * sizeof(double)));
        return path;
    };
    CHECK_THROWS_WITH_AS(read_volume(write_with_payload("short.mha", 7)),
                         doctest::Contains("shorter"), IoError);
    CHECK_THROWS_WITH_AS(read_volume(write_with_payload("long.mha", 9)),
                         doctest::Contains("longer"), IoError);
    CHECK_NOTHROW(read_volume(write_with_payload("exact.mha", 8)));
}

TEST_CASE("missing files raise io errors") {
    CHECK_THROWS_AS(read_volume(tmp_file("does_not_exist.mha")), IoError);
    CHECK_THROWS_AS(read_landmarks(tmp_file("does_not_exist.csv")), IoError);
}

TEST_CASE("landmark csv round-trip preserves labels and coordinates") {
    LandmarkSet lm;
    lm.points = {{"liver_centroid", {21.25, 26.5, 27.75}}, {"kidney_p0", {40.0, 36.5, 30.0}}};
    const std::string path = tmp_file("lm.csv");
    write_landmarks(path, lm);
    const LandmarkSet r = read_landmarks(path);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points[0].label == "liver_centroid");
    CHECK(r.points[0].point_mm == lm.points[0].point_mm);
    CHECK(r.points[1].point_mm == lm.points[1].point_mm);

    const std::string bad = tmp_file("bad.csv");
    std::ofstream(bad) << "x,y,z\n1,2,3\n";
    CHECK_THROWS_WITH_AS(read_landmarks(bad), doctest::Contains("label,x,y,z"), IoError);
}

TEST_CASE("fusion kernel round-trip preserves all taps and biases") {
    FusionKernel k;
    std::mt19937_64 rng(136);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (auto& w : k.weights) w = d(rng);
    for (auto& b : k.biases) b = d(rng);
    const std::string path = tmp_file("kernel.txt");
    write_fusion_kernel(path, k);
    const FusionKernel r = read_fusion_kernel(path);
    for (int t = 0; t < FusionKernel::kTaps; ++t)
        for (int ci = 0; ci < FusionKernel::kIn; ++ci)
            for (int co = 0; co < FusionKernel::kOut; ++co)
                CHECK(r.w(t, ci, co) == doctest::Approx(k.w(t, ci, co)).epsilon(1e-15));
    CHECK(r.biases[0] == doctest::Approx(k.biases[0]).epsilon(1e-15));
}

TEST_CASE("config parsing handles comments, sections and duplicate keys") {
    ConfigFile cfg = ConfigFile::parse_string(
        "# header comment\n"
        "registration.lambda_smooth = 2.5  # trailing comment\n"
        "registration.similarity = mse\n"
        "\n"
        "phantom.seed = 42\n");
    CHECK(cfg.get_double("registration.lambda_smooth", 1.0) == 2.5);
    CHECK(cfg.get_string("registration.similarity", "ssim") == "mse");
    CHECK(cfg.get_u64("phantom.seed", 0) == 42);
    CHECK_NOTHROW(cfg.reject_unknown());

    CHECK_THROWS_AS(ConfigFile::parse_string("a.b = 1\na.b = 2\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("just a line without equals\n"), ConfigError);
}

TEST_CASE("unclaimed keys are rejected and named") {
    ConfigFile cfg = ConfigFile::parse_string("registration.lambda_smooth = 1\nmystery.key = 2\n");
    (void)cfg.get_double("registration.lambda_smooth", 1.0);
    CHECK_THROWS_WITH_AS(cfg.reject_unknown(), doctest::Contains("mystery.key"), ConfigError);
}

TEST_CASE("type errors name the key and the bad value") {
    ConfigFile cfg = ConfigFile::parse_string("registration.alpha_o = banana\n");
    CHECK_THROWS_WITH_AS(cfg.get_double("registration.alpha_o", 0.5),
                         doctest::Contains("banana"), ConfigError);
}

TEST_CASE("registration config loads every documented key") {
    ConfigFile cfg = ConfigFile::parse_string(
        "registration.lambda_smooth = 0.5\n"
        "registration.similarity = mind\n"
        "registration.alpha_o = 0.25\n"
        "registration.alpha_s = 0.75\n"
        "registration.pyramid_levels = 2\n"
        "registration.iterations = 40, 20\n"
        "registration.step_field = 0.05\n"
        "registration.seed = 9\n");
    const RegistrationConfig rc = load_registration_config(cfg);
    cfg.reject_unknown();
    CHECK(rc.lambda_smooth == 0.5);
    CHECK(rc.similarity == Similarity::mind);
    CHECK(rc.alpha_o == 0.25);
    CHECK(rc.alpha_s == 0.75);
    CHECK(rc.pyramid_levels == 2);
    REQUIRE(rc.iterations.size() == 2);
    CHECK(rc.iterations[0] == 40);
    CHECK(rc.iterations[1] == 20);
    CHECK(rc.optimizer.step_field == 0.05);
    CHECK(rc.seed == 9);
}

TEST_CASE("phantom spec serialization round-trips through the parser") {
    PhantomSpec spec;
    spec.dims = {32, 48, 40};
    spec.seed = 77;
    spec.deform_max = 2.5;
    spec.organs = default_organs(spec.dims);
    const std::string text = serialize_phantom_spec(spec);
    ConfigFile cfg = ConfigFile::parse_string(text);
    const PhantomSpec r = load_phantom_spec(cfg);
    cfg.reject_unknown();
    CHECK(r.dims == spec.dims);
    CHECK(r.seed == 77);
    CHECK(r.deform_max == 2.5);
    REQUIRE(r.organs.size() == spec.organs.size());
    // Organ keys come back in map order; compare as sets by name.
    for (const auto& o : spec.organs) {
        bool found = false;
        for (const auto& ro : r.organs)
            if (ro.name == o.name) {
                found = true;
                CHECK(ro.center == o.center);
                CHECK(ro.semi_axes == o.semi_axes);
                CHECK(ro.ct_intensity == o.ct_intensity);
                CHECK(ro.mr_intensity == o.mr_intensity);
            }
        CHECK(found);
    }
}

TEST_CASE("translator loading covers identity, gamma and artifact kinds") {
    {
        ConfigFile cfg = ConfigFile::parse_string("");
        auto t = load_translator(cfg, "translator", {16, 16, 16});
        cfg.reject_unknown();
        CHECK(dynamic_cast<IdentityTranslator*>(t.get()) != nullptr);
    }
    {
        ConfigFile cfg = ConfigFile::parse_string(
            "translator.kind = gamma\ntranslator.gamma = 2\ntranslator.table = 0:0,1:1\n");
        auto t = load_translator(cfg, "translator", {16, 16, 16});
        cfg.reject_unknown();
        Volume3 half({4, 4, 4}, {1, 1, 1}, 0.5);
        CHECK(t->apply(half).data[0] == doctest::Approx(0.25));
    }
    {
        ConfigFile cfg = ConfigFile::parse_string(
            "translator.kind = artifact\n"
            "translator.blobs = 8:8:8:2:0.4:1\n");
        auto t = load_translator(cfg, "translator", {16, 16, 16});
        cfg.reject_unknown();
        Volume3 zero({16, 16, 16}, {1, 1, 1});
        CHECK(t->apply(zero)(8, 8, 8) == doctest::Approx(0.4));
    }
    {
        ConfigFile cfg = ConfigFile::parse_string(
            "translator.kind = artifact\n"
            "translator.blob_count = 3\ntranslator.seed = 5\n");
        auto t = load_translator(cfg, "translator", {16, 16, 16});
        cfg.reject_unknown();
        auto* inj = dynamic_cast<ArtifactInjector*>(t.get());
        REQUIRE(inj != nullptr);
        CHECK(inj->blobs().size() == 3);
    }
    {
        ConfigFile cfg =
            ConfigFile::parse_string("translator.kind = gamma\ntranslator.blob_count = 2\n");
        CHECK_THROWS_AS(load_translator(cfg, "translator", {16, 16, 16}), ConfigError);
    }
    {
        ConfigFile cfg = ConfigFile::parse_string("translator.kind = wavelet\n");
        CHECK_THROWS_AS(load_translator(cfg, "translator", {16, 16, 16}), ConfigError);
    }
}
