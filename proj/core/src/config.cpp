#include "dsreg/config.hpp"

#include "dsreg/errors.hpp"

#include <fstream>
#include <sstream>

namespace dsreg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + v + "' as a number");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return i;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + v + "' as an integer");
    }
}

} // namespace

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (cfg.values_.count(key))
            throw ConfigError(origin + ": duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

bool ConfigFile::has(const std::string& key) const { return values_.count(key) != 0; }

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) {
    claimed_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) {
    claimed_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
}

int ConfigFile::get_int(const std::string& key, int fallback) {
    claimed_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_int(key, it->second);
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) {
    claimed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + it->second + "' as an unsigned integer");
    }
}

std::map<std::string, std::string> ConfigFile::take_prefixed(const std::string& prefix) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : values_) {
        if (k.rfind(prefix, 0) == 0 && !claimed_.count(k)) {
            out[k] = v;
            claimed_.insert(k);
        }
    }
    return out;
}

void ConfigFile::reject_unknown() const {
    for (const auto& [k, v] : values_)
        if (!claimed_.count(k)) throw ConfigError(origin_ + ": unknown key '" + k + "'");
}

RegistrationConfig load_registration_config(ConfigFile& cfg) {
    RegistrationConfig rc;
    rc.lambda_smooth = cfg.get_double("registration.lambda_smooth", rc.lambda_smooth);
    rc.similarity =
        similarity_from_string(cfg.get_string("registration.similarity", to_string(rc.similarity)));
    rc.alpha_o = cfg.get_double("registration.alpha_o", rc.alpha_o);
    rc.alpha_s = cfg.get_double("registration.alpha_s", rc.alpha_s);
    rc.pyramid_levels = cfg.get_int("registration.pyramid_levels", rc.pyramid_levels);
    const std::string iters = cfg.get_string("registration.iterations", "");
    if (!iters.empty()) {
        rc.iterations.clear();
        for (const auto& part : split(iters, ','))
            rc.iterations.push_back(to_int("registration.iterations", part));
    }
    rc.optimizer.step_field = cfg.get_double("registration.step_field", rc.optimizer.step_field);
    rc.optimizer.step_kernel = cfg.get_double("registration.step_kernel", rc.optimizer.step_kernel);
    rc.optimizer.beta1 = cfg.get_double("registration.beta1", rc.optimizer.beta1);
    rc.optimizer.beta2 = cfg.get_double("registration.beta2", rc.optimizer.beta2);
    rc.optimizer.epsilon = cfg.get_double("registration.epsilon", rc.optimizer.epsilon);
    rc.ssim.window_radius = cfg.get_int("registration.ssim_radius", rc.ssim.window_radius);
    rc.mind.patch_radius = cfg.get_int("registration.mind_radius", rc.mind.patch_radius);
    rc.mind.patch_sigma = cfg.get_double("registration.mind_sigma", rc.mind.patch_sigma);
    rc.seed = cfg.get_u64("registration.seed", rc.seed);
    rc.validate();
    return rc;
}

PhantomSpec load_phantom_spec(ConfigFile& cfg) {
    PhantomSpec spec;
    const std::string dims = cfg.get_string("phantom.dims", "");
    if (!dims.empty()) {
        const auto parts = split(dims, ',');
        if (parts.size() != 3) throw ConfigError("phantom.dims: expected 'nx,ny,nz'");
        spec.dims = {to_int("phantom.dims", parts[0]), to_int("phantom.dims", parts[1]),
                     to_int("phantom.dims", parts[2])};
    }
    const std::string sp = cfg.get_string("phantom.spacing", "");
    if (!sp.empty()) {
        const auto parts = split(sp, ',');
        if (parts.size() != 3) throw ConfigError("phantom.spacing: expected 'sx,sy,sz'");
        spec.spacing = {to_double("phantom.spacing", parts[0]),
                        to_double("phantom.spacing", parts[1]),
                        to_double("phantom.spacing", parts[2])};
    }
    spec.noise_sigma_ct = cfg.get_double("phantom.noise_ct", spec.noise_sigma_ct);
    spec.noise_sigma_mr = cfg.get_double("phantom.noise_mr", spec.noise_sigma_mr);
    spec.deform_max = cfg.get_double("phantom.deform_max", spec.deform_max);
    spec.deform_sigma = cfg.get_double("phantom.deform_sigma", spec.deform_sigma);
    spec.seed = cfg.get_u64("phantom.seed", spec.seed);
    spec.landmarks_per_organ =
        cfg.get_int("phantom.landmarks_per_organ", spec.landmarks_per_organ);

    // phantom.organ.<name> = cx,cy,cz,ax,ay,az,ct_intensity,mr_intensity
    for (const auto& [key, value] : cfg.take_prefixed("phantom.organ.")) {
        const std::string name = key.substr(std::string("phantom.organ.").size());
        if (name.empty()) throw ConfigError(key + ": empty organ name");
        const auto parts = split(value, ',');
        if (parts.size() != 8)
            throw ConfigError(key + ": expected 8 comma-separated values");
        PhantomOrgan o;
        o.name = name;
        for (int c = 0; c < 3; ++c) o.center[std::size_t(c)] = to_double(key, parts[std::size_t(c)]);
        for (int c = 0; c < 3; ++c)
            o.semi_axes[std::size_t(c)] = to_double(key, parts[std::size_t(3 + c)]);
        o.ct_intensity = to_double(key, parts[6]);
        o.mr_intensity = to_double(key, parts[7]);
        spec.organs.push_back(std::move(o));
    }
    if (spec.organs.empty()) spec.organs = default_organs(spec.dims);
    spec.validate();
    return spec;
}

std::string serialize_phantom_spec(const PhantomSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    os << "phantom.dims = " << spec.dims.nx << "," << spec.dims.ny << "," << spec.dims.nz << "\n";
    os << "phantom.spacing = " << spec.spacing.sx << "," << spec.spacing.sy << ","
       << spec.spacing.sz << "\n";
    os << "phantom.noise_ct = " << spec.noise_sigma_ct << "\n";
    os << "phantom.noise_mr = " << spec.noise_sigma_mr << "\n";
    os << "phantom.deform_max = " << spec.deform_max << "\n";
    os << "phantom.deform_sigma = " << spec.deform_sigma << "\n";
    os << "phantom.seed = " << spec.seed << "\n";
    os << "phantom.landmarks_per_organ = " << spec.landmarks_per_organ << "\n";
    for (const auto& o : spec.organs) {
        os << "phantom.organ." << o.name << " = " << o.center[0] << "," << o.center[1] << ","
           << o.center[2] << "," << o.semi_axes[0] << "," << o.semi_axes[1] << ","
           << o.semi_axes[2] << "," << o.ct_intensity << "," << o.mr_intensity << "\n";
    }
    return os.str();
}

std::unique_ptr<Translator> load_translator(ConfigFile& cfg, const std::string& section,
                                            Dims dims) {
    const std::string kind = cfg.get_string(section + ".kind", "identity");
    const double gamma = cfg.get_double(section + ".gamma", 1.0);
    const std::string table_str = cfg.get_string(section + ".table", "");
    const std::string blobs_str = cfg.get_string(section + ".blobs", "");
    const int blob_count = cfg.get_int(section + ".blob_count", 0);
    const double blob_radius = cfg.get_double(section + ".blob_radius", 3.0);
    const double blob_amplitude = cfg.get_double(section + ".blob_amplitude", 0.3);
    const std::uint64_t seed = cfg.get_u64(section + ".seed", 0);

    std::vector<std::pair<double, double>> table;
    if (!table_str.empty()) {
        // x0:y0,x1:y1,...
        for (const auto& pair : split(table_str, ',')) {
            const auto colon = pair.find(':');
            if (colon == std::string::npos)
                throw ConfigError(section + ".table: expected 'x:y' pairs");
            table.emplace_back(to_double(section + ".table", trim(pair.substr(0, colon))),
                               to_double(section + ".table", trim(pair.substr(colon + 1))));
        }
    }

    std::shared_ptr<const Translator> base;
    if (kind == "identity") {
        base = std::make_shared<IdentityTranslator>();
    } else if (kind == "gamma") {
        base = std::make_shared<GammaRemapTranslator>(gamma, table);
    } else if (kind == "artifact") {
        base = std::make_shared<GammaRemapTranslator>(gamma, table);
    } else {
        throw ConfigError(section + ".kind: unknown translator kind '" + kind + "'");
    }

    if (kind != "artifact") {
        if (!blobs_str.empty() || blob_count != 0)
            throw ConfigError(section + ".blobs: only valid for kind = artifact");
        if (kind == "identity") return std::make_unique<IdentityTranslator>();
        return std::make_unique<GammaRemapTranslator>(gamma, table);
    }

    std::vector<ArtifactInjector::Blob> blobs;
    if (!blobs_str.empty()) {
        // cx:cy:cz:radius:amplitude:sign;...
        for (const auto& b : split(blobs_str, ';')) {
            const auto parts = split(b, ':');
            if (parts.size() != 6)
                throw ConfigError(section + ".blobs: expected 'cx:cy:cz:r:amp:sign' entries");
            ArtifactInjector::Blob blob;
            for (int c = 0; c < 3; ++c)
                blob.center[std::size_t(c)] = to_double(section + ".blobs", parts[std::size_t(c)]);
            blob.radius = to_double(section + ".blobs", parts[3]);
            blob.amplitude = to_double(section + ".blobs", parts[4]);
            blob.sign = to_int(section + ".blobs", parts[5]);
            blobs.push_back(blob);
        }
        return std::make_unique<ArtifactInjector>(std::move(base), std::move(blobs), seed);
    }
    return std::make_unique<ArtifactInjector>(ArtifactInjector::with_random_blobs(
        std::move(base), dims, blob_count, blob_radius, blob_amplitude, seed));
}

} // namespace dsreg
