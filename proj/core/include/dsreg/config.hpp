#pragma once

#include "dsreg/phantom.hpp"
#include "dsreg/registration.hpp"
#include "dsreg/translator.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>

namespace dsreg {

// Plain-text configuration: one `section.key = value` per line, `#`
// comments. Consumers must claim every key; leftover keys are hard errors.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    int get_int(const std::string& key, int fallback);
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);

    // Keys starting with `prefix` that have not been claimed yet.
    std::map<std::string, std::string> take_prefixed(const std::string& prefix);

    // Throws ConfigError naming the first unclaimed key.
    void reject_unknown() const;

private:
    std::string origin_;
    std::map<std::string, std::string> values_;
    std::set<std::string> claimed_;
};

// Section `registration.`
RegistrationConfig load_registration_config(ConfigFile& cfg);

// Section `phantom.`
PhantomSpec load_phantom_spec(ConfigFile& cfg);
std::string serialize_phantom_spec(const PhantomSpec& spec);

// Keys under `<section>.`: kind, gamma, table, blobs, blob_count,
// blob_radius, blob_amplitude, seed.
std::unique_ptr<Translator> load_translator(ConfigFile& cfg, const std::string& section,
                                            Dims dims);

} // namespace dsreg
