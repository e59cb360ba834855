#include "errmax/cli/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

#include "errmax/error.hpp"

namespace errmax::cli {

namespace fs = std::filesystem;

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string hash_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::ManifestValidation, "missing artifact " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a_hex(bytes);
}

std::string hash_config(const nlohmann::json& canonical) { return fnv1a_hex(canonical.dump()); }

nlohmann::json to_json(const Manifest& m) {
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [role, ph] : m.inputs) inputs[role] = {{"path", ph.first}, {"hash", ph.second}};
    return {{"stage", m.stage},
            {"status", m.status},
            {"config_hash", m.config_hash},
            {"inputs", inputs},
            {"outputs", m.outputs}};
}

Manifest manifest_from_json(const nlohmann::json& j) {
    Manifest m;
    try {
        j.at("stage").get_to(m.stage);
        j.at("status").get_to(m.status);
        j.at("config_hash").get_to(m.config_hash);
        for (const auto& [role, v] : j.at("inputs").items()) {
            m.inputs[role] = {v.at("path").get<std::string>(), v.at("hash").get<std::string>()};
        }
        j.at("outputs").get_to(m.outputs);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ManifestValidation, std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void write_manifest(const fs::path& dir, const Manifest& m) {
    fs::create_directories(dir);
    const fs::path path = dir / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << to_json(m).dump(2) << '\n';
}

std::string validate_input(const fs::path& path) {
    if (!fs::is_regular_file(path)) fail(ErrorKind::ManifestValidation, "missing artifact " + path.string());
    const std::string hash = hash_file(path);

    const fs::path manifest_path = path.parent_path() / "manifest.json";
    if (!fs::is_regular_file(manifest_path)) return hash;
    nlohmann::json j;
    try {
        std::ifstream in(manifest_path);
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::ManifestValidation, "corrupt manifest " + manifest_path.string() + ": " + e.what());
    }
    const Manifest m = manifest_from_json(j);
    const auto it = m.outputs.find(path.filename().string());
    if (it == m.outputs.end()) return hash;
    require(m.status == "complete", ErrorKind::ManifestValidation,
            path.string() + " comes from an incomplete " + m.stage + " stage");
    require(it->second == hash, ErrorKind::ManifestValidation,
            path.string() + " does not match the hash recorded by its " + m.stage + " manifest");
    return hash;
}

void finalize_manifest(const fs::path& dir, Manifest& m) {
    for (auto& [name, hash] : m.outputs) hash = hash_file(dir / name);
    m.status = "complete";
    write_manifest(dir, m);
}

}  // namespace errmax::cli
