#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace errmax::cli {

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string hash_file(const std::filesystem::path& path);
std::string hash_config(const nlohmann::json& canonical);

/// Record of one stage run, stored as <stage dir>/manifest.json:
///
///   { "stage": ..., "status": "complete" | "incomplete", "config_hash": ...,
///     "inputs":  { role: { "path": ..., "hash": ... } },
///     "outputs": { file name: hash } }
///
/// Paths are stored as given; hashes cover file contents only. Thread count
/// and wall-clock time are deliberately absent so reruns compare equal.
struct Manifest {
    std::string stage;
    std::string status = "incomplete";
    std::string config_hash;
    std::map<std::string, std::pair<std::string, std::string>> inputs;  // role -> (path, hash)
    std::map<std::string, std::string> outputs;                          // file name -> hash
};

nlohmann::json to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const std::filesystem::path& dir, const Manifest& m);

/// Checks that `path` exists and, when the directory that holds it carries a
/// complete manifest listing the file, that its content hash still matches.
/// Returns the hash. Throws ManifestValidation otherwise.
std::string validate_input(const std::filesystem::path& path);

/// Hashes every file named in `m.outputs` (relative to `dir`), marks the
/// manifest complete and writes it.
void finalize_manifest(const std::filesystem::path& dir, Manifest& m);

}  // namespace errmax::cli
