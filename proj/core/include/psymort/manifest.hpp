#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace psymort {

/// Provenance record written next to every command's outputs: what ran, with
/// which options and seed, over which input bytes.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> options;   // resolved flag/config values
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_digests;  // file name -> sha256
    std::string artifact_version;
    std::string timestamp;  // ISO 8601 UTC, excluded from determinism checks

    static RunManifest create(const std::string& command, std::uint64_t seed);

    void add_input(const std::filesystem::path& file);

    /// Writes manifest.json into the directory (one manifest per run).
    void write(const std::filesystem::path& out_dir) const;
};

}  // namespace psymort
