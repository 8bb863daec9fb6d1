#include "psymort/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "json.hpp"
#include "psymort/errors.hpp"
#include "psymort/sha256.hpp"
#include "psymort/version.hpp"

namespace psymort {

RunManifest RunManifest::create(const std::string& command, std::uint64_t seed) {
    RunManifest manifest;
    manifest.command = command;
    manifest.seed = seed;
    manifest.artifact_version = kVersion;

    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", utc.tm_year + 1900,
                  utc.tm_mon + 1, utc.tm_mday, utc.tm_hour, utc.tm_min, utc.tm_sec);
    manifest.timestamp = buf;
    return manifest;
}

void RunManifest::add_input(const std::filesystem::path& file) {
    input_digests[file.filename().string()] = sha256_hex_file(file);
}

void RunManifest::write(const std::filesystem::path& out_dir) const {
    nlohmann::ordered_json doc;
    doc["artifact_version"] = artifact_version;
    doc["command"] = command;
    doc["timestamp"] = timestamp;
    doc["seed"] = seed;
    doc["options"] = options;
    doc["inputs"] = input_digests;
    const std::filesystem::path path = out_dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

}  // namespace psymort
