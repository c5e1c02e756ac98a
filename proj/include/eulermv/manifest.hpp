#pragma once

// Run manifest: resolved config echo (as a separate re-runnable file), code
// version, wall clock, per-check pass/fail lines and a checksummed inventory
// of every output file. Written atomically (temp file + rename).

#include <filesystem>
#include <string>
#include <vector>

namespace eulermv {

inline constexpr const char* kVersion = "0.1.0";

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunManifest {
    std::string kind;
    double wall_clock_seconds = 0.0;
    int exit_code = 0;
    std::vector<CheckResult> checks;
    std::vector<std::filesystem::path> files; // paths inside the output directory
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& out_dir, const RunManifest& m);

} // namespace eulermv
