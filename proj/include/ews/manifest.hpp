// Run manifests: every CLI output file is accompanied by a manifest naming
// the command, the fully resolved configuration, the seeds, the wall-clock
// runtime and a SHA-256 digest of each output, so reruns can be checked
// bit-for-bit. Wall clock lives only here — outputs themselves stay
// deterministic.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ews::manifest {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);

struct OutputFile {
  std::string path;
  std::string sha256;
};

// config_json: an already-serialized JSON value ("null" when the command has
// no config). seeds: every RNG seed the run consumed (empty when none).
std::string run_manifest_json(const std::string& command, const std::string& config_json,
                              const std::vector<std::uint64_t>& seeds, double wall_clock_seconds,
                              const std::vector<OutputFile>& outputs);

// Whole-file helpers used by the CLI; both throw ews::error on I/O failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string json_escape(const std::string& s);

}  // namespace ews::manifest
