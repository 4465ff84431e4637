#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsolve/serialization.hpp"

namespace rsolve {

inline constexpr std::string_view kLibraryVersion = "0.1.0";

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Little-endian IEEE-754 binary64 packing, independent of host byte order.
std::string encode_f64_base64(std::span<const double> values);
std::vector<double> decode_f64_base64(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically via a temporary sibling; throws Error when unwritable.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// One JSON object per line; blank lines are skipped.
std::vector<ProblemInstance> read_instances(const std::filesystem::path& path);
std::string instances_to_jsonl(std::span<const ProblemInstance> instances);
/// CSV with columns index,family,n,weight,payload (payload = instance JSON).
std::string instances_to_csv(std::span<const ProblemInstance> instances);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);
std::string csv_escape(std::string_view field);

/// Provenance record written next to every artifact.
struct RunManifest {
    std::string command;
    Json config;
    std::uint64_t seed = 0;
    std::string version = std::string(kLibraryVersion);
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_clock_seconds = 0.0;
    std::string started_at;
};

Json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const Json& j);
std::filesystem::path manifest_path_for(const std::filesystem::path& artifact);
std::string utc_timestamp();

}  // namespace rsolve
