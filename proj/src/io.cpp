#include "rsolve/io.hpp"

#include <bit>
#include <charconv>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rsolve {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char ch)
{
    if (ch >= 'A' && ch <= 'Z') return ch - 'A';
    if (ch >= 'a' && ch <= 'z') return ch - 'a' + 26;
    if (ch >= '0' && ch <= '9') return ch - '0' + 52;
    if (ch == '+') return 62;
    if (ch == '/') return 63;
    return -1;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes)
{
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = bytes[i] << 16;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text)
{
    if (text.size() % 4 != 0) throw std::invalid_argument("base64: length must be a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int v[4];
        int padding = 0;
        for (int t = 0; t < 4; ++t) {
            const char ch = text[i + t];
            if (ch == '=' && i + 4 == text.size() && t >= 2) {
                v[t] = 0;
                ++padding;
            } else {
                if (padding > 0) throw std::invalid_argument("base64: data after padding");
                v[t] = decode_char(ch);
                if (v[t] < 0) throw std::invalid_argument("base64: invalid character");
            }
        }
        const std::uint32_t word = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
        out.push_back(static_cast<std::uint8_t>(word >> 16));
        if (padding < 2) out.push_back(static_cast<std::uint8_t>(word >> 8));
        if (padding < 1) out.push_back(static_cast<std::uint8_t>(word));
    }
    return out;
}

std::string encode_f64_base64(std::span<const double> values)
{
    std::vector<std::uint8_t> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    return base64_encode(bytes);
}

std::vector<double> decode_f64_base64(std::string_view text)
{
    const auto bytes = base64_decode(text);
    if (bytes.size() % 8 != 0) throw std::invalid_argument("f64 payload: byte count not a multiple of 8");
    std::vector<double> values(bytes.size() / 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
        values[i] = std::bit_cast<double>(bits);
    }
    return values;
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    const auto temp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw Error("failed writing " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec) throw Error("cannot write " + path.string() + ": " + ec.message());
}

std::vector<ProblemInstance> read_instances(const std::filesystem::path& path)
{
    const std::string text = read_text_file(path);
    std::vector<ProblemInstance> out;
    std::istringstream lines(text);
    std::string line;
    int number = 0;
    while (std::getline(lines, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(instance_from_json(Json::parse(line)));
        } catch (const std::exception& e) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

std::string instances_to_jsonl(std::span<const ProblemInstance> instances)
{
    std::string out;
    for (const auto& instance : instances) {
        out += to_json(instance).dump();
        out += '\n';
    }
    return out;
}

std::string csv_escape(std::string_view field)
{
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string instances_to_csv(std::span<const ProblemInstance> instances)
{
    std::string out = "index,family,n,weight,payload\n";
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& instance = instances[i];
        out += std::to_string(i) + ',' + std::string(family_name(instance.family())) + ',' +
               std::to_string(instance.dimension()) + ',' + format_double(instance.weight()) + ',' +
               csv_escape(to_json(instance).dump()) + '\n';
    }
    return out;
}

std::string format_double(double value)
{
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

Json to_json(const RunManifest& m)
{
    return Json{
        {"command", m.command},
        {"config", m.config},
        {"seed", m.seed},
        {"version", m.version},
        {"inputs", m.inputs},
        {"outputs", m.outputs},
        {"wall_clock_seconds", m.wall_clock_seconds},
        {"started_at", m.started_at},
    };
}

RunManifest manifest_from_json(const Json& j)
{
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    m.started_at = j.at("started_at").get<std::string>();
    return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& artifact)
{
    return std::filesystem::path(artifact.string() + ".manifest.json");
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm parts{};
    gmtime_r(&now, &parts);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &parts);
    return buffer;
}

}  // namespace rsolve
