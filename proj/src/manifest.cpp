#include "gearnet/manifest.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gearnet {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading " + path.string());
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " to " + path.string());
    }
}

std::string checksum(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_checksum(const std::filesystem::path& path) { return checksum(read_file(path)); }

std::string format_key_values(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

KeyValues parse_key_values(std::string_view text) {
    KeyValues kv;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key=value");
        }
        kv.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
    return kv;
}

std::map<std::string, std::string> to_map(const KeyValues& kv) {
    std::map<std::string, std::string> m;
    for (const auto& [k, v] : kv) m[k] = v;
    return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
    KeyValues kv{{"command", command}, {"seed", std::to_string(seed)}};
    for (const auto& [k, v] : configuration) kv.emplace_back("config." + k, v);
    for (const auto& [k, v] : inputs) kv.emplace_back("input." + k, v);
    for (const auto& [k, v] : outputs) {
        kv.emplace_back("output." + k, v);
        kv.emplace_back("checksum." + k, file_checksum(v));
    }
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3f", wall_seconds);
    kv.emplace_back("wall_seconds", secs);
    write_file_atomic(path, format_key_values(kv));
}

}  // namespace gearnet
