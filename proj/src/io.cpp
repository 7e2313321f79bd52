#include "mfh/io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mfh/errors.hpp"

namespace mfh {

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return s;
}

std::filesystem::path resolve_out_dir(const std::string& explicit_dir) {
    std::filesystem::path dir;
    if (!explicit_dir.empty()) {
        dir = explicit_dir;
    } else if (const char* env = std::getenv("MFH_OUT_DIR")) {
        dir = env;
    } else {
        dir = std::filesystem::current_path();
    }
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path.string());
    os << content;
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvWriter::Impl {
    std::ofstream os;
};

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : impl_(new Impl) {
    impl_->os.open(path);
    if (!impl_->os) {
        delete impl_;
        throw ConfigError("cannot open for writing: " + path.string());
    }
    for (std::size_t i = 0; i < header.size(); ++i)
        impl_->os << header[i] << (i + 1 < header.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        impl_->os << format_g17(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::row_mixed(long long id, double value) {
    impl_->os << id << ',' << format_g17(value) << '\n';
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const Json& resolved_config, const std::vector<std::string>& outputs) {
    Json manifest;
    manifest["command"] = command;
    manifest["config"] = resolved_config;
    manifest["config_hash"] = hex64(fnv1a64(resolved_config.dump()));
    manifest["outputs"] = outputs;
    write_text_file(out_dir / (command + ".manifest.json"), manifest.dump(2) + "\n");
}

}  // namespace mfh
