#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace mfh {

using Json = nlohmann::json;

// FNV-1a over the canonical serialization; embedded in run manifests.
std::uint64_t fnv1a64(const std::string& data);

std::string hex64(std::uint64_t value);

// Output root: explicit path if nonempty, else $MFH_OUT_DIR, else cwd.
std::filesystem::path resolve_out_dir(const std::string& explicit_dir);

void write_text_file(const std::filesystem::path& path, const std::string& content);

// CSV with a header row; all doubles printed with 17 significant digits.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    ~CsvWriter();
    void row(const std::vector<double>& values);
    void row_mixed(long long id, double value);

  private:
    struct Impl;
    Impl* impl_;
};

std::string format_g17(double v);

// Writes <name>.manifest.json next to the outputs: resolved config + hash.
void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const Json& resolved_config, const std::vector<std::string>& outputs);

}  // namespace mfh
