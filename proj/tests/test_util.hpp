#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "coinlens/types.hpp"

namespace testutil {

// Fresh directory under the system temp root, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path = base / ("coinlens-" + std::to_string(::getpid()) + "-" +
                       std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline coinlens::OutputRecord record(std::string tx, std::uint32_t idx, coinlens::Amount value,
                                     coinlens::Timestamp created,
                                     std::optional<coinlens::Timestamp> spent = std::nullopt,
                                     bool coinbase = true) {
    coinlens::OutputRecord r;
    r.tx_id = std::move(tx);
    r.output_index = idx;
    r.value = value;
    r.created_at = created;
    r.spent_at = spent;
    r.is_coinbase = coinbase;
    return r;
}

} // namespace testutil
