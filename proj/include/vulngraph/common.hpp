#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vulngraph {

/// File could not be read or written.
class io_error : public std::runtime_error {
    std::filesystem::path _path;

public:
    io_error(std::filesystem::path path, const std::string& what)
        : std::runtime_error(what + ": " + path.string()), _path(std::move(path)) {}

    const std::filesystem::path& path() const noexcept { return _path; }
};

/// A named library, version or advisory is absent from the inputs.
class not_found : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-fatal findings collected while processing. Never thrown.
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error(path, "cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw io_error(path, "read failed");
    }
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error(path, "cannot open file for writing");
    }
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) {
        throw io_error(path, "write failed");
    }
}

/// Lower-case hex SHA-256 of the given bytes.
inline std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

} // namespace vulngraph
