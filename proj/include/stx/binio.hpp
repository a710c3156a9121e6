#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>

#include "stx/error.hpp"

namespace stx {

// Little-endian binary file helpers. The build targets little-endian hosts;
// a static_assert below keeps the assumption visible.
static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

class BinWriter {
public:
    explicit BinWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) fail_data("cannot open for writing: " + path);
    }

    void magic(const char m[4]) { out_.write(m, 4); }
    template <typename T>
    void write(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        out_.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    void bytes(const void* p, size_t n) { out_.write(static_cast<const char*>(p), std::streamsize(n)); }
    void str(const std::string& s) {
        write<uint32_t>(uint32_t(s.size()));
        bytes(s.data(), s.size());
    }
    void close() {
        out_.close();
        if (!out_) fail_data("write failed: " + path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

class BinReader {
public:
    explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) fail_data("cannot open: " + path);
    }

    void expect_magic(const char m[4]) {
        char got[4] = {};
        in_.read(got, 4);
        if (!in_ || std::memcmp(got, m, 4) != 0)
            fail_data(strprintf("%s: bad magic (expected %.4s)", path_.c_str(), m));
    }
    template <typename T>
    T read() {
        static_assert(std::is_trivially_copyable_v<T>);
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof v);
        if (!in_) fail_data(path_ + ": truncated file");
        return v;
    }
    void bytes(void* p, size_t n) {
        in_.read(static_cast<char*>(p), std::streamsize(n));
        if (!in_) fail_data(path_ + ": truncated file");
    }
    std::string str() {
        uint32_t n = read<uint32_t>();
        if (n > (1u << 20)) fail_data(path_ + ": implausible string length");
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
};

}  // namespace stx
