#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fbembed/errors.hpp"

// Artifact writers: CSV diagnostics, binary P6 images, content hashes and the
// run manifest. Everything is written byte-deterministically.

namespace fbembed {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        if (row.size() != header.size())
            throw PreconditionError("CsvTable: row width does not match header");
        rows.push_back(std::move(row));
    }

    std::string serialize() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < header.size(); ++i)
            os << header[i] << (i + 1 < header.size() ? ',' : '\n');
        for (const auto& row : rows)
            for (std::size_t i = 0; i < row.size(); ++i)
                os << row[i] << (i + 1 < row.size() ? ',' : '\n');
        return os.str();
    }
};

/// Fixed-format numeric cell (17 significant digits, locale-independent).
inline std::string csv_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

enum class ProbeVerdict : std::uint8_t { Inside, Outside, Undetermined };

struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<ProbeVerdict> pixels;  // row-major, top row first

    ProbeVerdict& at(int row, int col) {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
    ProbeVerdict at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
};

/// Binary P6 encoding; Inside = white, Outside = black, Undetermined = gray.
inline std::string encode_ppm(const RasterImage& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
        throw PreconditionError("encode_ppm: inconsistent image dimensions");
    std::string out =
        "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.reserve(out.size() + img.pixels.size() * 3);
    for (ProbeVerdict v : img.pixels) {
        const char byte = v == ProbeVerdict::Inside    ? '\xff'
                          : v == ProbeVerdict::Outside ? '\x00'
                                                       : '\x80';
        out.append(3, byte);
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("write_file: cannot open " + path);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw ConfigError("write_file: short write to " + path);
}

/// 64-bit FNV-1a over raw bytes, rendered as 16 hex digits.
inline std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

struct ManifestEntry {
    std::string name;
    std::string hash;
    std::size_t bytes = 0;
};

struct Manifest {
    std::vector<ManifestEntry> entries;

    void add(const std::string& name, const std::string& bytes) {
        entries.push_back({name, content_hash(bytes), bytes.size()});
    }

    std::string serialize() const {
        std::ostringstream os;
        os << "{\n  \"artifacts\": [\n";
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            os << "    {\"name\": \"" << e.name << "\", \"fnv1a64\": \"" << e.hash
               << "\", \"bytes\": " << e.bytes << "}" << (i + 1 < entries.size() ? "," : "")
               << "\n";
        }
        os << "  ]\n}\n";
        return os.str();
    }
};

}  // namespace fbembed
