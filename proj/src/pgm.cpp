#include "subrayleigh/error.hpp"
#include "subrayleigh/scene.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace subrayleigh {
namespace {

class HeaderReader {
public:
    HeaderReader(const std::string& bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ >= bytes_.size(); }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = static_cast<unsigned char>(bytes_[pos_]);
            if (std::isspace(c)) {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        unsigned long value = 0;
        const char* first = bytes_.data() + pos_;
        const char* last = bytes_.data() + bytes_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr == first) {
            throw ParseError(std::string("PGM: expected ") + what, start);
        }
        pos_ += static_cast<std::size_t>(ptr - first);
        return value;
    }

    void single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw ParseError("PGM: expected whitespace after maxval", pos_);
        }
        ++pos_;
    }

private:
    const std::string& bytes_;
    std::size_t pos_;
};

}  // namespace

ApertureGrid parse_pgm(const std::string& bytes, double side) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
        throw ParseError("PGM: magic must be P2 or P5", 0);
    }
    const bool binary = bytes[1] == '5';
    HeaderReader in(bytes, 2);
    const std::size_t width_offset = in.offset();
    const unsigned long width = in.number("width");
    const unsigned long height = in.number("height");
    if (width != height) {
        throw ParseError("PGM: image must be square, got " + std::to_string(width) + "x" +
                             std::to_string(height),
                         width_offset);
    }
    const std::size_t maxval_offset = in.offset();
    const unsigned long maxval = in.number("maxval");
    if (maxval == 0 || maxval > 65535) {
        throw ParseError("PGM: maxval must lie in [1, 65535]", maxval_offset);
    }
    const std::size_t count = width * height;
    std::vector<double> values(count);
    const double scale = 1.0 / static_cast<double>(maxval);

    if (binary) {
        in.single_whitespace();
        const std::size_t start = in.offset();
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        if (bytes.size() - start < count * bytes_per) {
            throw ParseError("PGM: raster truncated", bytes.size());
        }
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t at = start + i * bytes_per;
            unsigned long v = static_cast<unsigned char>(bytes[at]);
            if (bytes_per == 2) v = (v << 8) | static_cast<unsigned char>(bytes[at + 1]);
            if (v > maxval) throw ParseError("PGM: sample exceeds maxval", at);
            values[i] = static_cast<double>(v) * scale;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            in.skip_space_and_comments();
            const std::size_t at = in.offset();
            const unsigned long v = in.number("sample");
            if (v > maxval) throw ParseError("PGM: sample exceeds maxval", at);
            values[i] = static_cast<double>(v) * scale;
        }
    }
    return ApertureGrid(width, side, std::move(values));
}

ApertureGrid load_pgm(const std::filesystem::path& path, double side) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    if (file.bad()) throw IoError("read failure on " + path.string());
    return parse_pgm(bytes, side);
}

std::string encode_pgm(const Raster& raster, double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("save_pgm: gamma must be positive");
    for (double v : raster.values) {
        if (!std::isfinite(v)) throw DataError("save_pgm: non-finite pixel value");
        if (v < 0.0) throw DataError("save_pgm: negative pixel value");
    }
    const double peak = raster.max_value();
    std::ostringstream header;
    header << "P5\n" << raster.resolution << ' ' << raster.resolution << "\n65535\n";
    std::string out = header.str();
    out.reserve(out.size() + 2 * raster.values.size());
    for (double v : raster.values) {
        double n = peak > 0.0 ? v / peak : 0.0;
        if (gamma != 1.0) n = std::pow(n, gamma);
        const auto q = static_cast<unsigned>(std::lround(n * 65535.0));
        out.push_back(static_cast<char>((q >> 8) & 0xff));
        out.push_back(static_cast<char>(q & 0xff));
    }
    return out;
}

void save_pgm(const Raster& raster, const std::filesystem::path& path, double gamma) {
    const std::string bytes = encode_pgm(raster, gamma);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open " + path.string() + " for writing");
    file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!file) throw IoError("write failure on " + path.string());
}

void save_pgm(const ApertureGrid& grid, const std::filesystem::path& path, double gamma) {
    save_pgm(grid.raster(), path, gamma);
}

}  // namespace subrayleigh
