#include "yarnscope/image_io.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace yarnscope {

namespace {

void skip_space_and_comments(std::istream& in) {
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

long read_header_int(std::istream& in, const char* field) {
    skip_space_and_comments(in);
    long value = 0;
    int digits = 0;
    while (std::isdigit(in.peek())) {
        value = value * 10 + (in.get() - '0');
        if (++digits > 9) break;
    }
    if (digits == 0 || digits > 9) {
        throw ParseError(ParseError::Kind::MalformedHeader, std::string("malformed PGM header: bad ") + field);
    }
    return value;
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5') {
        throw ParseError(ParseError::Kind::MalformedHeader, "malformed PGM header: expected P5 magic");
    }
    const long width = read_header_int(in, "width");
    const long height = read_header_int(in, "height");
    const long maxval = read_header_int(in, "maxval");
    if (width < 1 || height < 1) {
        throw ParseError(ParseError::Kind::MalformedHeader, "malformed PGM header: zero dimension");
    }
    if (maxval != 255) {
        throw ParseError(ParseError::Kind::UnsupportedMaxval,
                         "unsupported maxval " + std::to_string(maxval) + " (only 255)");
    }
    if (!std::isspace(in.get())) {
        throw ParseError(ParseError::Kind::MalformedHeader, "malformed PGM header: missing separator");
    }
    std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(in.gcount()) != data.size()) {
        throw ParseError(ParseError::Kind::TruncatedPayload,
                         "truncated PGM payload: expected " + std::to_string(data.size()) + " bytes, got " +
                             std::to_string(in.gcount()));
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

void write_pgm(std::ostream& out, const GrayImage& img) {
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
}

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(ParseError::Kind::Io, "cannot open " + path.string());
    return read_pgm(in);
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(ParseError::Kind::Io, "cannot write " + path.string());
    write_pgm(out, img);
    if (!out) throw ParseError(ParseError::Kind::Io, "write failed for " + path.string());
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0) value = 0;  // drop the sign of -0
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

void write_index_value_csv(std::ostream& out, std::span<const std::uint64_t> values) {
    for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << values[i] << '\n';
}

void write_index_value_csv(std::ostream& out, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << format_number(values[i]) << '\n';
}

}  // namespace yarnscope
