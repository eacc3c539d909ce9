#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "ltr/io/io.hpp"

namespace ltr::io {

using detail::json;

namespace {

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

std::uint32_t read_be32(std::string_view bytes, std::size_t offset) {
    if (bytes.size() < offset + 4) {
        throw ParseError("IDX: truncated header");
    }
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
    }
    return v;
}

void write_be32(std::string& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
        out.push_back(static_cast<char>((v >> shift) & 0xFFU));
    }
}

struct IdxHeader {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

IdxHeader idx_header(std::string_view bytes) {
    if (read_be32(bytes, 0) != kIdxImages) {
        throw ParseError("IDX: not an image file (magic 0x00000803 expected)");
    }
    IdxHeader h{read_be32(bytes, 4), read_be32(bytes, 8), read_be32(bytes, 12)};
    if (h.rows == 0 || h.cols == 0) {
        throw ParseError("IDX: zero image dimension");
    }
    if (h.rows > (1U << 16) || h.cols > (1U << 16)) {
        throw ParseError("IDX: image dimension too large");
    }
    // Divide rather than multiply so a hostile count cannot overflow.
    const std::size_t per_image = h.rows * h.cols;
    if (bytes.size() < 16 || h.count > (bytes.size() - 16) / per_image) {
        throw ParseError("IDX: truncated payload");
    }
    return h;
}

// Minimal PGM tokenizer: whitespace-separated header fields, '#' comments.
class PgmReader {
public:
    explicit PgmReader(std::string_view bytes) : bytes_(bytes) {}

    std::size_t header_number(const char* what) {
        skip_space_and_comments();
        std::size_t start = pos_;
        std::size_t v = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            if (v > 100'000'000) {
                throw ParseError(std::string("PGM: ") + what + " too large");
            }
            v = v * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            ++pos_;
        }
        if (start == pos_) {
            throw ParseError(std::string("PGM: malformed header, expected ") + what);
        }
        return v;
    }

    std::size_t ascii_sample() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size()) {
            throw ParseError("PGM: truncated payload");
        }
        return header_number("sample");
    }

    // Exactly one whitespace byte separates maxval from raw samples.
    std::string_view raw_payload() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw ParseError("PGM: malformed header, missing separator before raster");
        }
        return bytes_.substr(pos_ + 1);
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 2;
};

Image parse_pgm(std::string_view bytes) {
    const bool binary = bytes[1] == '5';
    PgmReader r(bytes);
    const std::size_t width = r.header_number("width");
    const std::size_t height = r.header_number("height");
    const std::size_t maxval = r.header_number("maxval");
    if (width == 0 || height == 0) {
        throw ParseError("PGM: zero image dimension");
    }
    if (maxval == 0 || maxval > 65535) {
        throw ParseError("PGM: maxval must be in [1, 65535]");
    }
    if (width > (1U << 16) || height > (1U << 16)) {
        throw ParseError("PGM: image too large");
    }
    Tensor3 t(height, width, 1);
    auto values = t.values();
    if (binary) {
        const std::size_t bpp = maxval < 256 ? 1 : 2;
        auto raw = r.raw_payload();
        if (raw.size() < values.size() * bpp) {
            throw ParseError("PGM: truncated payload");
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::size_t s = static_cast<unsigned char>(raw[i * bpp]);
            if (bpp == 2) {
                s = (s << 8) | static_cast<unsigned char>(raw[i * bpp + 1]);
            }
            if (s > maxval) {
                throw ParseError("PGM: sample exceeds maxval");
            }
            values[i] = static_cast<double>(s);
        }
    } else {
        for (auto& v : values) {
            const std::size_t s = r.ascii_sample();
            if (s > maxval) {
                throw ParseError("PGM: sample exceeds maxval");
            }
            v = static_cast<double>(s);
        }
    }
    return Image(std::move(t), static_cast<double>(maxval));
}

Image parse_idx_image(std::string_view bytes, std::size_t index) {
    const IdxHeader h = idx_header(bytes);
    if (index >= h.count) {
        throw ParseError("IDX: index " + std::to_string(index) + " out of range (file holds " +
                         std::to_string(h.count) + " images)");
    }
    Tensor3 t(h.rows, h.cols, 1);
    auto values = t.values();
    const std::size_t base = 16 + index * h.rows * h.cols;
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = static_cast<double>(static_cast<unsigned char>(bytes[base + i]));
    }
    return Image(std::move(t), 255.0);
}

Image parse_json_image(std::string_view bytes) {
    const json doc = detail::parse_json(bytes, "image");
    const std::size_t h = detail::count(detail::field(doc, "height", "image"), "image.height");
    const std::size_t w = detail::count(detail::field(doc, "width", "image"), "image.width");
    const std::size_t c = detail::count(detail::field(doc, "channels", "image"), "image.channels");
    const double p_max = detail::number(detail::field(doc, "p_max", "image"), "image.p_max");
    const json& values = detail::array(detail::field(doc, "values", "image"), "image.values");
    if (h == 0 || w == 0 || c == 0 || h > (1U << 16) || w > (1U << 16) || c > 64 || values.size() != h * w * c) {
        throw ParseError("image.values: expected height*width*channels numbers");
    }
    std::vector<double> data;
    data.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        data.push_back(detail::number(values[i], detail::at("image.values", i)));
    }
    try {
        return Image(Tensor3(h, w, c, std::move(data)), p_max);
    } catch (const DomainError& e) {
        throw ParseError(std::string("image: ") + e.what());
    }
}

}  // namespace

Image parse_image(std::string_view bytes, std::size_t index) {
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
        return parse_pgm(bytes);
    }
    if (bytes.size() >= 4 && read_be32(bytes, 0) == kIdxImages) {
        return parse_idx_image(bytes, index);
    }
    std::size_t i = 0;
    while (i < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[i]))) {
        ++i;
    }
    if (i < bytes.size() && bytes[i] == '{') {
        return parse_json_image(bytes);
    }
    throw ParseError("unrecognized image format (expected PGM P2/P5, IDX or JSON tensor)");
}

Image load_image(const std::string& path, std::size_t index) {
    try {
        return parse_image(read_file(path), index);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::size_t idx_image_count(std::string_view bytes) { return idx_header(bytes).count; }

std::string encode_image(const Image& im, ImageFormat format) {
    const auto values = im.data().values();
    if (format == ImageFormat::Json) {
        json doc;
        doc["format"] = "ltr-image";
        doc["height"] = im.height();
        doc["width"] = im.width();
        doc["channels"] = im.channels();
        doc["p_max"] = im.p_max();
        doc["values"] = std::vector<double>(values.begin(), values.end());
        return doc.dump() + "\n";
    }
    if (im.channels() != 1) {
        throw DomainError("PGM and IDX hold single-channel images only");
    }
    if (format == ImageFormat::Idx) {
        return encode_idx_images({im});
    }
    // Keep p_max as maxval only when that loses nothing; otherwise rescale to 8 bits.
    bool exact = im.p_max() == std::floor(im.p_max()) && im.p_max() <= 65535.0;
    for (double x : values) {
        exact = exact && x == std::floor(x);
    }
    const std::size_t maxval = exact && im.p_max() >= 255.0 ? static_cast<std::size_t>(im.p_max()) : 255;
    const double scale = static_cast<double>(maxval) / im.p_max();
    std::ostringstream out;
    out << (format == ImageFormat::PgmAscii ? "P2" : "P5") << "\n"
        << im.width() << " " << im.height() << "\n"
        << maxval << "\n";
    std::string raster;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto s = static_cast<std::size_t>(std::lround(std::clamp(values[i] * scale, 0.0, double(maxval))));
        if (format == ImageFormat::PgmAscii) {
            out << s << ((i + 1) % im.width() == 0 ? "\n" : " ");
        } else if (maxval < 256) {
            raster.push_back(static_cast<char>(s));
        } else {
            raster.push_back(static_cast<char>(s >> 8));
            raster.push_back(static_cast<char>(s & 0xFFU));
        }
    }
    return out.str() + raster;
}

void save_image(const Image& im, const std::string& path, ImageFormat format) {
    write_file(path, encode_image(im, format));
}

std::string encode_idx_images(const std::vector<Image>& images) {
    std::string out;
    write_be32(out, kIdxImages);
    write_be32(out, static_cast<std::uint32_t>(images.size()));
    const std::size_t rows = images.empty() ? 1 : images.front().height();
    const std::size_t cols = images.empty() ? 1 : images.front().width();
    write_be32(out, static_cast<std::uint32_t>(rows));
    write_be32(out, static_cast<std::uint32_t>(cols));
    for (const Image& im : images) {
        if (im.height() != rows || im.width() != cols || im.channels() != 1) {
            throw DimensionError("IDX images must share one single-channel shape");
        }
        if (im.p_max() != 255.0) {
            throw DomainError("IDX stores bytes; p_max must be 255");
        }
        for (double v : im.data().values()) {
            if (v != std::floor(v)) {
                throw DomainError("IDX stores bytes; pixels must be integers");
            }
            out.push_back(static_cast<char>(static_cast<unsigned char>(v)));
        }
    }
    return out;
}

std::vector<int> parse_idx_labels(std::string_view bytes) {
    if (read_be32(bytes, 0) != kIdxLabels) {
        throw ParseError("IDX: not a label file (magic 0x00000801 expected)");
    }
    const std::size_t n = read_be32(bytes, 4);
    if (bytes.size() < 8 + n) {
        throw ParseError("IDX: truncated payload");
    }
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<unsigned char>(bytes[8 + i]);
    }
    return labels;
}

std::string encode_idx_labels(const std::vector<int>& labels) {
    std::string out;
    write_be32(out, kIdxLabels);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) {
        if (l < 0 || l > 255) {
            throw DomainError("IDX labels must fit in a byte");
        }
        out.push_back(static_cast<char>(l));
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

}  // namespace ltr::io
