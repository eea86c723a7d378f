#include "adaloss/pgm.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "adaloss/csv.hpp"

namespace adaloss {
namespace {

namespace fs = std::filesystem;

class HeaderReader {
public:
    HeaderReader(const std::vector<char>& bytes, const fs::path& path)
        : bytes_(bytes), path_(path.string()) {}

    // Next whitespace-delimited token, skipping '#' comments.
    std::string token() {
        skip_space_and_comments();
        std::string out;
        while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            if (bytes_[pos_] == '#') {
                break;
            }
            out.push_back(bytes_[pos_++]);
        }
        if (out.empty()) {
            fail("unexpected end of header");
        }
        return out;
    }

    std::size_t number(const char* what) {
        const std::string t = token();
        std::size_t value = 0;
        for (char ch : t) {
            if (!std::isdigit(static_cast<unsigned char>(ch))) {
                fail(std::string("non-numeric ") + what + " '" + t + "'");
            }
            value = value * 10 + static_cast<std::size_t>(ch - '0');
            if (value > (1u << 24)) {
                fail(std::string(what) + " too large");
            }
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            fail("missing whitespace before raster");
        }
        return pos_ + 1;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw PgmError(PgmError::Kind::malformed_header, path_ + ": " + msg);
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char ch = bytes_[pos_];
            if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') {
                    ++pos_;
                }
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<char>& bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

} // namespace

Gray8 read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PgmError(PgmError::Kind::io, "cannot open " + path.string());
    }
    const std::vector<char> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};

    HeaderReader header(bytes, path);
    if (bytes.size() < 2 || bytes[0] != 'P') {
        header.fail("not a PGM file");
    }
    const std::string magic = header.token();
    if (magic == "P2") {
        throw PgmError(PgmError::Kind::unsupported_format,
                       path.string() + ": ASCII PGM (P2) is not supported, expected P5");
    }
    if (magic != "P5") {
        throw PgmError(PgmError::Kind::unsupported_format,
                       path.string() + ": unsupported netpbm format " + magic);
    }

    Gray8 raster;
    raster.width = header.number("width");
    raster.height = header.number("height");
    const std::size_t maxval = header.number("maxval");
    if (raster.width == 0 || raster.height == 0) {
        header.fail("zero image dimension");
    }
    if (maxval == 0 || maxval > 65535) {
        header.fail("maxval " + std::to_string(maxval) + " out of range");
    }
    if (maxval > 255) {
        throw PgmError(PgmError::Kind::bit_depth,
                       path.string() + ": 16-bit PGM (maxval " + std::to_string(maxval) +
                           ") is not supported");
    }

    const std::size_t start = header.raster_start();
    const std::size_t n = raster.width * raster.height;
    if (bytes.size() < start + n) {
        throw PgmError(PgmError::Kind::truncated,
                       path.string() + ": raster holds " + std::to_string(bytes.size() - start) +
                           " bytes, expected " + std::to_string(n));
    }
    raster.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                         bytes.begin() + static_cast<std::ptrdiff_t>(start + n));
    return raster;
}

void write_pgm(const fs::path& path, const Gray8& raster) {
    if (raster.pixels.size() != raster.width * raster.height) {
        throw ContractViolation("write_pgm: raster size does not match dimensions");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw PgmError(PgmError::Kind::io, "cannot write " + path.string());
    }
    out << "P5\n" << raster.width << ' ' << raster.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(raster.pixels.data()),
              static_cast<std::streamsize>(raster.pixels.size()));
    if (!out) {
        throw PgmError(PgmError::Kind::io, "short write to " + path.string());
    }
}

Image image_from_gray(const Gray8& raster) {
    std::vector<double> values(raster.pixels.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = raster.pixels[i] / 255.0;
    }
    return Image(raster.width, raster.height, std::move(values));
}

BinMask mask_from_gray(const Gray8& raster) {
    std::vector<std::uint8_t> values(raster.pixels.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = raster.pixels[i] >= 128 ? 1 : 0;
    }
    return BinMask(raster.width, raster.height, std::move(values));
}

Gray8 gray_from_image(const Image& image) {
    Gray8 raster{image.width(), image.height(), std::vector<std::uint8_t>(image.size())};
    for (std::size_t i = 0; i < image.size(); ++i) {
        raster.pixels[i] = static_cast<std::uint8_t>(std::lround(image[i] * 255.0));
    }
    return raster;
}

Gray8 gray_from_mask(const BinMask& mask) {
    Gray8 raster{mask.width(), mask.height(), std::vector<std::uint8_t>(mask.size())};
    for (std::size_t i = 0; i < mask.size(); ++i) {
        raster.pixels[i] = mask[i] ? 255 : 0;
    }
    return raster;
}

Sample load_pgm_pair(const fs::path& image_path, const fs::path& mask_path) {
    const Gray8 image = read_pgm(image_path);
    const Gray8 mask = read_pgm(mask_path);
    if (image.width != mask.width || image.height != mask.height) {
        throw PgmError(PgmError::Kind::dimension_mismatch,
                       image_path.string() + " is " + std::to_string(image.width) + "x" +
                           std::to_string(image.height) + " but " + mask_path.string() + " is " +
                           std::to_string(mask.width) + "x" + std::to_string(mask.height));
    }
    return Sample{image_from_gray(image), mask_from_gray(mask)};
}

std::vector<ManifestRow> write_dataset(const fs::path& dir, const std::vector<Sample>& samples) {
    fs::create_directories(dir);
    std::vector<ManifestRow> rows;
    rows.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "%04zu.pgm", i);
        ManifestRow row{i, std::string("img_") + stem, std::string("mask_") + stem,
                        samples[i].mask.foreground_fraction()};
        write_pgm(dir / row.image_path, gray_from_image(samples[i].image));
        write_pgm(dir / row.mask_path, gray_from_mask(samples[i].mask));
        rows.push_back(std::move(row));
    }

    CsvTable table({"index", "image_path", "mask_path", "fg_fraction"});
    for (const auto& row : rows) {
        table.add_row({format_count(row.index), row.image_path, row.mask_path,
                       format_real(row.fg_fraction)});
    }
    write_csv_file(dir / "manifest.csv", table);
    return rows;
}

std::vector<ManifestRow> read_manifest(const fs::path& manifest_path) {
    const CsvTable table = read_csv_file(manifest_path);
    const std::vector<std::string> expected{"index", "image_path", "mask_path", "fg_fraction"};
    if (table.header() != expected) {
        throw DataError(manifest_path.string() +
                        ": manifest header must be index,image_path,mask_path,fg_fraction");
    }
    std::vector<ManifestRow> rows;
    for (const auto& cells : table.rows()) {
        ManifestRow row;
        try {
            row.index = static_cast<std::size_t>(std::stoull(cells[0]));
            row.fg_fraction = std::stod(cells[3]);
        } catch (const std::exception&) {
            throw DataError(manifest_path.string() + ": bad numeric field in manifest");
        }
        row.image_path = cells[1];
        row.mask_path = cells[2];
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<Sample> load_dataset(const fs::path& manifest_path) {
    const fs::path base = manifest_path.parent_path();
    std::vector<Sample> samples;
    for (const auto& row : read_manifest(manifest_path)) {
        samples.push_back(load_pgm_pair(base / row.image_path, base / row.mask_path));
    }
    if (samples.empty()) {
        throw DataError(manifest_path.string() + ": manifest lists no samples");
    }
    return samples;
}

} // namespace adaloss
