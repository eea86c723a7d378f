#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adaloss/synthdata.hpp"

namespace adaloss {

/// Raw 8-bit grayscale raster as stored in a binary PGM.
struct Gray8 {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    friend bool operator==(const Gray8&, const Gray8&) = default;
};

/// Reads a binary (P5) PGM with maxval <= 255. Throws PgmError whose kind()
/// distinguishes ASCII/other formats, malformed headers, 16-bit rasters and
/// truncated data.
Gray8 read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Gray8& raster);

Image image_from_gray(const Gray8& raster);     ///< divides by 255
BinMask mask_from_gray(const Gray8& raster);    ///< foreground iff byte >= 128
Gray8 gray_from_image(const Image& image);      ///< round(v * 255)
Gray8 gray_from_mask(const BinMask& mask);      ///< 0 / 255

Sample load_pgm_pair(const std::filesystem::path& image_path,
                     const std::filesystem::path& mask_path);

struct ManifestRow {
    std::size_t index = 0;
    std::string image_path; ///< relative to the manifest's directory
    std::string mask_path;
    double fg_fraction = 0.0;
};

/// Writes img_NNNN.pgm / mask_NNNN.pgm for each sample plus manifest.csv
/// (index,image_path,mask_path,fg_fraction) into `dir`.
std::vector<ManifestRow> write_dataset(const std::filesystem::path& dir,
                                       const std::vector<Sample>& samples);

std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest_path);

/// Loads every pair listed in a manifest.
std::vector<Sample> load_dataset(const std::filesystem::path& manifest_path);

} // namespace adaloss
