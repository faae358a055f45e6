#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kinoclear/analysis.hpp"
#include "kinoclear/clearance.hpp"
#include "kinoclear/reach.hpp"

namespace kinoclear {

// Shortest round-trip-safe rendering used for coordinates in CSV files.
std::string format_double(double v);

// Per-node CSV dumps with a one-line header. Costs use format_ticks, so
// infinite values are written as null.
void write_cost_field_csv(const std::filesystem::path& path, const Lattice& lattice, const CostField& field);
void write_clearance_csv(const std::filesystem::path& path, const ClearanceField& cf);
void write_envelope_csv(const std::filesystem::path& path, const ClearanceField& cf, const EnvelopeMap& em);
void write_boundary_csv(const std::filesystem::path& path, const Lattice& lattice, const BoundaryClassification& bc);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, first row is the largest x2
};

inline constexpr std::uint8_t kInfinityGray = 255;

// Heatmap of a per-node cost over the (x1, x2) plane. Finite values v map to
// round(254 v / vmax) with vmax the largest finite value in the image; +inf
// maps to 255. Axes beyond the second are fixed at the node nearest
// slice (axis 3) or at the middle index.
GrayImage cost_heatmap(const Lattice& lattice, const std::vector<CostTicks>& values,
                       std::optional<double> slice = std::nullopt);

// Envelope mask: 255 envelope, 128 boundary-adjacent, 64 window-limited,
// 32 obstacle nodes, 0 elsewhere.
GrayImage envelope_mask(const Lattice& lattice, const EnvelopeMap& em, std::optional<double> slice = std::nullopt);

// Binary P5 with maxval 255.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace kinoclear
