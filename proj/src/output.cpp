#include "kinoclear/output.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kinoclear/errors.hpp"

namespace kinoclear {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  return out;
}

const char* class_name(NodeClass c) {
  switch (c) {
    case NodeClass::free: return "free";
    case NodeClass::obstacle_interior: return "interior";
    case NodeClass::boundary: return "boundary";
  }
  return "?";
}

const char* category_name(EnvelopeCategory c) {
  switch (c) {
    case EnvelopeCategory::none: return "none";
    case EnvelopeCategory::envelope: return "envelope";
    case EnvelopeCategory::boundary_adjacent: return "boundary_adjacent";
    case EnvelopeCategory::window_limited: return "window_limited";
  }
  return "?";
}

void coordinate_header(std::ostream& out, std::size_t dim) {
  out << "id";
  for (std::size_t a = 0; a < dim; ++a) out << ",x" << (a + 1);
}

void coordinate_row(std::ostream& out, const Lattice& lat, NodeId n) {
  out << n;
  const Vec x = lat.coords(n);
  for (std::size_t a = 0; a < x.size(); ++a) out << ',' << format_double(x[a]);
}

// Index of the node on each axis beyond the second used for 2-D images.
MultiIndex slice_index(const Lattice& lat, std::optional<double> slice) {
  MultiIndex idx{};
  for (std::size_t a = 2; a < lat.dim(); ++a) {
    const auto& ax = lat.axes()[a];
    idx[a] = ax.count / 2;
    if (a == 2 && slice) {
      Vec probe(lat.dim());
      for (std::size_t b = 0; b < lat.dim(); ++b) probe[b] = lat.axes()[b].coordinate(0);
      probe[2] = *slice;
      const NodeId n = lat.nearest(probe);
      if (n != kNoNode) idx[2] = lat.multi_index(n)[2];
    }
  }
  return idx;
}

template <typename Fn>
GrayImage render(const Lattice& lat, std::optional<double> slice, Fn&& pixel) {
  if (lat.dim() < 2) throw ConfigurationError("images need at least two axes");
  GrayImage img;
  img.width = static_cast<int>(lat.axes()[0].count);
  img.height = static_cast<int>(lat.axes()[1].count);
  img.pixels.assign(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height), 0);
  MultiIndex idx = slice_index(lat, slice);
  for (int row = 0; row < img.height; ++row) {
    for (int col = 0; col < img.width; ++col) {
      idx[0] = col;
      idx[1] = img.height - 1 - row;
      img.pixels[static_cast<std::size_t>(row) * img.width + col] = pixel(lat.id_of(idx));
    }
  }
  return img;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.12g", v);
  return buf.data();
}

void write_cost_field_csv(const fs::path& path, const Lattice& lattice, const CostField& field) {
  auto out = open_out(path);
  coordinate_header(out, lattice.dim());
  out << ",value,backpointer\n";
  for (std::size_t i = 0; i < field.value.size(); ++i) {
    const auto n = static_cast<NodeId>(i);
    coordinate_row(out, lattice, n);
    out << ',' << format_ticks(field.value[i]) << ',' << field.backpointer[i] << '\n';
  }
}

void write_clearance_csv(const fs::path& path, const ClearanceField& cf) {
  const Lattice& lat = *cf.graph->lattice;
  auto out = open_out(path);
  coordinate_header(out, lat.dim());
  out << ",class,clr,backpointer,witness,certified\n";
  for (std::size_t i = 0; i < cf.node_count(); ++i) {
    const auto n = static_cast<NodeId>(i);
    coordinate_row(out, lat, n);
    out << ',' << class_name(lat.node_class(n)) << ',' << format_ticks(cf.clr(n)) << ','
        << backpointer_node(*cf.graph, cf.field, n) << ',' << cf.witness[i] << ',' << (cf.certified(n) ? 1 : 0)
        << '\n';
  }
}

void write_envelope_csv(const fs::path& path, const ClearanceField& cf, const EnvelopeMap& em) {
  const Lattice& lat = *cf.graph->lattice;
  auto out = open_out(path);
  coordinate_header(out, lat.dim());
  out << ",rho_min,rho_max,jump,category,envelope\n";
  for (std::size_t i = 0; i < cf.node_count(); ++i) {
    const auto n = static_cast<NodeId>(i);
    coordinate_row(out, lat, n);
    out << ',' << format_ticks(em.rho_min[i]) << ',' << format_ticks(em.rho_max[i]) << ','
        << format_ticks(em.jump[i]) << ',' << category_name(em.category[i]) << ',' << int{em.envelope[i]} << '\n';
  }
}

void write_boundary_csv(const fs::path& path, const Lattice& lattice, const BoundaryClassification& bc) {
  auto out = open_out(path);
  coordinate_header(out, lattice.dim());
  out << ",label,inflow_cost\n";
  for (std::size_t i = 0; i < bc.label.size(); ++i) {
    if (bc.label[i] == BoundaryLabel::not_boundary) continue;
    const auto n = static_cast<NodeId>(i);
    coordinate_row(out, lattice, n);
    out << ',' << (bc.label[i] == BoundaryLabel::shelf ? "shelf" : "cliff") << ',' << format_ticks(bc.inflow_cost[i])
        << '\n';
  }
}

GrayImage cost_heatmap(const Lattice& lattice, const std::vector<CostTicks>& values, std::optional<double> slice) {
  CostTicks vmax = 0;
  render(lattice, slice, [&](NodeId n) {
    const CostTicks v = values[static_cast<std::size_t>(n)];
    if (v != kUnreachable) vmax = std::max(vmax, v);
    return std::uint8_t{0};
  });
  return render(lattice, slice, [&](NodeId n) -> std::uint8_t {
    const CostTicks v = values[static_cast<std::size_t>(n)];
    if (v == kUnreachable) return kInfinityGray;
    if (vmax == 0) return 0;
    return static_cast<std::uint8_t>(std::llround(254.0 * static_cast<double>(v) / static_cast<double>(vmax)));
  });
}

GrayImage envelope_mask(const Lattice& lattice, const EnvelopeMap& em, std::optional<double> slice) {
  return render(lattice, slice, [&](NodeId n) -> std::uint8_t {
    switch (em.category_of(n)) {
      case EnvelopeCategory::envelope: return 255;
      case EnvelopeCategory::boundary_adjacent: return 128;
      case EnvelopeCategory::window_limited: return 64;
      case EnvelopeCategory::none: break;
    }
    return lattice.node_class(n) == NodeClass::free ? 0 : 32;
  });
}

void write_pgm(const fs::path& path, const GrayImage& image) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

}  // namespace kinoclear
