#include "meshmap/render.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace meshmap {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};
constexpr int kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);
constexpr int kMargin = 16;
constexpr int kLegendHeight = 24;

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Layer of every CoreId, -1 when unused.
std::vector<int> core_layers(const MappingProblem& p, const Mapping& m) {
  std::vector<int> layer(p.arch.core_count(), -1);
  for (std::size_t i = 0; i < m.layer_cores.size(); ++i)
    for (auto id : m.layer_cores[i]) layer[id] = static_cast<int>(i);
  return layer;
}

char layer_symbol(int layer) {
  if (layer < 10) return static_cast<char>('0' + layer);
  if (layer < 36) return static_cast<char>('A' + layer - 10);
  return '*';
}

struct Geometry {
  int cell, width, height, chip_w, grid, slot;
  int W, H;

  Geometry(const Architecture& a, int cell_size) : cell(cell_size), W(a.mesh_width()), H(a.mesh_height()) {
    chip_w = W * cell;
    grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(a.cores_per_router()))));
    slot = (cell - 12) / grid;
    width = kMargin + a.chips() * (chip_w + kMargin);
    height = kMargin + H * cell + kMargin + kLegendHeight;
  }
  int router_x(int chip, int x) const { return kMargin + chip * (chip_w + kMargin) + x * cell; }
  int router_y(int y) const { return kMargin + (H - 1 - y) * cell; }
  int center_x(int chip, int x) const { return router_x(chip, x) + cell / 2; }
  int center_y(int y) const { return router_y(y) + cell / 2; }
  int slot_x(const CoreLocation& l) const { return router_x(l.chip, l.x) + 6 + ((l.c - 1) % grid) * slot; }
  int slot_y(const CoreLocation& l) const { return router_y(l.y) + 6 + ((l.c - 1) / grid) * slot; }
};

}  // namespace

std::string render_svg(const MappingProblem& p, const Mapping& m, const RenderOptions& options) {
  const auto& arch = p.arch;
  const Geometry g(arch, options.cell);
  const auto layer = core_layers(p, m);
  std::ostringstream s;

  LinkLoads loads;
  if (options.heat) loads = link_loads(p, m);

  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << g.width << "\" height=\"" << g.height
    << "\" viewBox=\"0 0 " << g.width << ' ' << g.height << "\"";
  if (options.heat) s << " data-max-load=\"" << loads.max_load << "\"";
  s << ">\n";
  s << "<title>" << escape(p.workload.name) << "</title>\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int chip = 0; chip < arch.chips(); ++chip) {
    for (int y = 0; y < g.H; ++y) {
      for (int x = 0; x < g.W; ++x) {
        s << "<rect class=\"router\" x=\"" << g.router_x(chip, x) + 2 << "\" y=\"" << g.router_y(y) + 2
          << "\" width=\"" << g.cell - 4 << "\" height=\"" << g.cell - 4
          << "\" fill=\"#f4f4f4\" stroke=\"#444\"/>\n";
        for (int c = 1; c <= arch.cores_per_router(); ++c) {
          const CoreLocation loc{chip, x, y, c};
          const int sx = g.slot_x(loc) + 1, sy = g.slot_y(loc) + 1, sz = g.slot - 2;
          s << "<rect x=\"" << sx << "\" y=\"" << sy << "\" width=\"" << sz << "\" height=\"" << sz << "\"";
          const auto id = arch.find_core(loc);
          if (!id) {
            s << " class=\"disabled\" fill=\"#bbb\" stroke=\"#888\"/>\n";
            s << "<path d=\"M" << sx << ' ' << sy << "l" << sz << ' ' << sz << "M" << sx + sz << ' ' << sy << "l-"
              << sz << ' ' << sz << "\" stroke=\"#888\"/>\n";
          } else if (layer[*id] < 0) {
            s << " class=\"unused\" fill=\"none\" stroke=\"#444\"/>\n";
          } else {
            s << " class=\"used\" data-layer=\"" << layer[*id] << "\" fill=\"" << kPalette[layer[*id] % kPaletteSize]
              << "\" stroke=\"#222\"/>\n";
          }
        }
      }
    }
  }

  if (options.heat && loads.max_load > 0) {
    const auto& links = arch.links();
    for (std::size_t l = 0; l < links.size(); ++l) {
      const auto load = loads.per_link[l];
      if (load == 0) continue;
      const auto& link = links[l];
      int x1, y1, x2, y2;
      switch (link.kind) {
        case LinkKind::core_to_router:
          x1 = g.slot_x(link.from) + g.slot / 2;
          y1 = g.slot_y(link.from) + g.slot / 2;
          x2 = g.center_x(link.to.chip, link.to.x);
          y2 = g.center_y(link.to.y);
          break;
        case LinkKind::router_to_core:
          x1 = g.center_x(link.from.chip, link.from.x);
          y1 = g.center_y(link.from.y);
          x2 = g.slot_x(link.to) + g.slot / 2;
          y2 = g.slot_y(link.to) + g.slot / 2;
          break;
        default: {
          x1 = g.center_x(link.from.chip, link.from.x);
          y1 = g.center_y(link.from.y);
          x2 = g.center_x(link.to.chip, link.to.x);
          y2 = g.center_y(link.to.y);
          // Shift each direction to its own side so opposite links stay apart.
          const int dx = x2 > x1 ? 1 : (x2 < x1 ? -1 : 0), dy = y2 > y1 ? 1 : (y2 < y1 ? -1 : 0);
          x1 -= 3 * dy;
          x2 -= 3 * dy;
          y1 += 3 * dx;
          y2 += 3 * dx;
        }
      }
      const double t = static_cast<double>(load) / static_cast<double>(loads.max_load);
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      s << "<line class=\"load " << to_string(link.kind) << "\" data-load=\"" << load << "\" x1=\"" << x1
        << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2 << "\" stroke=\"rgb(255," << fade << ','
        << fade << ")\" stroke-width=\"" << 1 + static_cast<int>(std::lround(3.0 * t)) << "\"/>\n";
    }
  }

  int lx = kMargin;
  const int ly = g.height - kLegendHeight + 4;
  for (std::size_t i = 0; i < m.layer_cores.size(); ++i) {
    s << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\""
      << kPalette[i % kPaletteSize] << "\"/>\n";
    s << "<text x=\"" << lx + 16 << "\" y=\"" << ly + 11 << "\" font-size=\"11\" font-family=\"monospace\">L"
      << i << ':' << m.layer_cores[i].size() << "</text>\n";
    lx += 64;
  }
  s << "</svg>\n";
  return s.str();
}

std::string render_text(const MappingProblem& p, const Mapping& m) {
  const auto& arch = p.arch;
  const auto layer = core_layers(p, m);
  std::ostringstream s;
  for (int chip = 0; chip < arch.chips(); ++chip) {
    s << "chip " << chip << '\n';
    for (int y = arch.mesh_height() - 1; y >= 0; --y) {
      s << (y < 10 ? " " : "") << y << ' ';
      for (int x = 0; x < arch.mesh_width(); ++x) {
        s << '[';
        for (int c = 1; c <= arch.cores_per_router(); ++c) {
          const auto id = arch.find_core({chip, x, y, c});
          s << (!id ? '#' : layer[*id] < 0 ? '.' : layer_symbol(layer[*id]));
        }
        s << ']';
      }
      s << '\n';
    }
  }
  return s.str();
}

}  // namespace meshmap
