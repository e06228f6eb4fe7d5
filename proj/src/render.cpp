#include "roadtrace/render.hpp"

#include "roadtrace/raster.hpp"

#include <cstdio>
#include <sstream>

namespace roadtrace {

namespace {

std::string hex(const Rgb &c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

void svg_graph(std::ostringstream &os, const RoadGraph &g, const Rgb &color, double width, double r,
               const char *id) {
  os << "<g id=\"" << id << "\" stroke=\"" << hex(color) << "\" stroke-width=\"" << width
     << "\" stroke-linecap=\"round\" fill=\"" << hex(color) << "\">\n";
  for (const Edge &e : g.edges()) {
    const Point2 &a = g.vertex(e.a), &b = g.vertex(e.b);
    os << "<line x1=\"" << a.x() << "\" y1=\"" << a.y() << "\" x2=\"" << b.x() << "\" y2=\"" << b.y()
       << "\"/>\n";
  }
  for (std::size_t v = 0; v < g.num_vertices(); ++v)
    if (g.degree(v) != 2)
      os << "<circle cx=\"" << g.vertex(v).x() << "\" cy=\"" << g.vertex(v).y() << "\" r=\"" << r
         << "\" stroke=\"none\"/>\n";
  os << "</g>\n";
}

void paint(GridMap &img, const RoadGraph &g, const Rgb &color, double width) {
  const GridMap mask = rasterize_graph(g, img.width(), img.height(), width);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.at(x, y))
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[static_cast<std::size_t>(c)];
}

}  // namespace

std::string render_svg(const RoadGraph &truth, const RoadGraph &pred, int width, int height,
                       const RenderStyle &style) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  if (!style.background_png.empty())
    os << "<image width=\"" << width << "\" height=\"" << height
       << "\" href=\"data:image/png;base64," << style.background_png << "\"/>\n";
  else
    os << "<rect width=\"100%\" height=\"100%\" fill=\"#202020\"/>\n";
  svg_graph(os, truth, kTruthColor, style.truth_width, style.vertex_radius, "truth");
  svg_graph(os, pred, kPredColor, style.pred_width, style.vertex_radius, "prediction");
  os << "</svg>\n";
  return os.str();
}

GridMap render_overlay(const GridMap &base, const RoadGraph &truth, const RoadGraph &pred,
                       const RenderStyle &style) {
  GridMap img(base.width(), base.height(), 3);
  for (int y = 0; y < base.height(); ++y)
    for (int x = 0; x < base.width(); ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = base.at(x, y, base.channels() == 3 ? c : 0);
  paint(img, truth, kTruthColor, style.truth_width);
  paint(img, pred, kPredColor, style.pred_width);
  return img;
}

}  // namespace roadtrace
