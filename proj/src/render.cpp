#include "growl/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace growl {

namespace {

constexpr double kCanvas = 600.0;
constexpr double kPad = 40.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_scene_svg(const Scene& scene, const ScenePrediction* prediction) {
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
  if (scene.individuals.empty()) return svg + "</svg>\n";

  double min_x = scene.individuals.front().x, max_x = min_x;
  double min_y = scene.individuals.front().y, max_y = min_y;
  for (const auto& p : scene.individuals) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
  const double scale = (kCanvas - 2.0 * kPad) / span;
  std::map<std::string, std::pair<double, double>, std::less<>> at;
  for (const auto& p : scene.individuals)
    at[p.id] = {kPad + (p.x - min_x) * scale, kCanvas - kPad - (p.y - min_y) * scale};

  auto line = [&](const std::string& a, const std::string& b) {
    const auto [x1, y1] = at.at(a);
    const auto [x2, y2] = at.at(b);
    return "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) + "\" y2=\"" + fmt(y2) + "\"/>\n";
  };

  svg += "<title>" + escape(scene.frame_id) + "</title>\n";
  if (scene.groups && !scene.groups->empty()) {
    svg += "<g id=\"ground-truth\" stroke=\"#2a9d3a\" stroke-width=\"3\">\n";
    for (const auto& g : *scene.groups)
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j) svg += line(g[i], g[j]);
    svg += "</g>\n";
  }
  if (prediction) {
    svg += "<g id=\"predicted\" stroke=\"#1f5fbf\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\">\n";
    for (const auto& e : prediction->edges)
      if (e.label && at.contains(e.a) && at.contains(e.b)) svg += line(e.a, e.b);
    svg += "</g>\n";
  }
  svg += "<g id=\"nodes\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (const auto& p : scene.individuals) {
    const auto [x, y] = at.at(p.id);
    const double tx = x + 14.0 * std::cos(p.theta);
    const double ty = y - 14.0 * std::sin(p.theta);
    svg += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"6\" fill=\"#ffffff\" stroke=\"#222222\"/>\n";
    svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(tx) + "\" y2=\"" + fmt(ty) +
           "\" stroke=\"#d62828\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(x + 8.0) + "\" y=\"" + fmt(y + 14.0) + "\">" + escape(p.id) + "</text>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace growl
