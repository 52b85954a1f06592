#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "geometry.hpp"

namespace epiportrait {

inline std::string_view css_color(std::string_view cls) {
  if (cls == "azure_blue") return "#3fa7f5";
  if (cls == "mint_pink") return "#f4a6c6";
  if (cls == "gold_yellow") return "#f2c230";
  if (cls == "pale_purple") return "#b9a3e3";
  if (cls == "normal_gray") return "#bdbdbd";
  if (cls == "silver_gray") return "#8c8c8c";
  if (cls == "dark_gray") return "#4a4a4a";
  if (cls == "s_protein") return "#e0262f";
  if (cls == "m_protein") return "#d9d9d9";
  return "#000000";
}

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Point at `radius` and clockwise-from-top angle `phi` around (cx, cy).
inline std::string polar(double cx, double cy, double radius, double phi) {
  return svg_num(cx + radius * std::sin(phi)) + ' ' + svg_num(cy - radius * std::cos(phi));
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// One standalone SVG: a <path> per protein bar and per RNA strand, plus the
// core and crown outlines as circles.
inline std::string portrait_to_svg(const PortraitGeometry& g) {
  using detail::polar;
  using detail::svg_num;
  const double extent = g.crown_radius + g.max_height() + 4.0;
  const double cx = extent, cy = extent;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(2 * extent) + "\" height=\"" +
                    svg_num(2 * extent) + "\" viewBox=\"0 0 " + svg_num(2 * extent) + ' ' + svg_num(2 * extent) +
                    "\">\n";
  out += "<title>" + detail::xml_escape(g.label) + "</title>\n";
  out += "<circle cx=\"" + svg_num(cx) + "\" cy=\"" + svg_num(cy) + "\" r=\"" + svg_num(g.core_radius) +
         "\" fill=\"none\" stroke=\"#444444\"/>\n";
  out += "<circle cx=\"" + svg_num(cx) + "\" cy=\"" + svg_num(cy) + "\" r=\"" + svg_num(g.crown_radius) +
         "\" fill=\"none\" stroke=\"#444444\"/>\n";
  for (const auto& p : g.proteins) {
    const double r0 = g.crown_radius, r1 = g.crown_radius + p.height;
    const int large = p.theta1 - p.theta0 > std::numbers::pi ? 1 : 0;
    std::string fill;
    if (p.kind == ProteinKind::E) {
      fill = css_color(phase_color(p.phase.value_or(Phase::uncontrolled)));
    } else {
      fill = css_color(p.kind == ProteinKind::S ? "s_protein" : "m_protein");
    }
    out += "<path class=\"protein\" data-x=\"" + std::to_string(p.x) + "\" d=\"M " + polar(cx, cy, r0, p.theta0) +
           " L " + polar(cx, cy, r1, p.theta0) + " A " + svg_num(r1) + ' ' + svg_num(r1) + " 0 " +
           std::to_string(large) + " 1 " + polar(cx, cy, r1, p.theta1) + " L " + polar(cx, cy, r0, p.theta1) +
           " A " + svg_num(r0) + ' ' + svg_num(r0) + " 0 " + std::to_string(large) + " 0 " +
           polar(cx, cy, r0, p.theta0) + " Z\" fill=\"" + fill + "\"/>\n";
  }
  for (const auto& r : g.rnas) {
    std::string d;
    for (std::size_t i = 0; i < r.path.size(); ++i)
      d += (i == 0 ? "M " : " L ") + polar(cx, cy, r.path[i].second, r.path[i].first);
    out += "<path class=\"rna\" data-category=\"" + r.category + "\" d=\"" + d + "\" fill=\"none\" stroke=\"" +
           std::string(css_color(r.color)) + "\" stroke-width=\"1.2\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace epiportrait
