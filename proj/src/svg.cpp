#include "balg/svg.hpp"

#include <cstdio>
#include <sstream>

namespace balg {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') {
      out += "&lt;";
    } else if (c == '>') {
      out += "&gt;";
    } else if (c == '&') {
      out += "&amp;";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

void SvgPlot::add(std::vector<std::pair<double, double>> pts, std::string colour, double stroke) {
  lines.push_back({std::move(pts), std::move(colour), stroke});
}

std::string SvgPlot::str() const {
  const double margin = 40;
  double w = width - 2 * margin, h = height - 2 * margin;
  auto X = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * w; };
  auto Y = [&](double y) { return margin + (ymax - y) / (ymax - ymin) * h; };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
     << "\" fill=\"none\" stroke=\"#888888\"/>\n";
  if (xmin < 0 && xmax > 0) {
    os << "<line x1=\"" << fmt(X(0)) << "\" y1=\"" << fmt(Y(ymin)) << "\" x2=\"" << fmt(X(0)) << "\" y2=\""
       << fmt(Y(ymax)) << "\" stroke=\"#cc3333\" stroke-width=\"1.5\"/>\n";
  }
  os << "<clipPath id=\"box\"><rect x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(w)
     << "\" height=\"" << fmt(h) << "\"/></clipPath>\n";
  os << "<g clip-path=\"url(#box)\" fill=\"none\">\n";
  for (const auto& l : lines) {
    if (l.pts.size() < 2) continue;
    os << "<polyline stroke=\"" << l.colour << "\" stroke-width=\"" << fmt(l.stroke) << "\" points=\"";
    for (std::size_t i = 0; i < l.pts.size(); ++i) {
      if (i) os << " ";
      os << fmt(X(l.pts[i].first)) << "," << fmt(Y(l.pts[i].second));
    }
    os << "\"/>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << fmt(width / 2.0) << "\" y=\"" << fmt(margin / 2 + 4) << "\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"13\">" << escape(title) << "</text>\n";
  os << "<text x=\"" << fmt(width / 2.0) << "\" y=\"" << fmt(height - 10.0) << "\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"12\">" << escape(xlabel) << "</text>\n";
  os << "<text x=\"12\" y=\"" << fmt(height / 2.0) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"12\">" << escape(ylabel) << "</text>\n";
  os << "<text x=\"" << fmt(margin) << "\" y=\"" << fmt(height - margin + 14) << "\" font-family=\"sans-serif\" "
     << "font-size=\"10\">" << fmt(xmin) << "</text>\n";
  os << "<text x=\"" << fmt(width - margin) << "\" y=\"" << fmt(height - margin + 14) << "\" text-anchor=\"end\" "
     << "font-family=\"sans-serif\" font-size=\"10\">" << fmt(xmax) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace balg
