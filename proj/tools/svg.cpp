#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace arinfo::svg {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
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

}  // namespace

std::string line_chart(const std::string& title, const std::vector<Series>& series,
                       int width, int height) {
  const double left = 70, right = 20, top = 30, bottom = 40;
  double lo = 0.0, hi = 0.0;
  std::size_t len = 1;
  bool first = true;
  for (const auto& s : series) {
    len = std::max(len, s.values.size());
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  if (hi - lo < 1e-300) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](std::size_t i) {
    return left + pw * (len > 1 ? static_cast<double>(i) / (len - 1) : 0.0);
  };
  auto py = [&](double v) { return top + ph * (hi - v) / (hi - lo); };

  std::ostringstream os;
  os.precision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
     << "\" height=\"" << height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n"
     << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\""
     << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : {lo, 0.5 * (lo + hi), hi}) {
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(v) + 4
       << "\" text-anchor=\"end\" font-size=\"10\">" << v << "</text>\n";
  }
  os << "<text x=\"" << left << "\" y=\"" << height - 20 << "\" font-size=\"10\">0</text>\n"
     << "<text x=\"" << left + pw << "\" y=\"" << height - 20
     << "\" text-anchor=\"end\" font-size=\"10\">" << len - 1 << "</text>\n";
  if (lo < 0 && hi > 0) {
    os << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left + pw
       << "\" y2=\"" << py(0) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % 5];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].values.size(); ++i) {
      if (!std::isfinite(series[k].values[i])) continue;
      os << px(i) << "," << py(series[k].values[i]) << " ";
    }
    os << "\"/>\n"
       << "<text x=\"" << left + 8 << "\" y=\"" << top + 14 + 14 * k
       << "\" font-size=\"11\" fill=\"" << color << "\">" << escape(series[k].label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace arinfo::svg
