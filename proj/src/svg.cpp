#include "tdmix/svg.hpp"

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <string>

namespace tdmix {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 520;
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 56;
constexpr double kMaxVariability = 0.5;

const char* region_color(Region region) {
  switch (region) {
    case Region::EasyToLearn:
      return "#1f77b4";
    case Region::Ambiguous:
      return "#2ca02c";
    case Region::HardToLearn:
      return "#d62728";
  }
  return "#000000";
}

const char* region_label(Region region) {
  switch (region) {
    case Region::EasyToLearn:
      return "easy-to-learn";
    case Region::Ambiguous:
      return "ambiguous";
    case Region::HardToLearn:
      return "hard-to-learn";
  }
  return "?";
}

void append_format(std::string& out, const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  out += buffer;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (const char ch : text) {
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

}  // namespace

std::string render_datamap_svg(const std::vector<DatamapPoint>& points) {
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;

  auto x_of = [&](double variability) {
    const double v = std::clamp(variability, 0.0, kMaxVariability);
    return kMarginLeft + (v / kMaxVariability) * plot_w;
  };
  auto y_of = [&](double confidence) {
    const double c = std::clamp(confidence, 0.0, 1.0);
    return kMarginTop + (1.0 - c) * plot_h;
  };

  std::string svg;
  svg.reserve(points.size() * 96 + 2048);
  append_format(svg,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                kWidth, kHeight, kWidth, kHeight);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  append_format(svg,
                "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" "
                "font-size=\"16\" fill=\"#333\">data map</text>\n",
                kMarginLeft);

  // Axes.
  append_format(svg,
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                "stroke=\"#333\" stroke-width=\"1\"/>\n",
                kMarginLeft, kMarginTop, kMarginLeft, kHeight - kMarginBottom);
  append_format(svg,
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                "stroke=\"#333\" stroke-width=\"1\"/>\n",
                kMarginLeft, kHeight - kMarginBottom, kWidth - kMarginRight,
                kHeight - kMarginBottom);
  for (int tick = 0; tick <= 5; ++tick) {
    const double v = kMaxVariability * tick / 5.0;
    append_format(svg,
                  "<text x=\"%.1f\" y=\"%d\" font-family=\"sans-serif\" "
                  "font-size=\"11\" fill=\"#333\" text-anchor=\"middle\">"
                  "%.1f</text>\n",
                  x_of(v), kHeight - kMarginBottom + 18, v);
    const double c = tick / 5.0;
    append_format(svg,
                  "<text x=\"%d\" y=\"%.1f\" font-family=\"sans-serif\" "
                  "font-size=\"11\" fill=\"#333\" text-anchor=\"end\">"
                  "%.1f</text>\n",
                  kMarginLeft - 8, y_of(c) + 4, c);
  }
  append_format(svg,
                "<text x=\"%.1f\" y=\"%d\" font-family=\"sans-serif\" "
                "font-size=\"13\" fill=\"#333\" text-anchor=\"middle\">"
                "variability</text>\n",
                kMarginLeft + plot_w / 2.0, kHeight - 12);
  append_format(svg,
                "<text x=\"16\" y=\"%.1f\" font-family=\"sans-serif\" "
                "font-size=\"13\" fill=\"#333\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 16 %.1f)\">confidence</text>\n",
                kMarginTop + plot_h / 2.0, kMarginTop + plot_h / 2.0);

  // Markers, in the (id-sorted) order supplied.
  for (const DatamapPoint& point : points) {
    append_format(svg,
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\" "
                  "fill-opacity=\"0.7\"><title>%s</title></circle>\n",
                  x_of(point.variability), y_of(point.confidence),
                  region_color(point.region), xml_escape(point.id).c_str());
  }

  // Legend.
  const Region regions[] = {Region::EasyToLearn, Region::Ambiguous,
                            Region::HardToLearn};
  int row = 0;
  for (const Region region : regions) {
    const int y = kMarginTop + 14 + row * 20;
    append_format(svg,
                  "<circle cx=\"%d\" cy=\"%d\" r=\"5\" fill=\"%s\"/>\n",
                  kWidth - kMarginRight - 140, y, region_color(region));
    append_format(svg,
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" "
                  "font-size=\"12\" fill=\"#333\">%s</text>\n",
                  kWidth - kMarginRight - 128, y + 4, region_label(region));
    ++row;
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace tdmix
