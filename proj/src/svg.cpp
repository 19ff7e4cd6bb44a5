#include "stepfda/svg.hpp"

#include <algorithm>
#include <fstream>

namespace stepfda::svg {

namespace {

constexpr int kWidth = 860;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 160;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Matrix>& series,
                     const std::vector<std::string>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");

  const Scalar x_min = x.minCoeff();
  const Scalar x_max = x.maxCoeff();
  Scalar y_min = series.minCoeff();
  Scalar y_max = series.maxCoeff();
  if (y_max - y_min < 1e-12) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const Scalar pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const Scalar plot_w = kWidth - kMarginLeft - kMarginRight;
  const Scalar plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](Scalar v) { return kMarginLeft + plot_w * (v - x_min) / (x_max - x_min); };
  auto sy = [&](Scalar v) { return kMarginTop + plot_h * (1.0 - (v - y_min) / (y_max - y_min)); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";

  char buf[64];
  for (int tick = 0; tick <= 4; ++tick) {
    const Scalar xv = x_min + (x_max - x_min) * tick / 4.0;
    const Scalar yv = y_min + (y_max - y_min) * tick / 4.0;
    std::snprintf(buf, sizeof(buf), "%g", xv);
    out << "<text x=\"" << sx(xv) << "\" y=\"" << kHeight - kMarginBottom + 18
        << "\" text-anchor=\"middle\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", yv);
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << sy(yv) + 4
        << "\" text-anchor=\"end\">" << buf << "</text>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << sy(yv) << "\" x2=\""
        << kMarginLeft + plot_w << "\" y2=\"" << sy(yv)
        << "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
  }

  for (Index s = 0; s < series.rows(); ++s) {
    const char* color = kPalette[s % 10];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (Index i = 0; i < x.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", sx(x[i]), sy(series(s, i)));
      out << buf;
    }
    out << "\"/>\n";
    const std::string label =
        s < static_cast<Index>(labels.size()) ? labels[static_cast<std::size_t>(s)] : "";
    out << "<line x1=\"" << kWidth - kMarginRight + 10 << "\" y1=\"" << kMarginTop + 14 * s + 6
        << "\" x2=\"" << kWidth - kMarginRight + 30 << "\" y2=\"" << kMarginTop + 14 * s + 6
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kWidth - kMarginRight + 35 << "\" y=\"" << kMarginTop + 14 * s + 10
        << "\">" << label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace stepfda::svg
