// Copyright (c) the abm-calib authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common.hpp"
#include "stats.hpp"

namespace abmcalib::svg {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 0.5 * step; t += step)
    ticks.push_back(std::fabs(t) < 1e-12 * step ? 0.0 : t);
  return ticks;
}

std::string tick_label(double v) {
  std::string s = str_format("%.6g", v);
  return s;
}

class Canvas {
public:
  Canvas(double x_lo, double x_hi, double y_lo, double y_hi)
      : x0_(x_lo), x1_(x_hi), y0_(y_lo), y1_(y_hi) {
    if (!(x1_ > x0_)) x1_ = x0_ + 1.0;
    if (!(y1_ > y0_)) y1_ = y0_ + 1.0;
  }

  double px(double x) const {
    return ml_ + (x - x0_) / (x1_ - x0_) * (width_ - ml_ - mr_);
  }
  double py(double y) const {
    return height_ - mb_ - (y - y0_) / (y1_ - y0_) * (height_ - mt_ - mb_);
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& color, double width, bool dashed = false) {
    body_ << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"" << width << "\"";
    if (dashed) body_ << " stroke-dasharray=\"6 4\"";
    body_ << " points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
      body_ << str_format("%.2f,%.2f ", px(xs[i]), py(ys[i]));
    body_ << "\"/>\n";
  }

  void band(const std::vector<double>& xs, const std::vector<double>& lo,
            const std::vector<double>& hi, const std::string& color,
            double opacity) {
    body_ << "<polygon fill=\"" << color << "\" fill-opacity=\"" << opacity
          << "\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
      body_ << str_format("%.2f,%.2f ", px(xs[i]), py(hi[i]));
    for (std::size_t i = xs.size(); i-- > 0;)
      body_ << str_format("%.2f,%.2f ", px(xs[i]), py(lo[i]));
    body_ << "\"/>\n";
  }

  void vline(double x, const std::string& color, bool dashed = true) {
    body_ << str_format(
        "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" ", px(x),
        py(y0_), px(x), py(y1_));
    body_ << "stroke=\"" << color << "\" stroke-width=\"1.2\"";
    if (dashed) body_ << " stroke-dasharray=\"5 4\"";
    body_ << "/>\n";
  }

  void hline(double y, const std::string& color, bool dashed = true,
             const std::string& label = "") {
    body_ << str_format(
        "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" ", px(x0_),
        py(y), px(x1_), py(y));
    body_ << "stroke=\"" << color << "\" stroke-width=\"1\"";
    if (dashed) body_ << " stroke-dasharray=\"4 4\"";
    body_ << "/>\n";
    if (!label.empty())
      body_ << str_format("<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" "
                          "fill=\"%s\">%s</text>\n",
                          px(x1_) - 34.0, py(y) - 3.0, color.c_str(),
                          escape(label).c_str());
  }

  void rect(double x_lo, double x_hi, double y_lo, double y_hi,
            const std::string& color) {
    const double rx = px(x_lo);
    const double ry = py(y_hi);
    body_ << str_format(
        "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
        "fill=\"%s\"/>\n",
        rx, ry, px(x_hi) - rx, py(y_lo) - ry, color.c_str());
  }

  void dot(double x, double y, const std::string& color, double radius = 2.2) {
    body_ << str_format(
        "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\"/>\n", px(x),
        py(y), radius, color.c_str());
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& items) {
    double y = mt_ + 12.0;
    for (const auto& [label, color] : items) {
      body_ << str_format(
          "<rect x=\"%.2f\" y=\"%.2f\" width=\"14\" height=\"6\" fill=\"%s\"/>\n",
          width_ - mr_ - 130.0, y - 6.0, color.c_str());
      body_ << str_format(
          "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\">%s</text>\n",
          width_ - mr_ - 112.0, y, escape(label).c_str());
      y += 16.0;
    }
  }

  std::string finish(const std::string& title, const std::string& x_label,
                     const std::string& y_label,
                     const std::vector<std::string>* x_categories = nullptr) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << str_format("<svg xmlns=\"http://www.w3.org/2000/svg\" "
                      "width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\" "
                      "font-family=\"sans-serif\">\n",
                      width_, height_, width_, height_);
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // frame
    out << str_format(
        "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
        "fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
        ml_, mt_, width_ - ml_ - mr_, height_ - mt_ - mb_);
    // ticks
    if (x_categories == nullptr) {
      for (double t : nice_ticks(x0_, x1_)) {
        if (t < x0_ - 1e-9 || t > x1_ + 1e-9) continue;
        out << str_format("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" "
                          "y2=\"%.2f\" stroke=\"black\"/>\n",
                          px(t), height_ - mb_, px(t), height_ - mb_ + 4.0);
        out << str_format("<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" "
                          "text-anchor=\"middle\">%s</text>\n",
                          px(t), height_ - mb_ + 15.0, tick_label(t).c_str());
      }
    } else {
      const double n = static_cast<double>(x_categories->size());
      for (std::size_t i = 0; i < x_categories->size(); ++i) {
        const double xc = x0_ + (x1_ - x0_) *
                                     (static_cast<double>(i) + 0.5) / n;
        out << str_format("<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\" "
                          "text-anchor=\"middle\">%s</text>\n",
                          px(xc), height_ - mb_ + 13.0,
                          escape((*x_categories)[i]).c_str());
      }
    }
    for (double t : nice_ticks(y0_, y1_)) {
      if (t < y0_ - 1e-9 || t > y1_ + 1e-9) continue;
      out << str_format("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                        "stroke=\"black\"/>\n",
                        ml_ - 4.0, py(t), ml_, py(t));
      out << str_format("<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" "
                        "text-anchor=\"end\">%s</text>\n",
                        ml_ - 7.0, py(t) + 3.5, tick_label(t).c_str());
    }
    out << str_format("<text x=\"%.2f\" y=\"18\" font-size=\"13\" "
                      "text-anchor=\"middle\">%s</text>\n",
                      0.5 * width_, escape(title).c_str());
    out << str_format("<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" "
                      "text-anchor=\"middle\">%s</text>\n",
                      ml_ + 0.5 * (width_ - ml_ - mr_), height_ - 8.0,
                      escape(x_label).c_str());
    out << str_format("<text x=\"14\" y=\"%.2f\" font-size=\"11\" "
                      "text-anchor=\"middle\" transform=\"rotate(-90 14 "
                      "%.2f)\">%s</text>\n",
                      mt_ + 0.5 * (height_ - mt_ - mb_),
                      mt_ + 0.5 * (height_ - mt_ - mb_),
                      escape(y_label).c_str());
    out << body_.str();
    out << "</svg>\n";
    return out.str();
  }

  double x0_, x1_, y0_, y1_;

private:
  double width_ = 640.0, height_ = 420.0;
  double ml_ = 58.0, mr_ = 16.0, mt_ = 30.0, mb_ = 44.0;
  std::ostringstream body_;
};

}  // namespace

std::pair<double, double> density_plot_range(const PriorDist& prior,
                                             std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  double lo = prior.quantile(0.001);
  double hi = prior.quantile(0.999);
  if (!samples.empty()) {
    lo = std::min(lo, stats::quantile_sorted(samples, 0.001));
    hi = std::max(hi, stats::quantile_sorted(samples, 0.999));
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

Series kernel_density(std::vector<double> samples, double lo, double hi,
                      int grid_points) {
  Series out;
  if (samples.empty() || grid_points < 2) return out;
  const double n = static_cast<double>(samples.size());
  const double s = stats::sd(samples);
  std::sort(samples.begin(), samples.end());
  const double iqr = stats::quantile_sorted(samples, 0.75) -
                     stats::quantile_sorted(samples, 0.25);
  double spread = std::min(s, iqr / 1.34);
  if (!(spread > 0.0)) spread = std::max(s, 1e-9);
  const double bandwidth = 0.9 * spread * std::pow(n, -0.2);
  const double inv_h = 1.0 / bandwidth;
  const double norm = 1.0 / (n * bandwidth * std::sqrt(2.0 * M_PI));
  out.x.resize(static_cast<std::size_t>(grid_points));
  out.y.resize(static_cast<std::size_t>(grid_points));
  for (int gi = 0; gi < grid_points; ++gi) {
    const double x = lo + (hi - lo) * gi / (grid_points - 1);
    double acc = 0.0;
    for (double xi : samples) {
      const double z = (x - xi) * inv_h;
      if (std::fabs(z) < 8.0) acc += std::exp(-0.5 * z * z);
    }
    out.x[static_cast<std::size_t>(gi)] = x;
    out.y[static_cast<std::size_t>(gi)] = norm * acc;
  }
  return out;
}

std::string density_plot(const std::string& title, const PriorDist& prior,
                         const std::vector<double>& posterior_samples,
                         double reference_value) {
  auto [lo, hi] = density_plot_range(prior, posterior_samples);
  lo = std::min(lo, reference_value - 0.02 * (hi - lo));
  hi = std::max(hi, reference_value + 0.02 * (hi - lo));

  const int grid = 201;
  Series prior_curve;
  prior_curve.x.resize(grid);
  prior_curve.y.resize(grid);
  for (int i = 0; i < grid; ++i) {
    const double x = lo + (hi - lo) * i / (grid - 1);
    prior_curve.x[static_cast<std::size_t>(i)] = x;
    const double lp = prior.logpdf(x);
    prior_curve.y[static_cast<std::size_t>(i)] =
        std::isfinite(lp) ? std::exp(lp) : 0.0;
  }
  const Series post_curve = kernel_density(posterior_samples, lo, hi, grid);

  double ymax = 0.0;
  for (double y : prior_curve.y) ymax = std::max(ymax, y);
  for (double y : post_curve.y) ymax = std::max(ymax, y);
  if (!(ymax > 0.0)) ymax = 1.0;

  Canvas c(lo, hi, 0.0, 1.08 * ymax);
  c.polyline(prior_curve.x, prior_curve.y, "#888888", 1.6);
  if (!post_curve.x.empty())
    c.polyline(post_curve.x, post_curve.y, "#1f77b4", 1.8);
  c.vline(reference_value, "#222222");
  c.legend({{"prior", "#888888"}, {"posterior", "#1f77b4"}});
  return c.finish(title, "value", "density");
}

std::string fan_chart(const std::string& title,
                      const std::vector<std::array<double, 5>>& prior_bands,
                      const std::vector<std::array<double, 5>>& posterior_bands,
                      const std::vector<int>& observed) {
  const std::size_t years = posterior_bands.size();
  std::vector<double> xs(years);
  for (std::size_t t = 0; t < years; ++t) xs[t] = static_cast<double>(t);

  double ymax = 1.0;
  auto upd = [&](const std::vector<std::array<double, 5>>& bands) {
    for (const auto& b : bands) ymax = std::max(ymax, b[4]);
  };
  upd(prior_bands);
  upd(posterior_bands);
  for (int o : observed) ymax = std::max(ymax, static_cast<double>(o));

  Canvas c(0.0, years > 1 ? static_cast<double>(years - 1) : 1.0, 0.0,
           1.06 * ymax);
  auto extract = [&](const std::vector<std::array<double, 5>>& bands, int k) {
    std::vector<double> out(bands.size());
    for (std::size_t i = 0; i < bands.size(); ++i) out[i] = bands[i][static_cast<std::size_t>(k)];
    return out;
  };
  if (prior_bands.size() == years) {
    c.band(xs, extract(prior_bands, 0), extract(prior_bands, 4), "#999999", 0.25);
    c.polyline(xs, extract(prior_bands, 2), "#777777", 1.0, true);
  }
  c.band(xs, extract(posterior_bands, 0), extract(posterior_bands, 4),
         "#1f77b4", 0.30);
  c.band(xs, extract(posterior_bands, 1), extract(posterior_bands, 3),
         "#1f77b4", 0.35);
  c.polyline(xs, extract(posterior_bands, 2), "#0b3d66", 1.6);
  if (observed.size() == years) {
    std::vector<double> obs(years);
    for (std::size_t t = 0; t < years; ++t) obs[t] = observed[t];
    c.polyline(xs, obs, "black", 1.4);
    for (std::size_t t = 0; t < years; ++t) c.dot(xs[t], obs[t], "black", 1.8);
  }
  c.legend({{"prior 5-95%", "#999999"},
            {"posterior 5-95%", "#1f77b4"},
            {"observed", "black"}});
  return c.finish(title, "year", "vacant parcels");
}

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<BarEntry>& entries,
                      const std::vector<double>& thresholds) {
  double lo = 0.0, hi = 0.0;
  for (const auto& e : entries) {
    lo = std::min(lo, e.value);
    hi = std::max(hi, e.value);
  }
  for (double t : thresholds) {
    lo = std::min(lo, -t);
    hi = std::max(hi, t);
  }
  const double pad = 0.08 * (hi - lo + 1e-9);
  Canvas c(0.0, static_cast<double>(entries.size()), lo - pad, hi + pad);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    labels.push_back(entries[i].label);
    const double x0 = static_cast<double>(i) + 0.18;
    const double x1 = static_cast<double>(i) + 0.82;
    const double v = entries[i].value;
    c.rect(x0, x1, std::min(0.0, v), std::max(0.0, v),
           v >= 0.0 ? "#1f77b4" : "#d62728");
  }
  c.hline(0.0, "black", false);
  const char* names[] = {"weak", "positive", "strong"};
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const std::string name = k < 3 ? names[k] : "";
    c.hline(thresholds[k], "#555555", true, name);
    c.hline(-thresholds[k], "#555555", true);
  }
  return c.finish(title, "", y_label, &labels);
}

}  // namespace abmcalib::svg
