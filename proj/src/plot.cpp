#include "pdl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace pdl {

namespace {
constexpr double kW = 640, kH = 480, kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

const char* kColours[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};
}  // namespace

std::string render_plot(const PlotSpec& spec) {
    auto records = parse_sweep_csv(spec.csv_text);
    auto summary = summarize(records);
    std::erase_if(summary, [](const PSummary& s) { return s.used == 0; });
    if (summary.empty()) throw ParseError("no stable runs to plot");
    std::sort(summary.begin(), summary.end(), [](auto& a, auto& b) { return a.p < b.p; });
    int n = records.front().n;

    // every curve must be defined at every data point
    for (auto c : spec.curves)
        for (auto& s : summary) {
            double y = theory_curve(c, s.p, n);
            if (!std::isfinite(y)) throw InvalidParams(name(c) + " undefined at p=" + tick_label(s.p));
        }

    double x0 = summary.front().p, x1 = summary.back().p;
    if (spec.x_range) std::tie(x0, x1) = *spec.x_range;
    if (x1 <= x0) {
        x0 -= 0.01;
        x1 += 0.01;
    }
    double y0 = 0, y1 = 0;
    for (auto& s : summary) y1 = std::max(y1, s.mean + s.std_error);
    for (auto c : spec.curves)
        for (auto& s : summary) y1 = std::max(y1, theory_curve(c, s.p, n));
    if (spec.y_range) std::tie(y0, y1) = *spec.y_range;
    if (y1 <= y0) y1 = y0 + 1;
    y1 *= 1.05;

    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto X = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto Y = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

    std::string o;
    o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" + num(kH) + "\" viewBox=\"0 0 " +
         num(kW) + " " + num(kH) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        o += "<text x=\"" + num(kW / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + escape(spec.title) + "</text>\n";
    o += "<clipPath id=\"area\"><rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" +
         num(ph) + "\"/></clipPath>\n";
    // axes and ticks
    o += "<g stroke=\"black\" fill=\"none\"><rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\"/></g>\n";
    for (int i = 0; i <= 5; ++i) {
        double xv = x0 + (x1 - x0) * i / 5, yv = y0 + (y1 - y0) * i / 5;
        o += "<line x1=\"" + num(X(xv)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(X(xv)) + "\" y2=\"" +
             num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
        o += "<text x=\"" + num(X(xv)) + "\" y=\"" + num(kTop + ph + 20) + "\" text-anchor=\"middle\">" + tick_label(xv) +
             "</text>\n";
        o += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(Y(yv)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(Y(yv)) +
             "\" stroke=\"black\"/>\n";
        o += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(Y(yv) + 4) + "\" text-anchor=\"end\">" + tick_label(yv) +
             "</text>\n";
    }
    o += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kH - 15) + "\" text-anchor=\"middle\">p</text>\n";
    o += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num(kTop + ph / 2) + ")\">final density r_f</text>\n";

    // curves, sampled on a fixed grid
    o += "<g clip-path=\"url(#area)\" fill=\"none\" stroke-width=\"1.5\">\n";
    for (std::size_t ci = 0; ci < spec.curves.size(); ++ci) {
        std::string pts;
        for (int i = 0; i <= 200; ++i) {
            double x = x0 + (x1 - x0) * i / 200;
            if (!(x > 0 && x < 1)) continue;
            if (!pts.empty()) pts += ' ';
            pts += num(X(x)) + "," + num(Y(theory_curve(spec.curves[ci], x, n)));
        }
        o += "<polyline stroke=\"" + std::string(kColours[ci % 7]) + "\" points=\"" + pts + "\"/>\n";
    }
    o += "</g>\n";

    // data
    o += "<g clip-path=\"url(#area)\">\n";
    for (auto& s : summary) {
        double cx = X(s.p);
        if (s.std_error > 0)
            o += "<line x1=\"" + num(cx) + "\" y1=\"" + num(Y(s.mean - s.std_error)) + "\" x2=\"" + num(cx) + "\" y2=\"" +
                 num(Y(s.mean + s.std_error)) + "\" stroke=\"black\"/>\n";
        o += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(Y(s.mean)) + "\" r=\"3\" fill=\"black\"/>\n";
    }
    o += "</g>\n";

    // legend
    double ly = kTop + 16;
    o += "<circle cx=\"" + num(kLeft + 16) + "\" cy=\"" + num(ly - 4) + "\" r=\"3\" fill=\"black\"/>\n";
    o += "<text x=\"" + num(kLeft + 28) + "\" y=\"" + num(ly) + "\">mean r_f (n=" + std::to_string(n) + ")</text>\n";
    for (std::size_t ci = 0; ci < spec.curves.size(); ++ci) {
        ly += 16;
        o += "<line x1=\"" + num(kLeft + 8) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(kLeft + 24) + "\" y2=\"" + num(ly - 4) +
             "\" stroke=\"" + kColours[ci % 7] + "\" stroke-width=\"1.5\"/>\n";
        o += "<text x=\"" + num(kLeft + 28) + "\" y=\"" + num(ly) + "\">" + name(spec.curves[ci]) + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

}  // namespace pdl
