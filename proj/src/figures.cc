#include "tomomax/figures.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>
#include <utility>
#include <vector>

#include "tomomax/common.h"

namespace tomomax {

namespace {

void check_grid_design(const ExperimentDesign &design) {
    if (design.kind() != StateKind::Rebit || design.num_bases() != 2) {
        throw Error(ErrorCode::InvalidArgument, "grid figures need a rebit design with two bases");
    }
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

std::string escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '&':
                out += "&amp;";
                break;
            case '"':
                out += "&quot;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

GridStats grid_stats(const TabulatedEstimator &estimator) {
    const ExperimentDesign &design = estimator.design();
    check_grid_design(design);
    GridStats s;
    s.m_x = design.shots(0);
    s.m_y = design.shots(1);
    auto at = [&](int nx, int ny) -> const Vec3 & {
        return estimator.entry(static_cast<std::size_t>(nx) * static_cast<std::size_t>(s.m_y + 1) +
                               static_cast<std::size_t>(ny));
    };
    s.min_margin = kInf;
    for (const Vec3 &r : estimator.entries()) {
        s.min_margin = std::min(s.min_margin, 1.0 - norm(r));
    }
    for (int nx : {0, s.m_x}) {
        for (int ny : {0, s.m_y}) {
            s.max_corner_norm = std::max(s.max_corner_norm, norm(at(nx, ny)));
        }
    }
    auto spacing = [](const std::vector<double> &gaps) {
        double mean = 0.0;
        for (double g : gaps) {
            mean += g;
        }
        mean /= static_cast<double>(gaps.size());
        double var = 0.0;
        for (double g : gaps) {
            var += (g - mean) * (g - mean);
        }
        return std::pair{mean, var / static_cast<double>(gaps.size())};
    };
    std::vector<double> boundary, all;
    for (int ny = 0; ny <= s.m_y; ny++) {
        for (int nx = 0; nx < s.m_x; nx++) {
            all.push_back(norm(at(nx + 1, ny) - at(nx, ny)));
            if (ny == 0 || ny == s.m_y) boundary.push_back(all.back());
        }
    }
    for (int nx = 0; nx <= s.m_x; nx++) {
        for (int ny = 0; ny < s.m_y; ny++) {
            all.push_back(norm(at(nx, ny + 1) - at(nx, ny)));
            if (nx == 0 || nx == s.m_x) boundary.push_back(all.back());
        }
    }
    std::tie(s.boundary_spacing_mean, s.boundary_spacing_variance) = spacing(boundary);
    std::tie(s.spacing_mean, s.spacing_variance) = spacing(all);
    return s;
}

std::string estimator_grid_svg(const TabulatedEstimator &estimator, const std::string &title) {
    const ExperimentDesign &design = estimator.design();
    check_grid_design(design);
    const int mx = design.shots(0);
    const int my = design.shots(1);
    const double size = 600.0;
    const double half = 1.5;  // drawn region is [-1.5, 1.5]^2
    auto px = [&](double x) { return fmt((x + half) / (2.0 * half) * size); };
    auto py = [&](double y) { return fmt((half - y) / (2.0 * half) * size + 30.0); };
    auto at = [&](int nx, int ny) -> const Vec3 & {
        return estimator.entry(static_cast<std::size_t>(nx) * static_cast<std::size_t>(my + 1) +
                               static_cast<std::size_t>(ny));
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"630\" viewBox=\"0 0 600 630\">\n";
    out += "<rect width=\"600\" height=\"630\" fill=\"white\"/>\n";
    out += "<text x=\"300\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           escape(title) + "</text>\n";
    out += "<circle cx=\"" + px(0.0) + "\" cy=\"" + py(0.0) + "\" r=\"" + fmt(size / (2.0 * half)) +
           "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1.5\"/>\n";
    out += "<g fill=\"none\" stroke=\"#1f4e9a\" stroke-width=\"0.8\">\n";
    for (int ny = 0; ny <= my; ny++) {
        out += "<polyline points=\"";
        for (int nx = 0; nx <= mx; nx++) {
            const Vec3 &r = at(nx, ny);
            out += px(r[0]) + "," + py(r[1]) + (nx < mx ? " " : "");
        }
        out += "\"/>\n";
    }
    for (int nx = 0; nx <= mx; nx++) {
        out += "<polyline points=\"";
        for (int ny = 0; ny <= my; ny++) {
            const Vec3 &r = at(nx, ny);
            out += px(r[0]) + "," + py(r[1]) + (ny < my ? " " : "");
        }
        out += "\"/>\n";
    }
    out += "</g>\n</svg>\n";
    return out;
}

std::string risk_profile_svg(const std::vector<ProfileCurve> &curves, const std::string &title) {
    const double left = 70.0;
    const double right = 580.0;
    const double top = 40.0;
    const double bottom = 400.0;
    double t_min = kInf;
    double t_max = -kInf;
    double y_max = 0.0;
    for (const ProfileCurve &c : curves) {
        for (const auto &[t, v] : c.points) {
            t_min = std::min(t_min, t);
            t_max = std::max(t_max, t);
            if (std::isfinite(v)) {
                y_max = std::max(y_max, v);
            }
        }
    }
    if (!(t_max > t_min)) {
        t_min = 0.0;
        t_max = 1.0;
    }
    if (!(y_max > 0.0)) {
        y_max = 1.0;
    }
    y_max *= 1.05;
    auto sx = [&](double t) { return left + (t - t_min) / (t_max - t_min) * (right - left); };
    auto sy = [&](double v) {
        double c = std::isfinite(v) ? std::clamp(v, 0.0, y_max) : y_max;
        return bottom - c / y_max * (bottom - top);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"450\" viewBox=\"0 0 760 450\">\n";
    out += "<rect width=\"760\" height=\"450\" fill=\"white\"/>\n";
    out += "<text x=\"325\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           escape(title) + "</text>\n";
    out += "<g stroke=\"black\" stroke-width=\"1\">\n";
    out += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(bottom) + "\" x2=\"" + fmt(right) + "\" y2=\"" +
           fmt(bottom) + "\"/>\n";
    out += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" + fmt(bottom) +
           "\"/>\n";
    out += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 5; i++) {
        double t = t_min + (t_max - t_min) * i / 5.0;
        double v = y_max * i / 5.0;
        out += "<text x=\"" + fmt(sx(t)) + "\" y=\"" + fmt(bottom + 16) + "\" text-anchor=\"middle\">" + fmt(t) +
               "</text>\n";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        out += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(sy(v) + 4) + "\" text-anchor=\"end\">" + buf +
               "</text>\n";
    }
    out += "<text x=\"" + fmt(0.5 * (left + right)) + "\" y=\"" + fmt(bottom + 36) +
           "\" text-anchor=\"middle\">r</text>\n";
    out += "<text x=\"18\" y=\"" + fmt(0.5 * (top + bottom)) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           fmt(0.5 * (top + bottom)) + ")\">pointwise risk</text>\n";
    out += "</g>\n";
    for (std::size_t c = 0; c < curves.size(); c++) {
        const char *colour = kPalette[c % (sizeof kPalette / sizeof kPalette[0])];
        out += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < curves[c].points.size(); i++) {
            const auto &[t, v] = curves[c].points[i];
            out += fmt(sx(t)) + "," + fmt(sy(v)) + (i + 1 < curves[c].points.size() ? " " : "");
        }
        out += "\"/>\n";
        const double ly = top + 16.0 * static_cast<double>(c);
        out += "<line x1=\"600\" y1=\"" + fmt(ly) + "\" x2=\"625\" y2=\"" + fmt(ly) + "\" stroke=\"" + colour +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"630\" y=\"" + fmt(ly + 4) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
               escape(curves[c].label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace tomomax
