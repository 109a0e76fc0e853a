#include "efr/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "efr/errors.hpp"

namespace efr {

namespace {

std::string fixed2(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

std::string label6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

std::string escape_xml(const std::string& s) {
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

} // namespace

std::string render_extremile_svg(const std::string& title,
                                 const std::vector<double>& taus,
                                 const std::vector<double>& values) {
    if (taus.empty() || taus.size() != values.size())
        throw domain_error("svg: need matching nonempty tau/value vectors");
    for (double v : values)
        if (!std::isfinite(v))
            throw domain_error("svg: non-finite value");

    const double W = 640, H = 400;
    const double L = 70, R = 20, T = 40, B = 50;
    const double pw = W - L - R, ph = H - T - B;

    double tlo = taus.front(), thi = taus.back();
    if (thi <= tlo) {
        tlo -= 0.5;
        thi += 0.5;
    }
    double vlo = *std::min_element(values.begin(), values.end());
    double vhi = *std::max_element(values.begin(), values.end());
    if (vhi - vlo < 1e-12) {
        vlo -= 1.0;
        vhi += 1.0;
    } else {
        double pad = 0.08 * (vhi - vlo);
        vlo -= pad;
        vhi += pad;
    }

    auto px = [&](double t) { return L + pw * (t - tlo) / (thi - tlo); };
    auto py = [&](double v) { return T + ph * (1.0 - (v - vlo) / (vhi - vlo)); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (int)W
        << "\" height=\"" << (int)H << "\" viewBox=\"0 0 " << (int)W << ' ' << (int)H
        << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << (int)W << "\" height=\"" << (int)H
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fixed2(W / 2) << "\" y=\"24\" font-family=\"monospace\" "
           "font-size=\"15\" text-anchor=\"middle\">"
        << escape_xml(title) << "</text>\n";

    svg << "<line x1=\"" << fixed2(L) << "\" y1=\"" << fixed2(T + ph) << "\" x2=\""
        << fixed2(L + pw) << "\" y2=\"" << fixed2(T + ph)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << fixed2(L) << "\" y1=\"" << fixed2(T) << "\" x2=\""
        << fixed2(L) << "\" y2=\"" << fixed2(T + ph)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    if (tlo < 0.5 && 0.5 < thi) {
        svg << "<line x1=\"" << fixed2(px(0.5)) << "\" y1=\"" << fixed2(T) << "\" x2=\""
            << fixed2(px(0.5)) << "\" y2=\"" << fixed2(T + ph)
            << "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"4,3\"/>\n";
    }

    for (std::size_t i = 0; i < taus.size(); ++i) {
        svg << "<text x=\"" << fixed2(px(taus[i])) << "\" y=\"" << fixed2(T + ph + 18)
            << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">"
            << label6(taus[i]) << "</text>\n";
    }
    for (int g = 0; g <= 4; ++g) {
        double v = vlo + (vhi - vlo) * g / 4.0;
        svg << "<text x=\"" << fixed2(L - 6) << "\" y=\"" << fixed2(py(v) + 4)
            << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">"
            << label6(v) << "</text>\n";
    }
    svg << "<text x=\"" << fixed2(L + pw / 2) << "\" y=\"" << fixed2(H - 12)
        << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">"
           "tau</text>\n";

    svg << "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (i)
            svg << ' ';
        svg << fixed2(px(taus[i])) << ',' << fixed2(py(values[i]));
    }
    svg << "\"/>\n";
    for (std::size_t i = 0; i < taus.size(); ++i) {
        svg << "<circle cx=\"" << fixed2(px(taus[i])) << "\" cy=\""
            << fixed2(py(values[i])) << "\" r=\"3\" fill=\"#1f5fbf\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace efr
