#pragma once
#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "rat.hpp"

namespace perfprism {

using Point = std::pair<Rat, Rat>;

// A polygonal line with exact vertices.  Slopes are listed in vertex order
// together with their multiplicities (the x-increment of each edge).
struct Polygon {
    std::vector<Point> vertices;
    std::vector<std::pair<Rat, Rat>> slopes;

    // Polygon through (0,0) whose edges carry the given slopes in the given order.
    static Polygon from_slopes(const std::vector<std::pair<Rat, Rat>>& s) {
        Polygon P;
        Point cur{Rat(0), Rat(0)};
        P.vertices.push_back(cur);
        for (auto& [slope, mult] : s) {
            require(mult > Rat(0), errc::invalid_argument, "nonpositive multiplicity");
            if (!P.slopes.empty() && P.slopes.back().first == slope) {
                P.slopes.back().second += mult;
                P.vertices.pop_back();
            } else {
                P.slopes.push_back({slope, mult});
            }
            cur = {cur.first + mult, cur.second + slope * mult};
            P.vertices.push_back(cur);
        }
        return P;
    }

    // Slope multiset sorted in decreasing order, then polygon.
    static Polygon decreasing(std::vector<Rat> slopes) {
        std::sort(slopes.begin(), slopes.end(), std::greater<Rat>());
        std::vector<std::pair<Rat, Rat>> s;
        for (auto& x : slopes) s.push_back({x, Rat(1)});
        return from_slopes(s);
    }

    // Recompute slopes from vertices.
    static Polygon from_vertices(std::vector<Point> v) {
        Polygon P;
        P.vertices = std::move(v);
        for (std::size_t i = 0; i + 1 < P.vertices.size(); ++i) {
            Rat dx = P.vertices[i + 1].first - P.vertices[i].first;
            require(dx > Rat(0), errc::invalid_argument, "vertices must increase in x");
            P.slopes.push_back({(P.vertices[i + 1].second - P.vertices[i].second) / dx, dx});
        }
        return P;
    }

    // slope multiset with one entry per unit of multiplicity (multiplicities must be integral)
    std::vector<Rat> slope_list() const {
        std::vector<Rat> out;
        for (auto& [s, m] : slopes) {
            require(m.denominator() == 1, errc::invalid_argument, "fractional multiplicity");
            for (i64 i = 0; i < m.numerator(); ++i) out.push_back(s);
        }
        return out;
    }

    Rat width() const { return vertices.empty() ? Rat(0) : vertices.back().first - vertices.front().first; }

    friend bool operator==(const Polygon& a, const Polygon& b) { return a.vertices == b.vertices; }
    friend bool operator!=(const Polygon& a, const Polygon& b) { return !(a == b); }

    std::string csv() const {
        std::ostringstream os;
        os << "x,y\n";
        for (auto& [x, y] : vertices) os << to_string(x) << "," << to_string(y) << "\n";
        return os.str();
    }

    // Axis-annotated polyline.  Coordinates are scaled into a 400x300 box.
    std::string svg() const {
        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        bool first = true;
        for (auto& [x, y] : vertices) {
            double fx = boost::rational_cast<double>(x), fy = boost::rational_cast<double>(y);
            if (first) { xmin = xmax = fx; ymin = ymax = fy; first = false; }
            xmin = std::min(xmin, fx); xmax = std::max(xmax, fx);
            ymin = std::min(ymin, fy); ymax = std::max(ymax, fy);
        }
        if (xmax - xmin < 1e-12) xmax = xmin + 1;
        if (ymax - ymin < 1e-12) ymax = ymin + 1;
        auto X = [&](double x) { return 40 + 340 * (x - xmin) / (xmax - xmin); };
        auto Y = [&](double y) { return 270 - 240 * (y - ymin) / (ymax - ymin); };
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"300\">\n";
        os << "<line x1=\"40\" y1=\"270\" x2=\"390\" y2=\"270\" stroke=\"gray\"/>\n";
        os << "<line x1=\"40\" y1=\"20\" x2=\"40\" y2=\"270\" stroke=\"gray\"/>\n";
        os << "<text x=\"40\" y=\"290\" font-size=\"10\">" << xmin << "</text>\n";
        os << "<text x=\"360\" y=\"290\" font-size=\"10\">" << xmax << "</text>\n";
        os << "<text x=\"2\" y=\"270\" font-size=\"10\">" << ymin << "</text>\n";
        os << "<text x=\"2\" y=\"30\" font-size=\"10\">" << ymax << "</text>\n";
        os << "<polyline fill=\"none\" stroke=\"black\" points=\"";
        for (auto& [x, y] : vertices) {
            double fx = boost::rational_cast<double>(x), fy = boost::rational_cast<double>(y);
            os << X(fx) << "," << Y(fy) << " ";
        }
        os << "\"/>\n</svg>\n";
        return os.str();
    }
};

namespace detail {
// cross product sign of (b - a) x (c - a)
inline Rat cross(const Point& a, const Point& b, const Point& c) {
    return (b.first - a.first) * (c.second - a.second) - (b.second - a.second) * (c.first - a.first);
}
} // namespace detail

// Lower convex hull of a finite point set (minimum y kept for repeated x).
inline Polygon lower_hull(const std::vector<Point>& pts) {
    require(!pts.empty(), errc::zero_element, "empty point set");
    std::map<Rat, Rat> best;
    for (auto& [x, y] : pts) {
        auto it = best.find(x);
        if (it == best.end() || y < it->second) best[x] = y;
    }
    std::vector<Point> h;
    for (auto& pt : best) {
        while (h.size() >= 2 && detail::cross(h[h.size() - 2], h.back(), pt) <= Rat(0)) h.pop_back();
        h.push_back(pt);
    }
    return Polygon::from_vertices(h);
}

// Value of a piecewise linear polygon at x (x inside its span).
inline Rat polygon_at(const Polygon& P, Rat x) {
    require(!P.vertices.empty() && x >= P.vertices.front().first && x <= P.vertices.back().first, errc::out_of_interval,
            "abscissa outside the polygon");
    for (std::size_t i = 0; i + 1 < P.vertices.size(); ++i) {
        auto& [x0, y0] = P.vertices[i];
        auto& [x1, y1] = P.vertices[i + 1];
        if (x <= x1) return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
    return P.vertices.back().second;
}

// Minkowski sum of two lower hulls.
inline Polygon minkowski_sum(const Polygon& A, const Polygon& B) {
    require(!A.vertices.empty() && !B.vertices.empty(), errc::zero_element, "empty polygon");
    std::vector<std::pair<Rat, Rat>> edges(A.slopes);
    edges.insert(edges.end(), B.slopes.begin(), B.slopes.end());
    std::stable_sort(edges.begin(), edges.end(), [](auto& a, auto& b) { return a.first < b.first; });
    Polygon P;
    Point cur{A.vertices.front().first + B.vertices.front().first, A.vertices.front().second + B.vertices.front().second};
    P.vertices.push_back(cur);
    for (auto& [s, m] : edges) {
        if (!P.slopes.empty() && P.slopes.back().first == s) {
            P.slopes.back().second += m;
            P.vertices.pop_back();
        } else {
            P.slopes.push_back({s, m});
        }
        cur = {cur.first + m, cur.second + s * m};
        P.vertices.push_back(cur);
    }
    return P;
}

} // namespace perfprism
