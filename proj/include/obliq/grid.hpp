#pragma once

// Rectangular (x, p) lattice with inclusive endpoints and uniform spacing.
// Row index runs over x, column index over p.  The CSV format is
//   # x_min x_max nx p_min p_max np
// followed by nx lines of np space-separated values, written with
// shortest-round-trip precision.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace obliq {

struct PhaseSpaceGrid {
    double x_min, x_max;
    int nx;
    double p_min, p_max;
    int np;
    std::vector<double> values;  // values[ix * np + ip]

    PhaseSpaceGrid(double x_min_, double x_max_, int nx_, double p_min_, double p_max_,
                   int np_)
        : x_min(x_min_), x_max(x_max_), nx(nx_), p_min(p_min_), p_max(p_max_), np(np_),
          values(static_cast<size_t>(nx_ > 0 ? nx_ : 0) * static_cast<size_t>(np_ > 0 ? np_ : 0),
                 0.0) {
        if (nx < 2 || np < 2)
            throw std::invalid_argument("PhaseSpaceGrid: nx and np must be >= 2");
        if (!(x_max > x_min) || !(p_max > p_min))
            throw std::invalid_argument("PhaseSpaceGrid: empty coordinate range");
        if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(p_min) ||
            !std::isfinite(p_max))
            throw std::invalid_argument("PhaseSpaceGrid: non-finite bounds");
    }

    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dp() const { return (p_max - p_min) / (np - 1); }
    double x_at(int ix) const { return x_min + ix * dx(); }
    double p_at(int ip) const { return p_min + ip * dp(); }

    double& at(int ix, int ip) { return values[static_cast<size_t>(ix) * np + ip]; }
    double at(int ix, int ip) const { return values[static_cast<size_t>(ix) * np + ip]; }

    bool same_layout(const PhaseSpaceGrid& o) const {
        return nx == o.nx && np == o.np && x_min == o.x_min && x_max == o.x_max &&
               p_min == o.p_min && p_max == o.p_max;
    }

    /// Trapezoidal quadrature of the sampled values.
    double integral() const {
        double sum = 0.0;
        for (int ix = 0; ix < nx; ++ix) {
            const double wx = (ix == 0 || ix == nx - 1) ? 0.5 : 1.0;
            double row = 0.0;
            for (int ip = 0; ip < np; ++ip) {
                const double wp = (ip == 0 || ip == np - 1) ? 0.5 : 1.0;
                row += wp * at(ix, ip);
            }
            sum += wx * row;
        }
        return sum * dx() * dp();
    }

    double min_value() const {
        double m = values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    bool contains(double x, double p) const {
        return x >= x_min && x <= x_max && p >= p_min && p <= p_max;
    }

    /// Bilinear interpolation; throws on out-of-grid lookups.
    double interpolate(double x, double p) const {
        if (!contains(x, p))
            throw std::out_of_range("PhaseSpaceGrid::interpolate: point outside grid");
        double fx = (x - x_min) / dx();
        double fp = (p - p_min) / dp();
        int ix = std::min(static_cast<int>(fx), nx - 2);
        int ip = std::min(static_cast<int>(fp), np - 2);
        const double tx = fx - ix, tp = fp - ip;
        return (1 - tx) * (1 - tp) * at(ix, ip) + tx * (1 - tp) * at(ix + 1, ip) +
               (1 - tx) * tp * at(ix, ip + 1) + tx * tp * at(ix + 1, ip + 1);
    }

    void write_csv(std::ostream& os) const {
        os << "# " << fmt(x_min) << ' ' << fmt(x_max) << ' ' << nx << ' ' << fmt(p_min)
           << ' ' << fmt(p_max) << ' ' << np << '\n';
        for (int ix = 0; ix < nx; ++ix) {
            for (int ip = 0; ip < np; ++ip) {
                if (ip) os << ' ';
                os << fmt(at(ix, ip));
            }
            os << '\n';
        }
    }

    static PhaseSpaceGrid read_csv(std::istream& is) {
        std::string line;
        if (!std::getline(is, line) || line.empty() || line[0] != '#')
            throw std::runtime_error("PhaseSpaceGrid: missing '#' header line");
        std::istringstream hdr(line.substr(1));
        double x0, x1, p0, p1;
        int nx_, np_;
        if (!(hdr >> x0 >> x1 >> nx_ >> p0 >> p1 >> np_))
            throw std::runtime_error("PhaseSpaceGrid: malformed header");
        PhaseSpaceGrid g(x0, x1, nx_, p0, p1, np_);
        for (int ix = 0; ix < nx_; ++ix) {
            if (!std::getline(is, line))
                throw std::runtime_error("PhaseSpaceGrid: truncated data");
            std::istringstream row(line);
            for (int ip = 0; ip < np_; ++ip) {
                double v;
                if (!(row >> v) || !std::isfinite(v))
                    throw std::runtime_error("PhaseSpaceGrid: bad value at row " +
                                             std::to_string(ix));
                g.at(ix, ip) = v;
            }
        }
        return g;
    }

private:
    // Shortest decimal string that round-trips the double.
    static std::string fmt(double v) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    }
};

}  // namespace obliq
