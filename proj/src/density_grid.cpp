#include "mfrl/density_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mfrl/error.hpp"

namespace mfrl {

namespace {

constexpr double kMassTolerance = 1e-9;

void require_same_shape(const DensityGrid& a, const DensityGrid& b) {
    if (!a.same_shape(b)) throw ShapeError("grid shape mismatch");
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

bool Bounds::valid() const {
    return std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) &&
           std::isfinite(y_max) && x_max > x_min && y_max > y_min;
}

bool GridShape::valid() const { return bounds.valid() && x_bins > 0 && y_bins > 0; }

double GridShape::bin_area() const {
    return (bounds.width() / x_bins) * (bounds.height() / y_bins);
}

std::pair<int, int> GridShape::bin_of(const Vec2& p) const {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) {
        throw Error("non-finite state/action");
    }
    auto axis = [](double v, double lo, double hi, int bins) {
        const double t = std::floor((v - lo) / (hi - lo) * bins);
        if (t < 0.0) return 0;
        if (t >= bins) return bins - 1;
        return static_cast<int>(t);
    };
    return {axis(p.x(), bounds.x_min, bounds.x_max, x_bins),
            axis(p.y(), bounds.y_min, bounds.y_max, y_bins)};
}

Vec2 GridShape::bin_center(int ix, int iy) const {
    return {bounds.x_min + (ix + 0.5) * bounds.width() / x_bins,
            bounds.y_min + (iy + 0.5) * bounds.height() / y_bins};
}

DensityGrid::DensityGrid(GridShape shape, std::vector<double> mass)
    : shape_(shape), mass_(std::move(mass)) {
    if (!shape_.valid()) throw Error("invalid grid");
    if (static_cast<int>(mass_.size()) != shape_.size()) {
        throw ShapeError("mass vector does not match grid resolution");
    }
    double total = 0.0;
    for (double m : mass_) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw Error("grid mass must be finite and >= 0");
        total += m;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw Error("grid mass sums to " + format_double(total) + ", expected 1");
    }
}

DensityGrid DensityGrid::uniform(const GridShape& shape) {
    if (!shape.valid()) throw Error("invalid grid");
    return DensityGrid(shape, std::vector<double>(shape.size(), 1.0 / shape.size()));
}

DensityGrid DensityGrid::dirac(const GridShape& shape, const Vec2& at) {
    if (!shape.valid()) throw Error("invalid grid");
    std::vector<double> mass(shape.size(), 0.0);
    const auto [ix, iy] = shape.bin_of(at);
    mass[shape.index(ix, iy)] = 1.0;
    return DensityGrid(shape, std::move(mass));
}

double DensityGrid::total_mass() const {
    double total = 0.0;
    for (double m : mass_) total += m;
    return total;
}

DensityGrid build_empirical_measure(std::span<const Vec2> positions, const GridShape& shape) {
    if (positions.empty()) throw Error("empty population");
    if (!shape.valid()) throw Error("invalid grid");
    std::vector<long> counts(shape.size(), 0);
    for (const auto& p : positions) {
        const auto [ix, iy] = shape.bin_of(p);
        ++counts[shape.index(ix, iy)];
    }
    const double n = static_cast<double>(positions.size());
    std::vector<double> mass(shape.size());
    std::transform(counts.begin(), counts.end(), mass.begin(),
                   [n](long c) { return static_cast<double>(c) / n; });
    return DensityGrid(shape, std::move(mass));
}

DensityGrid build_empirical_measure(const Eigen::Matrix2Xd& positions, const GridShape& shape) {
    std::vector<Vec2> points(positions.cols());
    for (Eigen::Index i = 0; i < positions.cols(); ++i) points[i] = positions.col(i);
    return build_empirical_measure(std::span<const Vec2>(points), shape);
}

double density_at(const DensityGrid& grid, const Vec2& x) {
    const auto [ix, iy] = grid.shape().bin_of(x);
    return grid.mass_at(ix, iy) / grid.shape().bin_area();
}

BeliefState fp_update(const BeliefState& belief, const DensityGrid& measure) {
    require_same_shape(belief.average, measure);
    const double n = static_cast<double>(belief.count);
    const auto old = belief.average.mass();
    const auto add = measure.mass();
    std::vector<double> mass(old.size());
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] = (n * old[i] + add[i]) / (n + 1.0);
    return BeliefState(DensityGrid(measure.shape(), std::move(mass)), belief.count + 1);
}

BeliefState fp_update_with_step(const BeliefState& belief, const DensityGrid& measure,
                                double step) {
    require_same_shape(belief.average, measure);
    if (!(step > 0.0 && step <= 1.0)) throw Error("belief step must lie in (0, 1]");
    const auto old = belief.average.mass();
    const auto add = measure.mass();
    std::vector<double> mass(old.size());
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] = old[i] + step * (add[i] - old[i]);
    return BeliefState(DensityGrid(measure.shape(), std::move(mass)), belief.count + 1);
}

double grid_distance(const DensityGrid& a, const DensityGrid& b) {
    require_same_shape(a, b);
    double d = 0.0;
    const auto ma = a.mass();
    const auto mb = b.mass();
    for (std::size_t i = 0; i < ma.size(); ++i) d += std::abs(ma[i] - mb[i]);
    return d;
}

void write_grid_csv(std::ostream& out, const DensityGrid& grid) {
    const auto& s = grid.shape();
    out << "x_bins,y_bins,x_min,x_max,y_min,y_max\n";
    out << s.x_bins << ',' << s.y_bins << ',' << format_double(s.bounds.x_min) << ','
        << format_double(s.bounds.x_max) << ',' << format_double(s.bounds.y_min) << ','
        << format_double(s.bounds.y_max) << '\n';
    for (double m : grid.mass()) out << format_double(m) << '\n';
}

DensityGrid read_grid_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "x_bins,y_bins,x_min,x_max,y_min,y_max") {
        throw Error("grid csv: missing header");
    }
    if (!std::getline(in, line)) throw Error("grid csv: missing shape line");
    GridShape shape;
    {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        if (!(fields >> shape.x_bins >> shape.y_bins >> shape.bounds.x_min >> shape.bounds.x_max >>
              shape.bounds.y_min >> shape.bounds.y_max)) {
            throw Error("grid csv: malformed shape line");
        }
    }
    if (!shape.valid()) throw Error("invalid grid");
    std::vector<double> mass;
    mass.reserve(shape.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        mass.push_back(std::stod(line));
    }
    return DensityGrid(shape, std::move(mass));
}

}  // namespace mfrl
