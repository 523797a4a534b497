#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace mfrl {

using Vec2 = Eigen::Vector2d;

struct Bounds {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    bool valid() const;
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool operator==(const Bounds&) const = default;
};

// Geometry of a histogram without its contents.
struct GridShape {
    Bounds bounds;
    int x_bins = 50;
    int y_bins = 50;

    bool valid() const;
    int size() const { return x_bins * y_bins; }
    double bin_area() const;
    // Bin containing p; points outside the bounds land in the nearest edge bin.
    std::pair<int, int> bin_of(const Vec2& p) const;
    int index(int ix, int iy) const { return iy * x_bins + ix; }
    Vec2 bin_center(int ix, int iy) const;
    bool operator==(const GridShape&) const = default;
};

// Discretized probability measure over a rectangle in R^2. Mass is stored
// row-major (rows run along y). Construction enforces nonnegativity and unit
// total mass, so every DensityGrid in circulation is a probability measure.
class DensityGrid {
public:
    DensityGrid(GridShape shape, std::vector<double> mass);

    static DensityGrid uniform(const GridShape& shape);
    static DensityGrid dirac(const GridShape& shape, const Vec2& at);

    const GridShape& shape() const { return shape_; }
    const Bounds& bounds() const { return shape_.bounds; }
    int x_bins() const { return shape_.x_bins; }
    int y_bins() const { return shape_.y_bins; }
    std::span<const double> mass() const { return mass_; }
    double mass_at(int ix, int iy) const { return mass_[shape_.index(ix, iy)]; }
    double total_mass() const;

    bool same_shape(const DensityGrid& other) const { return shape_ == other.shape_; }

private:
    GridShape shape_;
    std::vector<double> mass_;
};

// Fictitious-play belief: running average of the observed measures.
struct BeliefState {
    explicit BeliefState(const GridShape& shape) : average(DensityGrid::uniform(shape)) {}
    BeliefState(DensityGrid avg, long n) : average(std::move(avg)), count(n) {}

    DensityGrid average;
    long count = 0;
};

// Each position contributes 1/N mass to the bin that contains it.
DensityGrid build_empirical_measure(std::span<const Vec2> positions, const GridShape& shape);

// Overload for a 2xN matrix of positions (one agent per column).
DensityGrid build_empirical_measure(const Eigen::Matrix2Xd& positions, const GridShape& shape);

// Bin mass divided by bin area.
double density_at(const DensityGrid& grid, const Vec2& x);

// new average = (count * old + measure) / (count + 1).
BeliefState fp_update(const BeliefState& belief, const DensityGrid& measure);

// Generic stochastic-approximation step: old + step * (measure - old).
// fp_update is the step = 1/(count+1) special case.
BeliefState fp_update_with_step(const BeliefState& belief, const DensityGrid& measure,
                                double step);

// L1 distance between two grids of the same shape; lies in [0, 2].
double grid_distance(const DensityGrid& a, const DensityGrid& b);

// CSV layout: a header line `x_bins,y_bins,x_min,x_max,y_min,y_max`, a line
// with those values, then one mass value per line in row-major order.
void write_grid_csv(std::ostream& out, const DensityGrid& grid);
DensityGrid read_grid_csv(std::istream& in);

}  // namespace mfrl
