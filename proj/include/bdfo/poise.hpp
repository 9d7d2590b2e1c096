#pragma once

#include "bdfo/core.hpp"
#include "bdfo/interp.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

// Geometry quality of interpolation data: the poisedness constant over a
// region, inverse-norm and determinant certificates, and heatmap grids of
// the constant under one-condition completions.
namespace bdfo::poise {

struct PoisednessReport {
    double lambda;               // +inf when the data is not poised
    double inv_norm;             // ||Mhat^{-1}||_2, +inf when not poised
    double det_abs;              // |det Mhat|
    bool certified_by_forward;   // inv_norm <= lambda / sqrt(q+1)
};

/// Exact max over conditions i, alpha in A, and x in B(y0, region_radius) of
/// |d^alpha lambda_i((x - y0)/Delta(Y))|. The scaling constant is Delta(Y)
/// even when region_radius differs, so the extremization runs over the
/// normalized ball of radius region_radius/Delta(Y).
double lambda_poisedness(const DataSet& data, const AvailableSet& available,
                         double region_radius);

/// Same, reusing precomputed basis polynomials.
double lambda_poisedness(const interp::BirkhoffPolynomials& polys, const AvailableSet& available,
                         double region_radius);

PoisednessReport poisedness_report(const DataSet& data, const AvailableSet& available,
                                   double region_radius);

struct HeatmapGrid {
    int resolution;
    double region_radius;
    Eigen::VectorXd center;
    Eigen::MatrixXd values;              // row-major cells; sentinel where not poised
    std::vector<std::uint8_t> poised;    // mask channel, row-major, 1 = poised
    double sentinel;                     // largest finite lambda in the grid

    double& value_at(int row, int col) { return values(row, col); }
};

/// For each grid cell, substitute the cell point into every placeholder
/// condition, complete the base data, and record the poisedness constant of
/// the completed set over B(y0, region_radius). Non-poised cells are marked
/// in the mask and carry the largest finite value as a sentinel.
///
/// The grid spans the bounding square of the region ball; only n in {1, 2}
/// is supported (cells vary the first two coordinates). Row r, column c maps
/// to x = center + region_radius * (-1 + 2c/(res-1), -1 + 2r/(res-1)).
HeatmapGrid heatmap_grid(const DataSet& base, const std::vector<MultiIndex>& additions,
                         const AvailableSet& available, double region_radius, int resolution);

void write_heatmap_csv(const HeatmapGrid& grid, std::ostream& os);
void write_heatmap_json(const HeatmapGrid& grid, std::ostream& os);

}  // namespace bdfo::poise
