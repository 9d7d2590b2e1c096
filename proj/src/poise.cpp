#include "bdfo/poise.hpp"

#include "bdfo/linalg.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace bdfo::poise {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double lambda_poisedness(const interp::BirkhoffPolynomials& polys, const AvailableSet& available,
                         double region_radius) {
    if (region_radius <= 0.0)
        throw std::invalid_argument("lambda_poisedness: region radius must be positive");
    const int n = static_cast<int>(polys.center.size());
    const double ball = region_radius / polys.radius;
    double lambda = 0.0;
    for (int i = 0; i < polys.coeffs.cols(); ++i) {
        const QuadCoeffs u = quad_from_coefficients(n, polys.coeffs.col(i));
        for (const MultiIndex& alpha : available.indices()) {
            lambda = std::max(lambda, linalg::max_abs_derivative_ball(u, alpha, ball).value);
        }
    }
    return lambda;
}

double lambda_poisedness(const DataSet& data, const AvailableSet& available,
                         double region_radius) {
    return lambda_poisedness(interp::birkhoff_polynomials(data), available, region_radius);
}

PoisednessReport poisedness_report(const DataSet& data, const AvailableSet& available,
                                   double region_radius) {
    const interp::NormalizedSystem sys = interp::build_normalized(data);
    const double det_abs = linalg::abs_determinant(sys.mhat);
    try {
        const double inv_norm = linalg::spectral_norm_inverse(sys.mhat);
        const double lambda =
            lambda_poisedness(interp::birkhoff_polynomials(data), available, region_radius);
        const int q1 = data.size();
        const bool certified = inv_norm <= lambda / std::sqrt(static_cast<double>(q1));
        return PoisednessReport{lambda, inv_norm, det_abs, certified};
    } catch (const SingularMatrixError&) {
        return PoisednessReport{kInf, kInf, 0.0, false};
    } catch (const NotPoisedError&) {
        return PoisednessReport{kInf, kInf, 0.0, false};
    }
}

HeatmapGrid heatmap_grid(const DataSet& base, const std::vector<MultiIndex>& additions,
                         const AvailableSet& available, double region_radius, int resolution) {
    const int n = base.dim();
    if (n > 2) throw std::invalid_argument("heatmap_grid: only 1- and 2-d grids supported");
    if (resolution < 1) throw std::invalid_argument("heatmap_grid: resolution must be >= 1");
    const int q1 = basis_size(n);
    if (base.size() + static_cast<int>(additions.size()) != q1)
        throw std::invalid_argument("heatmap_grid: base plus additions must total q+1 conditions");

    const int rows = (n == 1) ? 1 : resolution;
    HeatmapGrid grid{resolution, region_radius, base.center(),
                     Eigen::MatrixXd::Constant(rows, resolution, kInf),
                     std::vector<std::uint8_t>(static_cast<std::size_t>(rows) * resolution, 0),
                     0.0};

    auto coord = [&](int idx) -> double {
        if (resolution == 1) return 0.0;
        return -region_radius + 2.0 * region_radius * idx / (resolution - 1);
    };

    double max_finite = 0.0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < resolution; ++c) {
            Eigen::VectorXd x = base.center();
            x[0] += coord(c);
            if (n == 2) x[1] += coord(r);

            std::vector<Datum> items = base.items;
            for (const MultiIndex& alpha : additions) items.emplace_back(x, alpha);
            double lambda = kInf;
            try {
                lambda = lambda_poisedness(DataSet(std::move(items)), available, region_radius);
            } catch (const NotPoisedError&) {
            }
            const std::size_t flat = static_cast<std::size_t>(r) * resolution + c;
            if (std::isfinite(lambda)) {
                grid.values(r, c) = lambda;
                grid.poised[flat] = 1;
                max_finite = std::max(max_finite, lambda);
            }
        }
    }
    grid.sentinel = max_finite;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < resolution; ++c) {
            if (!grid.poised[static_cast<std::size_t>(r) * resolution + c])
                grid.values(r, c) = max_finite;
        }
    }
    return grid;
}

void write_heatmap_csv(const HeatmapGrid& grid, std::ostream& os) {
    os << "# bdfo heatmap csv v1\n";
    os << "# center=";
    for (Eigen::Index j = 0; j < grid.center.size(); ++j)
        os << (j ? "," : "") << fmt_double(grid.center[j]);
    os << " radius=" << fmt_double(grid.region_radius) << " resolution=" << grid.resolution
       << " sentinel=" << fmt_double(grid.sentinel) << '\n';
    os << "# values (row-major)\n";
    for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < grid.values.cols(); ++c)
            os << (c ? "," : "") << fmt_double(grid.values(r, c));
        os << '\n';
    }
    os << "# poised mask (row-major, 1 = poised)\n";
    for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < grid.values.cols(); ++c)
            os << (c ? "," : "")
               << int(grid.poised[static_cast<std::size_t>(r) * grid.values.cols() + c]);
        os << '\n';
    }
}

void write_heatmap_json(const HeatmapGrid& grid, std::ostream& os) {
    nlohmann::json j;
    j["schema"] = "bdfo/heatmap/v1";
    j["center"] = std::vector<double>(grid.center.data(), grid.center.data() + grid.center.size());
    j["radius"] = grid.region_radius;
    j["resolution"] = grid.resolution;
    j["sentinel"] = grid.sentinel;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<int>> mask;
    for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
        std::vector<double> vrow;
        std::vector<int> mrow;
        for (Eigen::Index c = 0; c < grid.values.cols(); ++c) {
            vrow.push_back(grid.values(r, c));
            mrow.push_back(grid.poised[static_cast<std::size_t>(r) * grid.values.cols() + c]);
        }
        values.push_back(std::move(vrow));
        mask.push_back(std::move(mrow));
    }
    j["values"] = values;
    j["poised"] = mask;
    os << j.dump(2) << '\n';
}

}  // namespace bdfo::poise
