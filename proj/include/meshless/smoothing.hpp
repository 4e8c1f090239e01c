#pragma once

#include <Eigen/Dense>
#include <memory>
#include <utility>
#include <vector>

#include "meshless/rbffd.hpp"

namespace meshless {

// Shared evaluation machinery for periodic fits: the uniform 1D node grid
// over the extended interval [-2pi, 4pi] together with its stencils.
class CurveBasis {
  public:
    static std::shared_ptr<const CurveBasis> make(int node_count, const StencilConfig& cfg);

    const NodeSet& nodes() const { return nodes_; }
    const StencilConfig& config() const { return cfg_; }
    long size() const { return nodes_.size(); }
    double spacing() const { return dt_; }

    // Index of the grid node nearest to t; exact midpoints take the lower index.
    int nearest(double t) const;

    // Dense weight row of length N_g for d^order/dt^order at t.
    Eigen::VectorXd weight_row(double t, int order) const;

    // Applies d^order/dt^order of the interpolant of `values` at t.
    double evaluate(const Eigen::VectorXd& values, double t, int order) const;

  private:
    NodeSet nodes_;
    StencilConfig cfg_;
    std::vector<Stencil> stencils_;
    double t0_ = 0.0, dt_ = 0.0;
};

// Smooth 2pi-periodic scalar function of the boundary parameter, stored as
// nodal values on the extended grid. Evaluation wraps the argument into
// [0, 2pi); the fit constrains the first p_g derivatives to match at the seam.
class PeriodicCurve {
  public:
    PeriodicCurve() = default;
    PeriodicCurve(Eigen::VectorXd nodal_values, std::shared_ptr<const CurveBasis> basis);

    double eval(double t, int derivative_order = 0) const;
    Eigen::VectorXd eval_many(const Eigen::VectorXd& ts, int derivative_order = 0) const;
    // Evaluation without wrapping, anywhere on the extended interval.
    double eval_raw(double t, int derivative_order = 0) const;

    // |d^s g(0) - d^s g(2pi)| for s = 0 .. p_g - 1.
    Eigen::VectorXd seam_residuals() const;

    const Eigen::VectorXd& values() const { return values_; }
    const Eigen::VectorXd& grid() const;
    const StencilConfig& config() const;
    const std::shared_ptr<const CurveBasis>& basis() const { return basis_; }

  private:
    Eigen::VectorXd values_;
    std::shared_ptr<const CurveBasis> basis_;
};

// Approximate arclength parameter values in [0, 2pi) for an ordered closed
// polygon (the closing edge from the last vertex back to the first is
// implied). t_0 = 0.
Eigen::VectorXd arclength_parametrize(const Eigen::MatrixXd& vertices);

// Replicates (t, value) data at t - 2pi, t and t + 2pi.
std::pair<Eigen::VectorXd, Eigen::VectorXd> periodic_extend(const Eigen::VectorXd& t_data,
                                                            const Eigen::VectorXd& values);

// Constrained least-squares fit of nodal values on N_g grid points against
// extended data, with p_g derivative-match constraints at the seam enforced
// through Lagrange multipliers.
PeriodicCurve fit_periodic(const Eigen::VectorXd& t_data, const Eigen::VectorXd& values,
                           int node_count, const StencilConfig& cfg);

// Smooth closed boundary reconstructed from ordered vertex data.
struct BoundaryGeometry {
    PeriodicCurve x_curve;
    PeriodicCurve y_curve;
    double scale = 1.0;                 // input coordinates are multiplied by this
    Eigen::MatrixXd original_vertices;  // as given, before scaling

    Eigen::Vector2d point(double t) const;
    Eigen::Vector2d normal(double t) const;

    // Closed polyline of `count` uniform parameter samples (no repeated seam
    // point) and the polyline's total length.
    Eigen::MatrixXd sample_polygon(long count) const;
    double perimeter(long samples = 2048) const;
    void bounding_box(Eigen::Vector2d& lo, Eigen::Vector2d& hi, long samples = 2048) const;
};

// Scales vertices, parametrizes by arclength, replicates periodically and fits
// both coordinate functions. `stride` optionally decimates the input first.
BoundaryGeometry smooth_boundary(const Eigen::MatrixXd& vertices, double scale, int node_count,
                                 const StencilConfig& cfg, int stride = 1);

Eigen::Vector2d curve_point(const BoundaryGeometry& geom, double t);
Eigen::Vector2d curve_normal(const BoundaryGeometry& geom, double t);

// Sparse (t, value) anchors for one boundary-data component, densified by
// periodic piecewise-linear interpolation before fitting.
struct DataAnchors {
    std::vector<std::pair<double, double>> points;  // strictly increasing t in [0, 2pi)
};

PeriodicCurve synth_boundary_data(const DataAnchors& anchors, int data_count, int node_count,
                                  const StencilConfig& cfg);

// Smoothly blended boundary-condition coefficients built from sums of
// rising/falling sigmoid pairs over the traction-active windows between
// transition parameters. kappa0 + kappa1 == 1 by construction.
struct RobinCoefficients {
    std::vector<double> transitions;   // ordered, in [0, 2pi)
    double steepness = 20.0;
    std::vector<int> traction_windows;  // indices of traction-active inter-transition intervals

    static RobinCoefficients pure_dirichlet() { return {}; }
    void validate() const;
};

std::pair<double, double> robin_eval(const RobinCoefficients& rc, double t);

}  // namespace meshless
