#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "meshless/errors.hpp"

namespace meshless {

// A set of points in R^d, d in {1, 2}, stored as rows. Construction rejects
// non-finite coordinates and coincident points.
class NodeSet {
  public:
    NodeSet() = default;
    explicit NodeSet(Eigen::MatrixXd points);

    long size() const { return pts_.rows(); }
    int dim() const { return static_cast<int>(pts_.cols()); }
    const Eigen::MatrixXd& points() const { return pts_; }
    Eigen::RowVectorXd point(long i) const { return pts_.row(i); }

    static NodeSet from_1d(const Eigen::VectorXd& xs);

  private:
    Eigen::MatrixXd pts_;
};

// A differential operator applied on the right-hand side of the local
// interpolation problems: a pure partial derivative d^ax/dx^ax d^ay/dy^ay
// (identity when both orders are zero) or the Laplacian.
struct DiffSpec {
    enum class Kind { Partial, Laplacian };
    Kind kind = Kind::Partial;
    int order_x = 0;
    int order_y = 0;

    static DiffSpec identity() { return {}; }
    static DiffSpec d1() { return {Kind::Partial, 1, 0}; }
    static DiffSpec d2() { return {Kind::Partial, 0, 1}; }
    static DiffSpec d11() { return {Kind::Partial, 2, 0}; }
    static DiffSpec d22() { return {Kind::Partial, 0, 2}; }
    static DiffSpec d12() { return {Kind::Partial, 1, 1}; }
    static DiffSpec laplacian() { return {Kind::Laplacian, 0, 0}; }
    // 1D derivative of arbitrary order (order 0 = identity).
    static DiffSpec derivative(int order) { return {Kind::Partial, order, 0}; }

    int total_order() const { return kind == Kind::Laplacian ? 2 : order_x + order_y; }
    bool is_identity() const { return kind == Kind::Partial && order_x == 0 && order_y == 0; }
};

// Stencil size rule n = 2 * C(p+d, d).
int stencil_size(int poly_degree, int dim);

// Number of monomials of total degree <= p in d variables.
int monomial_count(int poly_degree, int dim);

// Local approximation parameters: appended monomial degree, polyharmonic
// spline exponent (3 or 5) and stencil size. stencil_override = 0 selects the
// size formula; explicit values must be at least as large.
struct StencilConfig {
    int poly_degree = 3;
    int phs_exponent = 3;
    int stencil_size = 0;

    static StencilConfig make(int poly_degree, int dim, int phs_exponent = 3,
                              int stencil_override = 0);
};

// Exact k-nearest-neighbor indices for every query point, sorted ascending by
// distance with ties broken by ascending index.
std::vector<std::vector<int>> knn(const NodeSet& base, const NodeSet& queries, int k);

// One local interpolation problem: the stencil's nodes scaled into [-1,1]^d
// and the factorized augmented PHS+monomial matrix.
struct Stencil {
    int center_index = -1;
    std::vector<int> neighbor_indices;      // [0] is the center
    double scale = 1.0;
    Eigen::VectorXd shift;                  // d entries
    Eigen::MatrixXd scaled_points;          // n x d, inside [-1,1]^d
    std::shared_ptr<const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>> factorization;
};

std::vector<Stencil> build_stencils(const NodeSet& nodes, const StencilConfig& cfg);

// Weights w such that sum_j w_j f(x_j) approximates (L f)(eval_point), exact
// for the PHS basis and monomials up to the configured degree.
Eigen::VectorXd local_weights(const Stencil& stencil, const Eigen::VectorXd& eval_point,
                              const DiffSpec& op, const StencilConfig& cfg);

// Rectangular M x N operator with exactly n stored entries per row.
class SparseOperator {
  public:
    SparseOperator() = default;
    SparseOperator(long rows, long cols, int row_width);

    long rows() const { return weights_.rows(); }
    long cols() const { return cols_; }
    int row_width() const { return static_cast<int>(weights_.cols()); }

    const Eigen::MatrixXd& weights() const { return weights_; }
    const Eigen::MatrixXi& columns() const { return columns_; }
    const std::vector<int>& nearest_center() const { return nearest_center_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& nodal) const;
    Eigen::SparseMatrix<double> to_sparse() const;

    void set_row(long row, int center, const int* cols, const double* w);

  private:
    Eigen::MatrixXd weights_;   // M x n
    Eigen::MatrixXi columns_;   // M x n
    std::vector<int> nearest_center_;
    long cols_ = 0;
};

SparseOperator assemble_operator(const NodeSet& nodes, const NodeSet& eval_points,
                                 const StencilConfig& cfg, const DiffSpec& op);

// Streaming form used by the PDE assembly: computes, for every evaluation
// point and every requested operator, the local weight row against the
// stencil nearest to that point, and hands it to `sink`. Rows are grouped per
// stencil so each augmented matrix is factorized exactly once; rows for
// distinct evaluation points never alias, so sinks may be called from worker
// threads. `cols` holds the stencil's node indices sorted ascending and `w`
// the matching weights.
using RowSink = std::function<void(long eval_index, int op_index, const int* cols,
                                   const double* w, int n)>;
void compute_operator_rows(const NodeSet& nodes, const NodeSet& eval_points,
                           const StencilConfig& cfg, std::span<const DiffSpec> ops,
                           const RowSink& sink);

// As above but with the nearest-center assignment precomputed (kappa[l] is the
// node index whose stencil serves evaluation point l).
void compute_operator_rows(const NodeSet& nodes, const NodeSet& eval_points,
                           const StencilConfig& cfg, std::span<const DiffSpec> ops,
                           const std::vector<int>& kappa, const RowSink& sink);

// Exponent tuples of the d-variate monomial basis up to total degree p in
// graded lexicographic order.
std::vector<std::array<int, 2>> monomial_exponents(int poly_degree, int dim);

}  // namespace meshless
