#include "meshless/rbffd.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "meshless/kdtree.hpp"
#include "meshless/parallel.hpp"

namespace meshless {

namespace {

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

double falling(int a, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= (a - i);
    return r;
}

// L applied to ||y - x||^e as a function of y, evaluated at u = y - x.
double phs_apply(const DiffSpec& op, const double* u, int dim, int e) {
    if (dim == 1) {
        // d^s/dt^s |u|^e = e(e-1)...(e-s+1) |u|^(e-s) sgn(u)^s, zero beyond s = e.
        int s = op.kind == DiffSpec::Kind::Laplacian ? 2 : op.order_x;
        if (s > e) return 0.0;
        double c = falling(e, s);
        double a = std::abs(u[0]);
        double val = c * ipow(a, e - s);
        if (s % 2 == 1) {
            double sg = (u[0] > 0.0) ? 1.0 : (u[0] < 0.0 ? -1.0 : 0.0);
            val *= sg;
        }
        return val;
    }
    const double r2 = u[0] * u[0] + u[1] * u[1];
    const double r = std::sqrt(r2);
    switch (op.kind) {
        case DiffSpec::Kind::Laplacian:
            // e*(e-2+d) r^(e-2) with d = 2
            return (e == 3) ? 9.0 * r : 25.0 * r2 * r;
        case DiffSpec::Kind::Partial:
            break;
    }
    const int total = op.order_x + op.order_y;
    if (total == 0) return (e == 3) ? r2 * r : r2 * r2 * r;
    if (total == 1) {
        double ui = op.order_x == 1 ? u[0] : u[1];
        return (e == 3) ? 3.0 * r * ui : 5.0 * r2 * r * ui;
    }
    // Second derivatives: e r^(e-2) delta_ij + e(e-2) r^(e-4) u_i u_j.
    if (r == 0.0) return 0.0;
    double uij;
    double delta;
    if (op.order_x == 2) {
        uij = u[0] * u[0];
        delta = 1.0;
    } else if (op.order_y == 2) {
        uij = u[1] * u[1];
        delta = 1.0;
    } else {
        uij = u[0] * u[1];
        delta = 0.0;
    }
    if (e == 3) return 3.0 * (r * delta + uij / r);
    return 5.0 * r2 * r * delta + 15.0 * r * uij;
}

// L applied to the monomial x^ax y^ay, evaluated at u.
double monomial_apply(const DiffSpec& op, int ax, int ay, const double* u, int dim) {
    auto partial = [&](int ox, int oy) -> double {
        if (ox > ax || oy > ay) return 0.0;
        double c = falling(ax, ox) * falling(ay, oy);
        double v = c * ipow(u[0], ax - ox);
        if (dim == 2) v *= ipow(u[1], ay - oy);
        return v;
    };
    if (op.kind == DiffSpec::Kind::Laplacian) {
        if (dim == 1) return partial(2, 0);
        return partial(2, 0) + partial(0, 2);
    }
    return partial(op.order_x, op.order_y);
}

long binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

struct StencilScaling {
    double scale;
    Eigen::VectorXd shift;
};

StencilScaling stencil_scaling(const Eigen::MatrixXd& pts) {
    const int d = static_cast<int>(pts.cols());
    Eigen::VectorXd lo = pts.colwise().minCoeff();
    Eigen::VectorXd hi = pts.colwise().maxCoeff();
    StencilScaling s;
    s.shift = 0.5 * (lo + hi);
    s.scale = 0.0;
    for (int a = 0; a < d; ++a) s.scale = std::max(s.scale, 0.5 * (hi[a] - lo[a]));
    return s;
}

// Assembles and factorizes the augmented PHS + monomial matrix for one
// stencil; raises StencilSingularError on a bad condition estimate.
std::shared_ptr<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>> factorize_stencil(
    const Eigen::MatrixXd& scaled, const std::vector<std::array<int, 2>>& exps,
    int phs_exponent, int center_index) {
    const int n = static_cast<int>(scaled.rows());
    const int m = static_cast<int>(exps.size());
    const int d = static_cast<int>(scaled.cols());
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double r = (scaled.row(i) - scaled.row(j)).norm();
            double v = phs_exponent == 3 ? r * r * r : r * r * r * r * r;
            aug(i, j) = v;
            aug(j, i) = v;
        }
        for (int l = 0; l < m; ++l) {
            double v = ipow(scaled(i, 0), exps[static_cast<size_t>(l)][0]);
            if (d == 2) v *= ipow(scaled(i, 1), exps[static_cast<size_t>(l)][1]);
            aug(i, n + l) = v;
            aug(n + l, i) = v;
        }
    }
    auto qr = std::make_shared<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>>(aug);
    const auto& diag = qr->matrixQR().diagonal();
    double dmin = diag.cwiseAbs().minCoeff();
    double dmax = diag.cwiseAbs().maxCoeff();
    if (!(dmin > 0.0) || dmax / dmin > 1e14)
        throw StencilSingularError(center_index,
                                   "stencil " + std::to_string(center_index) +
                                       ": augmented matrix singular (cond estimate " +
                                       (dmin > 0.0 ? std::to_string(dmax / dmin) : "inf") + ")");
    return qr;
}

void validate_config(const StencilConfig& cfg, int dim) {
    if (dim != 1 && dim != 2) throw ParameterError("stencil config: dim must be 1 or 2");
    if (cfg.poly_degree < 0) throw ParameterError("stencil config: poly_degree must be >= 0");
    if (cfg.phs_exponent != 3 && cfg.phs_exponent != 5)
        throw ParameterError("stencil config: phs_exponent must be 3 or 5");
    int base = stencil_size(cfg.poly_degree, dim);
    if (cfg.stencil_size < base)
        throw ParameterError("stencil config: stencil_size " + std::to_string(cfg.stencil_size) +
                             " below minimum " + std::to_string(base));
}

}  // namespace

NodeSet::NodeSet(Eigen::MatrixXd points) : pts_(std::move(points)) {
    if (pts_.rows() == 0) return;
    if (pts_.cols() != 1 && pts_.cols() != 2)
        throw ParameterError("node set: dimension must be 1 or 2");
    if (!pts_.allFinite()) throw ParameterError("node set: non-finite coordinate");
    // Coincident points have pairwise distance zero, i.e. identical rows.
    std::vector<int> idx(static_cast<size_t>(pts_.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    const int d = dim();
    std::sort(idx.begin(), idx.end(), [this, d](int a, int b) {
        for (int c = 0; c < d; ++c) {
            if (pts_(a, c) != pts_(b, c)) return pts_(a, c) < pts_(b, c);
        }
        return false;
    });
    for (size_t i = 1; i < idx.size(); ++i) {
        if (pts_.row(idx[i - 1]) == pts_.row(idx[i]))
            throw ParameterError("node set: coincident points at indices " +
                                 std::to_string(idx[i - 1]) + " and " + std::to_string(idx[i]));
    }
}

NodeSet NodeSet::from_1d(const Eigen::VectorXd& xs) {
    Eigen::MatrixXd m(xs.size(), 1);
    m.col(0) = xs;
    return NodeSet(std::move(m));
}

int stencil_size(int poly_degree, int dim) {
    if (poly_degree < 0) throw ParameterError("stencil_size: poly_degree must be >= 0");
    if (dim != 1 && dim != 2) throw ParameterError("stencil_size: dim must be 1 or 2");
    return static_cast<int>(2 * binom(poly_degree + dim, dim));
}

int monomial_count(int poly_degree, int dim) {
    return static_cast<int>(binom(poly_degree + dim, dim));
}

std::vector<std::array<int, 2>> monomial_exponents(int poly_degree, int dim) {
    std::vector<std::array<int, 2>> exps;
    if (dim == 1) {
        for (int a = 0; a <= poly_degree; ++a) exps.push_back({a, 0});
        return exps;
    }
    for (int total = 0; total <= poly_degree; ++total)
        for (int ax = total; ax >= 0; --ax) exps.push_back({ax, total - ax});
    return exps;
}

StencilConfig StencilConfig::make(int poly_degree, int dim, int phs_exponent,
                                  int stencil_override) {
    StencilConfig cfg;
    cfg.poly_degree = poly_degree;
    cfg.phs_exponent = phs_exponent;
    cfg.stencil_size =
        stencil_override > 0 ? stencil_override : meshless::stencil_size(poly_degree, dim);
    validate_config(cfg, dim);
    return cfg;
}

std::vector<std::vector<int>> knn(const NodeSet& base, const NodeSet& queries, int k) {
    if (k > base.size())
        throw SizeError("knn: k = " + std::to_string(k) + " exceeds base size " +
                        std::to_string(base.size()));
    KdTree tree(base.points());
    std::vector<std::vector<int>> result(static_cast<size_t>(queries.size()));
    const auto& q = queries.points();
    parallel_for_chunks(queries.size(), [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
        std::vector<double> d2;
        double buf[2];
        for (std::ptrdiff_t i = begin; i < end; ++i) {
            for (int a = 0; a < queries.dim(); ++a) buf[a] = q(i, a);
            tree.query(buf, k, result[static_cast<size_t>(i)], d2);
        }
    });
    return result;
}

std::vector<Stencil> build_stencils(const NodeSet& nodes, const StencilConfig& cfg) {
    validate_config(cfg, nodes.dim());
    const int n = cfg.stencil_size;
    if (nodes.size() < n)
        throw SizeError("build_stencils: need at least " + std::to_string(n) + " nodes, have " +
                        std::to_string(nodes.size()));
    auto neighborhoods = knn(nodes, nodes, n);
    auto exps = monomial_exponents(cfg.poly_degree, nodes.dim());
    std::vector<Stencil> stencils(static_cast<size_t>(nodes.size()));
    parallel_for(nodes.size(), [&](std::ptrdiff_t k) {
        Stencil& st = stencils[static_cast<size_t>(k)];
        st.center_index = static_cast<int>(k);
        st.neighbor_indices = neighborhoods[static_cast<size_t>(k)];
        Eigen::MatrixXd pts(n, nodes.dim());
        for (int j = 0; j < n; ++j) pts.row(j) = nodes.points().row(st.neighbor_indices[j]);
        auto scaling = stencil_scaling(pts);
        st.scale = scaling.scale;
        st.shift = scaling.shift;
        st.scaled_points = (pts.rowwise() - scaling.shift.transpose()) / scaling.scale;
        st.factorization = factorize_stencil(st.scaled_points, exps, cfg.phs_exponent,
                                             st.center_index);
    });
    return stencils;
}

Eigen::VectorXd local_weights(const Stencil& stencil, const Eigen::VectorXd& eval_point,
                              const DiffSpec& op, const StencilConfig& cfg) {
    const int n = static_cast<int>(stencil.scaled_points.rows());
    const int d = static_cast<int>(stencil.scaled_points.cols());
    auto exps = monomial_exponents(cfg.poly_degree, d);
    const int m = static_cast<int>(exps.size());
    Eigen::VectorXd scaled = (eval_point - stencil.shift) / stencil.scale;
    Eigen::VectorXd b(n + m);
    double u[2] = {0.0, 0.0};
    for (int j = 0; j < n; ++j) {
        for (int a = 0; a < d; ++a) u[a] = scaled[a] - stencil.scaled_points(j, a);
        b[j] = phs_apply(op, u, d, cfg.phs_exponent);
    }
    for (int a = 0; a < d; ++a) u[a] = scaled[a];
    for (int l = 0; l < m; ++l)
        b[n + l] = monomial_apply(op, exps[static_cast<size_t>(l)][0],
                                  exps[static_cast<size_t>(l)][1], u, d);
    Eigen::VectorXd w = stencil.factorization->solve(b).head(n);
    w *= std::pow(stencil.scale, -op.total_order());
    return w;
}

SparseOperator::SparseOperator(long rows, long cols, int row_width)
    : weights_(Eigen::MatrixXd::Zero(rows, row_width)),
      columns_(Eigen::MatrixXi::Zero(rows, row_width)),
      nearest_center_(static_cast<size_t>(rows), -1),
      cols_(cols) {}

void SparseOperator::set_row(long row, int center, const int* cols, const double* w) {
    for (int j = 0; j < row_width(); ++j) {
        columns_(row, j) = cols[j];
        weights_(row, j) = w[j];
    }
    nearest_center_[static_cast<size_t>(row)] = center;
}

Eigen::VectorXd SparseOperator::apply(const Eigen::VectorXd& nodal) const {
    if (nodal.size() != cols_) throw SizeError("sparse operator: nodal vector length mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(rows());
    for (long r = 0; r < rows(); ++r) {
        double acc = 0.0;
        for (int j = 0; j < row_width(); ++j) acc += weights_(r, j) * nodal[columns_(r, j)];
        out[r] = acc;
    }
    return out;
}

Eigen::SparseMatrix<double> SparseOperator::to_sparse() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(rows()) * static_cast<size_t>(row_width()));
    for (long r = 0; r < rows(); ++r)
        for (int j = 0; j < row_width(); ++j)
            trips.emplace_back(static_cast<int>(r), columns_(r, j), weights_(r, j));
    Eigen::SparseMatrix<double> sp(rows(), cols());
    sp.setFromTriplets(trips.begin(), trips.end());
    return sp;
}

void compute_operator_rows(const NodeSet& nodes, const NodeSet& eval_points,
                           const StencilConfig& cfg, std::span<const DiffSpec> ops,
                           const RowSink& sink) {
    auto kappa_lists = knn(nodes, eval_points, 1);
    std::vector<int> kappa(static_cast<size_t>(eval_points.size()));
    for (size_t i = 0; i < kappa.size(); ++i) kappa[i] = kappa_lists[i][0];
    compute_operator_rows(nodes, eval_points, cfg, ops, kappa, sink);
}

void compute_operator_rows(const NodeSet& nodes, const NodeSet& eval_points,
                           const StencilConfig& cfg, std::span<const DiffSpec> ops,
                           const std::vector<int>& kappa, const RowSink& sink) {
    validate_config(cfg, nodes.dim());
    const int n = cfg.stencil_size;
    const int d = nodes.dim();
    const long num_nodes = nodes.size();
    const long num_evals = eval_points.size();
    if (num_nodes < n)
        throw SizeError("operator assembly: need at least " + std::to_string(n) + " nodes");
    if (static_cast<long>(kappa.size()) != num_evals)
        throw SizeError("operator assembly: kappa length mismatch");
    if (num_evals == 0) return;

    auto neighborhoods = knn(nodes, nodes, n);
    auto exps = monomial_exponents(cfg.poly_degree, d);
    const int m = static_cast<int>(exps.size());
    const int nops = static_cast<int>(ops.size());

    // Bucket evaluation points by their nearest stencil center.
    std::vector<long> offsets(static_cast<size_t>(num_nodes) + 1, 0);
    for (long l = 0; l < num_evals; ++l) offsets[static_cast<size_t>(kappa[l]) + 1]++;
    for (long k = 0; k < num_nodes; ++k) offsets[k + 1] += offsets[k];
    std::vector<long> bucket(static_cast<size_t>(num_evals));
    {
        std::vector<long> cursor(offsets.begin(), offsets.end() - 1);
        for (long l = 0; l < num_evals; ++l)
            bucket[static_cast<size_t>(cursor[static_cast<size_t>(kappa[l])]++)] = l;
    }

    // Centers with work, processed in parallel; every evaluation row is owned
    // by exactly one stencil so sinks never race.
    std::vector<long> active;
    active.reserve(static_cast<size_t>(num_nodes));
    for (long k = 0; k < num_nodes; ++k)
        if (offsets[k + 1] > offsets[k]) active.push_back(k);

    parallel_for_chunks(static_cast<std::ptrdiff_t>(active.size()),
                        [&](std::ptrdiff_t cbegin, std::ptrdiff_t cend) {
        Eigen::MatrixXd pts(n, d);
        std::vector<int> perm(static_cast<size_t>(n));
        std::vector<int> sorted_cols(static_cast<size_t>(n));
        std::vector<double> row(static_cast<size_t>(n));
        double u[2];
        for (std::ptrdiff_t c = cbegin; c < cend; ++c) {
            const long k = active[static_cast<size_t>(c)];
            const auto& nbrs = neighborhoods[static_cast<size_t>(k)];
            for (int j = 0; j < n; ++j) pts.row(j) = nodes.points().row(nbrs[j]);
            auto scaling = stencil_scaling(pts);
            Eigen::MatrixXd scaled =
                (pts.rowwise() - scaling.shift.transpose()) / scaling.scale;
            auto qr = factorize_stencil(scaled, exps, cfg.phs_exponent, static_cast<int>(k));

            std::iota(perm.begin(), perm.end(), 0);
            std::sort(perm.begin(), perm.end(),
                      [&nbrs](int a, int b) { return nbrs[a] < nbrs[b]; });
            for (int j = 0; j < n; ++j) sorted_cols[static_cast<size_t>(j)] = nbrs[perm[j]];

            const long ebegin = offsets[static_cast<size_t>(k)];
            const long eend = offsets[static_cast<size_t>(k) + 1];
            const int ne = static_cast<int>(eend - ebegin);
            Eigen::MatrixXd rhs(n + m, static_cast<long>(ne) * nops);
            for (int a = 0; a < ne; ++a) {
                const long l = bucket[static_cast<size_t>(ebegin + a)];
                double sq[2];
                for (int ax = 0; ax < d; ++ax)
                    sq[ax] = (eval_points.points()(l, ax) - scaling.shift[ax]) / scaling.scale;
                for (int oi = 0; oi < nops; ++oi) {
                    const long col = static_cast<long>(a) * nops + oi;
                    for (int j = 0; j < n; ++j) {
                        for (int ax = 0; ax < d; ++ax) u[ax] = sq[ax] - scaled(j, ax);
                        rhs(j, col) = phs_apply(ops[oi], u, d, cfg.phs_exponent);
                    }
                    for (int l2 = 0; l2 < m; ++l2)
                        rhs(n + l2, col) =
                            monomial_apply(ops[oi], exps[static_cast<size_t>(l2)][0],
                                           exps[static_cast<size_t>(l2)][1], sq, d);
                }
            }
            Eigen::MatrixXd sol = qr->solve(rhs);
            for (int a = 0; a < ne; ++a) {
                const long l = bucket[static_cast<size_t>(ebegin + a)];
                for (int oi = 0; oi < nops; ++oi) {
                    const double rescale = std::pow(scaling.scale, -ops[oi].total_order());
                    const long col = static_cast<long>(a) * nops + oi;
                    for (int j = 0; j < n; ++j)
                        row[static_cast<size_t>(j)] = sol(perm[j], col) * rescale;
                    sink(l, oi, sorted_cols.data(), row.data(), n);
                }
            }
        }
    });
}

SparseOperator assemble_operator(const NodeSet& nodes, const NodeSet& eval_points,
                                 const StencilConfig& cfg, const DiffSpec& op) {
    auto kappa_lists = knn(nodes, eval_points, 1);
    std::vector<int> kappa(static_cast<size_t>(eval_points.size()));
    for (size_t i = 0; i < kappa.size(); ++i) kappa[i] = kappa_lists[i][0];
    SparseOperator result(eval_points.size(), nodes.size(), cfg.stencil_size);
    DiffSpec ops[1] = {op};
    compute_operator_rows(nodes, eval_points, cfg, ops, kappa,
                          [&](long l, int, const int* cols, const double* w, int n) {
                              result.set_row(l, kappa[static_cast<size_t>(l)], cols, w);
                              (void)n;
                          });
    return result;
}

}  // namespace meshless
