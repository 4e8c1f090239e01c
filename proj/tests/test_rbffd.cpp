#include "meshless/rbffd.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace meshless;

TEST_CASE("stencil size formula") {
    CHECK(stencil_size(2, 2) == 12);
    CHECK(stencil_size(0, 1) == 2);
    CHECK(stencil_size(5, 2) == 42);
    CHECK(stencil_size(6, 1) == 14);
    CHECK_THROWS_AS(stencil_size(-1, 2), ParameterError);
    CHECK_THROWS_AS(stencil_size(2, 3), ParameterError);
}

TEST_CASE("stencil config override must not shrink") {
    auto cfg = StencilConfig::make(6, 1, 5, 28);
    CHECK(cfg.stencil_size == 28);
    CHECK_THROWS_AS(StencilConfig::make(6, 1, 5, 10), ParameterError);
    CHECK_THROWS_AS(StencilConfig::make(2, 2, 4), ParameterError);
}

TEST_CASE("node set rejects duplicates and non-finite input") {
    Eigen::MatrixXd pts(3, 2);
    pts << 0, 0, 1, 1, 0, 0;
    CHECK_THROWS_AS(NodeSet{pts}, ParameterError);
    Eigen::MatrixXd bad(1, 2);
    bad << std::nan(""), 0;
    CHECK_THROWS_AS(NodeSet{bad}, ParameterError);
}

TEST_CASE("knn on a line") {
    Eigen::VectorXd base(3);
    base << 0, 1, 2;
    auto nodes = NodeSet::from_1d(base);
    Eigen::VectorXd q(1);
    q << 0.6;
    auto result = knn(nodes, NodeSet::from_1d(q), 2);
    REQUIRE(result.size() == 1);
    CHECK(result[0] == std::vector<int>{1, 0});
}

TEST_CASE("knn coincident query") {
    Eigen::VectorXd base(3);
    base << 0, 1, 2;
    auto nodes = NodeSet::from_1d(base);
    Eigen::VectorXd q(1);
    q << 1.0;
    auto result = knn(nodes, NodeSet::from_1d(q), 1);
    CHECK(result[0] == std::vector<int>{1});
}

TEST_CASE("knn tie order by index") {
    Eigen::MatrixXd corners(4, 2);
    corners << 0, 0, 1, 0, 1, 1, 0, 1;
    Eigen::MatrixXd center(1, 2);
    center << 0.5, 0.5;
    auto result = knn(NodeSet(corners), NodeSet(center), 4);
    CHECK(result[0] == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("knn rejects k beyond base size") {
    Eigen::VectorXd base(2);
    base << 0, 1;
    auto nodes = NodeSet::from_1d(base);
    CHECK_THROWS_AS(knn(nodes, nodes, 3), SizeError);
}

TEST_CASE("stencils on four collinear nodes") {
    Eigen::VectorXd xs(4);
    xs << 0, 1, 2, 3;
    auto nodes = NodeSet::from_1d(xs);
    auto cfg = StencilConfig::make(1, 1);
    REQUIRE(cfg.stencil_size == 4);
    auto stencils = build_stencils(nodes, cfg);
    REQUIRE(stencils.size() == 4);
    for (const auto& st : stencils) {
        CHECK(st.neighbor_indices[0] == st.center_index);
        std::vector<int> sorted = st.neighbor_indices;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == std::vector<int>{0, 1, 2, 3});
        CHECK(st.scale == doctest::Approx(1.5));
        CHECK(st.scaled_points.minCoeff() == doctest::Approx(-1.0));
        CHECK(st.scaled_points.maxCoeff() == doctest::Approx(1.0));
    }
}

TEST_CASE("identity weights are cardinal at stencil nodes and sum to one") {
    auto nodes = test::quasi_uniform(6, 2, 99);
    auto cfg = StencilConfig::make(2, 2);
    auto stencils = build_stencils(nodes, cfg);
    const auto& st = stencils[7];
    // At a stencil node the interpolant reproduces that node's value.
    Eigen::VectorXd at_node = nodes.points().row(st.neighbor_indices[3]).transpose();
    auto w = local_weights(st, at_node, DiffSpec::identity(), cfg);
    for (int j = 0; j < cfg.stencil_size; ++j)
        CHECK(w[j] == doctest::Approx(j == 3 ? 1.0 : 0.0).epsilon(1e-9));
    // Anywhere else the weights sum to one (constant reproduction).
    Eigen::VectorXd y(2);
    y << 0.43, 0.57;
    auto w2 = local_weights(st, y, DiffSpec::identity(), cfg);
    CHECK(w2.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("derivative weights of a linear function") {
    Eigen::VectorXd xs(4);
    xs << 0, 1, 2, 3;
    auto nodes = NodeSet::from_1d(xs);
    auto cfg = StencilConfig::make(1, 1);
    auto stencils = build_stencils(nodes, cfg);
    Eigen::VectorXd f = xs;  // f(x) = x
    for (double t : {0.3, 1.4, 2.9}) {
        Eigen::VectorXd y(1);
        y << t;
        auto w = local_weights(stencils[1], y, DiffSpec::derivative(1), cfg);
        double df = 0;
        for (int j = 0; j < 4; ++j) df += w[j] * f[stencils[1].neighbor_indices[j]];
        CHECK(df == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("assembled identity operator acts as identity on the nodes") {
    auto nodes = test::quasi_uniform(5, 2, 17);
    auto cfg = StencilConfig::make(2, 2);
    auto op = assemble_operator(nodes, nodes, cfg, DiffSpec::identity());
    Eigen::VectorXd f(nodes.size());
    for (long i = 0; i < nodes.size(); ++i)
        f[i] = std::sin(nodes.points()(i, 0)) + nodes.points()(i, 1);
    Eigen::VectorXd g = op.apply(f);
    CHECK((g - f).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("identity operator reproduces monomials") {
    auto nodes = test::quasi_uniform(8, 2, 3);
    auto evals = test::random_interior(60, 2, 4);
    auto cfg = StencilConfig::make(3, 2);
    auto op = assemble_operator(nodes, evals, cfg, DiffSpec::identity());
    for (auto [ax, ay] : monomial_exponents(3, 2)) {
        Eigen::VectorXd fx(nodes.size()), fy(evals.size());
        for (long i = 0; i < nodes.size(); ++i)
            fx[i] = std::pow(nodes.points()(i, 0), ax) * std::pow(nodes.points()(i, 1), ay);
        for (long i = 0; i < evals.size(); ++i)
            fy[i] = std::pow(evals.points()(i, 0), ax) * std::pow(evals.points()(i, 1), ay);
        double err = (op.apply(fx) - fy).lpNorm<Eigen::Infinity>();
        CHECK(err <= 1e-8 * std::max(1.0, fy.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("laplacian of x^2 + y^2 is 4") {
    auto nodes = test::quasi_uniform(9, 2, 11);
    auto evals = test::random_interior(80, 2, 12);
    auto cfg = StencilConfig::make(3, 2);
    auto op = assemble_operator(nodes, evals, cfg, DiffSpec::laplacian());
    Eigen::VectorXd f(nodes.size());
    for (long i = 0; i < nodes.size(); ++i)
        f[i] = nodes.points().row(i).squaredNorm();
    Eigen::VectorXd lap = op.apply(f);
    for (long i = 0; i < evals.size(); ++i)
        CHECK(lap[i] == doctest::Approx(4.0).epsilon(1e-7));
}

namespace {

double apply_op_to_monomial(const DiffSpec& op, int ax, int ay, double x, double y) {
    auto part = [&](int ox, int oy) {
        if (ox > ax || oy > ay) return 0.0;
        double c = 1;
        for (int i = 0; i < ox; ++i) c *= ax - i;
        for (int i = 0; i < oy; ++i) c *= ay - i;
        return c * std::pow(x, ax - ox) * std::pow(y, ay - oy);
    };
    if (op.kind == DiffSpec::Kind::Laplacian) return part(2, 0) + part(0, 2);
    return part(op.order_x, op.order_y);
}

}  // namespace

TEST_CASE("polynomial reproduction property across operators and degrees") {
    for (int p : {2, 3, 4}) {
        // 2D: all supported operators.
        {
            auto cfg = StencilConfig::make(p, 2);
            int side = std::max(8, static_cast<int>(std::ceil(std::sqrt(4.0 * cfg.stencil_size))) + 2);
            auto nodes = test::quasi_uniform(side, 2, 100 + p);
            auto evals = test::random_interior(40, 2, 200 + p);
            std::vector<DiffSpec> ops = {DiffSpec::identity(), DiffSpec::d1(),  DiffSpec::d2(),
                                         DiffSpec::d11(),      DiffSpec::d22(), DiffSpec::d12(),
                                         DiffSpec::laplacian()};
            for (const auto& op : ops) {
                auto D = assemble_operator(nodes, evals, cfg, op);
                for (auto [ax, ay] : monomial_exponents(p, 2)) {
                    Eigen::VectorXd fx(nodes.size()), fy(evals.size());
                    for (long i = 0; i < nodes.size(); ++i)
                        fx[i] = std::pow(nodes.points()(i, 0), ax) *
                                std::pow(nodes.points()(i, 1), ay);
                    for (long i = 0; i < evals.size(); ++i)
                        fy[i] = apply_op_to_monomial(op, ax, ay, evals.points()(i, 0),
                                                     evals.points()(i, 1));
                    double err = (D.apply(fx) - fy).lpNorm<Eigen::Infinity>();
                    CHECK(err <= 1e-7 * std::max(1.0, fy.lpNorm<Eigen::Infinity>()));
                }
            }
        }
        // 1D: derivatives up to p-1 with the quintic basis used for smoothing.
        {
            auto cfg = StencilConfig::make(p, 1, 5);
            auto nodes = test::quasi_uniform(std::max(4 * cfg.stencil_size, 24), 1, 300 + p);
            auto evals = test::random_interior(40, 1, 400 + p);
            for (int s = 0; s < p; ++s) {
                auto D = assemble_operator(nodes, evals, cfg, DiffSpec::derivative(s));
                for (int a = 0; a <= p; ++a) {
                    Eigen::VectorXd fx(nodes.size()), fy(evals.size());
                    for (long i = 0; i < nodes.size(); ++i) fx[i] = std::pow(nodes.points()(i, 0), a);
                    for (long i = 0; i < evals.size(); ++i)
                        fy[i] = apply_op_to_monomial(DiffSpec::derivative(s), a, 0,
                                                     evals.points()(i, 0), 1.0);
                    double err = (D.apply(fx) - fy).lpNorm<Eigen::Infinity>();
                    CHECK(err <= 1e-7 * std::max(1.0, fy.lpNorm<Eigen::Infinity>()));
                }
            }
        }
    }
}

TEST_CASE("evaluation rows sum to one") {
    auto nodes = test::quasi_uniform(7, 2, 5);
    auto evals = test::random_interior(50, 2, 6);
    auto cfg = StencilConfig::make(2, 2);
    auto op = assemble_operator(nodes, evals, cfg, DiffSpec::identity());
    for (long r = 0; r < op.rows(); ++r)
        CHECK(std::abs(op.weights().row(r).sum() - 1.0) <= 1e-10);
}

TEST_CASE("operators are deterministic") {
    auto nodes = test::quasi_uniform(7, 2, 21);
    auto evals = test::random_interior(30, 2, 22);
    auto cfg = StencilConfig::make(3, 2);
    auto a = assemble_operator(nodes, evals, cfg, DiffSpec::d12());
    auto b = assemble_operator(nodes, evals, cfg, DiffSpec::d12());
    CHECK(a.weights() == b.weights());
    CHECK(a.columns() == b.columns());
    CHECK(a.nearest_center() == b.nearest_center());
}

TEST_CASE("row locality follows the nearest stencil") {
    auto nodes = test::quasi_uniform(7, 2, 31);
    auto evals = test::random_interior(25, 2, 32);
    auto cfg = StencilConfig::make(2, 2);
    auto op = assemble_operator(nodes, evals, cfg, DiffSpec::identity());
    auto neighborhoods = knn(nodes, nodes, cfg.stencil_size);
    for (long r = 0; r < op.rows(); ++r) {
        int center = op.nearest_center()[static_cast<size_t>(r)];
        std::vector<int> expected = neighborhoods[static_cast<size_t>(center)];
        std::sort(expected.begin(), expected.end());
        std::vector<int> got(op.columns().row(r).begin(), op.columns().row(r).end());
        CHECK(got == expected);
    }
}

TEST_CASE("degenerate stencil raises with center index") {
    // Nodes on a perfect line cannot support a 2D quadratic basis.
    Eigen::MatrixXd pts(12, 2);
    for (int i = 0; i < 12; ++i) {
        pts(i, 0) = i * 0.1;
        pts(i, 1) = 0.0;
    }
    auto nodes = NodeSet(pts);
    auto cfg = StencilConfig::make(2, 2);
    CHECK_THROWS_AS(build_stencils(nodes, cfg), StencilSingularError);
}
