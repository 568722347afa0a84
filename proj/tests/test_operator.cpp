#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "foliage/operator.hpp"

using namespace foliage;

namespace {

Vector pt(std::initializer_list<double> v) { return to_vector(std::vector<double>(v)); }

OperatorTerm term(std::vector<int> s, Expression re) {
    OperatorTerm t;
    t.s = std::move(s);
    t.re = std::move(re);
    return t;
}

// Laplacian with extra lower-order terms, q = 2
BasicOperator lap2_with(std::vector<OperatorTerm> extra) {
    std::vector<OperatorTerm> terms = {term({2, 0}, lit(1.0)), term({0, 2}, lit(1.0))};
    for (auto& t : extra) terms.push_back(std::move(t));
    return BasicOperator::make(2, 2, std::move(terms));
}

BasicOperator wave_operator() {
    return BasicOperator::make(2, 2, {term({2, 0}, lit(1.0)), term({0, 2}, lit(-1.0))});
}

}  // namespace

TEST_CASE("operator construction enforces its invariants") {
    CHECK_THROWS_AS(BasicOperator::make(2, 1, {term({1, 0}, lit(1.0))}), ParameterOutOfRange);
    CHECK_THROWS_AS(BasicOperator::make(2, 2, {term({2, 0}, lit(0.0))}), ParameterOutOfRange);
    CHECK_THROWS_AS(BasicOperator::make(2, 2, {term({2, 0}, lit(1.0)), term({2, 0}, lit(2.0))}),
                    ParameterOutOfRange);
    CHECK_THROWS_AS(BasicOperator::make(2, 2, {term({2, 0}, coord(2))}), UnboundCoordinate);
    CHECK_NOTHROW(laplacian(3));
}

TEST_CASE("operator application over multi-index parts") {
    // first-order part applied through a second-order operator
    const BasicOperator p = lap2_with({term({1, 0}, lit(1.0))});
    const Expression f = pow(coord(0), 2);
    CHECK(eval(apply_operator(p, f, OperatorPart::OrderOne).re, pt({1.5, 0.0})) == Approx(3.0));

    // Laplacian of y1^2 y2
    const Expression g = pow(coord(0), 2) * coord(1);
    const ComplexExpression lap_g = apply_operator(laplacian(2), g);
    CHECK(eval(lap_g.re, pt({0.7, -0.3})) == Approx(2.0 * -0.3));
    CHECK(is_const_value(lap_g.im, 0.0));

    // zero-order isolation: full picks up a0, order >= 1 drops it
    const BasicOperator witha0 = lap2_with({term({0, 0}, coord(0))});
    const ComplexExpression full = apply_operator(witha0, lit(1.0), OperatorPart::Full);
    const ComplexExpression upper = apply_operator(witha0, lit(1.0), OperatorPart::OrderGeOne);
    CHECK(eval(full.re, pt({0.4, 0.9})) == Approx(0.4));
    CHECK(is_const_value(upper.re, 0.0));
}

TEST_CASE("principal symbol: displayed polynomial") {
    // d^2/dy1^2 + 2 d^2/dy1 dy2 + 3 d^2/dy2^2 at xi = (1, 1)
    const BasicOperator p = BasicOperator::make(
        2, 2, {term({2, 0}, lit(1.0)), term({1, 1}, lit(2.0)), term({0, 2}, lit(3.0))});
    CHECK(principal_symbol(p, pt({0.0, 0.0}), pt({1.0, 1.0})).real() == Approx(6.0));
    // zero covector gives zero by homogeneity
    CHECK(std::abs(principal_symbol(p, pt({0.2, 0.1}), pt({0.0, 0.0}))) == 0.0);
}

TEST_CASE("both symbol formulas agree") {
    // the worked case: Laplacian at xi = (3, 4)
    const BasicOperator lap = laplacian(2);
    const Vector z = pt({0.3, -0.2});
    const Vector xi = pt({3.0, 4.0});
    CHECK(principal_symbol(lap, z, xi).real() == Approx(25.0));
    CHECK(principal_symbol_via_function(lap, z, xi).real() == Approx(25.0).epsilon(1e-12));

    // property: random operators with variable coefficients, random (z, xi)
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const std::vector<BasicOperator> ops = {
        lap2_with({term({1, 1}, sin(coord(1)))}),
        BasicOperator::make(2, 2,
                            {term({2, 0}, lit(1.0) + pow(coord(0), 2)), term({0, 2}, lit(1.0)),
                             term({1, 1}, cos(coord(0)) * coord(1))}),
        BasicOperator::make(2, 3, {term({3, 0}, lit(1.0)), term({1, 2}, coord(1)),
                                   term({2, 0}, coord(0) * coord(1))}),
    };
    for (const auto& p : ops) {
        for (int i = 0; i < 100; ++i) {
            const Vector z2 = pt({0.5 * u(rng), 0.5 * u(rng)});
            const Vector xi2 = pt({u(rng), u(rng)});
            const Complex a = principal_symbol(p, z2, xi2);
            const Complex b = principal_symbol_via_function(p, z2, xi2);
            REQUIRE(std::abs(a - b) < 1e-9 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("symbol homogeneity of degree m") {
    const BasicOperator p = lap2_with({term({1, 1}, sin(coord(1)))});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        const Vector z = pt({0.4 * u(rng), 0.4 * u(rng)});
        const Vector xi = pt({u(rng), u(rng)});
        const double t = 0.5 + std::abs(u(rng));
        const Complex lhs = principal_symbol(p, z, t * xi);
        const Complex rhs = std::pow(t, p.m()) * principal_symbol(p, z, xi);
        REQUIRE(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("transverse ellipticity certificates") {
    const Box region = Box::cube(2, 1.0);
    CHECK(check_transverse_ellipticity(laplacian(2), region, 7, 32).elliptic);

    // the wave operator vanishes on the light cone |xi1| = |xi2|
    const auto wave = check_transverse_ellipticity(wave_operator(), region, 5, 32);
    CHECK_FALSE(wave.elliptic);
    REQUIRE(wave.witness_xi.size() == 2);
    CHECK(std::abs(std::abs(wave.witness_xi(0)) - std::abs(wave.witness_xi(1))) < 1e-9);

    // (1 + y1^2) d^2/dy1^2 + d^2/dy2^2: elliptic by a brute-force sweep
    const BasicOperator var = BasicOperator::make(
        2, 2, {term({2, 0}, lit(1.0) + pow(coord(0), 2)), term({0, 2}, lit(1.0))});
    const auto res = check_transverse_ellipticity(var, region, 9, 24);
    CHECK(res.elliptic);
    CHECK(res.min_abs_symbol >= 1.0 - 1e-9);  // symbol >= |xi|^2 = 1 on the sphere
}

TEST_CASE("eigenvalue route agrees with the sampled certificate for order 2") {
    const Vector z = pt({0.1, -0.2});
    CHECK(ellipticity_by_eigenvalues(laplacian(2), z).first);
    CHECK_FALSE(ellipticity_by_eigenvalues(wave_operator(), z).first);
    // mixed-term SPD form: symbol xi1^2 + xi1 xi2 + xi2^2
    const BasicOperator mixed = BasicOperator::make(
        2, 2, {term({2, 0}, lit(1.0)), term({1, 1}, lit(1.0)), term({0, 2}, lit(1.0))});
    CHECK(ellipticity_by_eigenvalues(mixed, z).first);
    CHECK(check_transverse_ellipticity(mixed, Box::cube(2, 1.0), 5, 32).elliptic);
}

TEST_CASE("one-part matrix and triangularity verdicts") {
    // a = (-y2, y1): the rotation field, non-triangular
    const BasicOperator rot = lap2_with({term({1, 0}, lit(0.0) - coord(1)), term({0, 1}, coord(0))});
    const Matrix a = one_part_matrix(rot, pt({0.3, 0.4}));
    CHECK(a(0, 0) == Approx(0.0).margin(1e-15));
    CHECK(a(0, 1) == Approx(-1.0));
    CHECK(a(1, 0) == Approx(1.0));
    CHECK(a(1, 1) == Approx(0.0).margin(1e-15));
    CHECK(one_part_verdict(rot, Box::cube(2, 1.0), 5) == TriangularVerdict::No);

    // constant coefficients: zero matrix, triangular (diagonal)
    const BasicOperator flat = lap2_with({term({1, 0}, lit(2.5)), term({0, 1}, lit(-1.0))});
    CHECK(max_abs_diff(one_part_matrix(flat, pt({0.2, 0.9})), Matrix::Zero(2, 2)) == 0.0);
    CHECK(one_part_verdict(flat, Box::cube(2, 1.0), 5) == TriangularVerdict::Diagonal);
    CHECK(is_triangular(one_part_verdict(flat, Box::cube(2, 1.0), 5)));

    // a = (y1, y1 + y2): lower triangular
    const BasicOperator lower =
        lap2_with({term({1, 0}, coord(0)), term({0, 1}, coord(0) + coord(1))});
    const Matrix al = one_part_matrix(lower, pt({0.5, 0.5}));
    CHECK(al(0, 0) == Approx(1.0));
    CHECK(al(0, 1) == Approx(0.0).margin(1e-15));
    CHECK(al(1, 0) == Approx(1.0));
    CHECK(al(1, 1) == Approx(1.0));
    CHECK(one_part_verdict(lower, Box::cube(2, 1.0), 5) == TriangularVerdict::Lower);
}

TEST_CASE("constant-coefficient detection") {
    CHECK(has_constant_coefficients(laplacian(2), Box::cube(2, 1.0)));
    const BasicOperator var = lap2_with({term({1, 0}, coord(0))});
    CHECK_FALSE(has_constant_coefficients(var, Box::cube(2, 1.0)));
}

TEST_CASE("characteristic matrix determinant of the first variation") {
    const Box b = Box::cube(2, 0.5);
    const LocalMap id = identity_map(b, "O");
    const Vector w = pt({0.1, 0.2});
    const Vector eta = pt({1.0, 0.0});

    // constant coefficients: determinant is sigma^q
    CHECK(char_matrix_det(laplacian(2), id, w, eta).real() == Approx(1.0));

    // Laplacian with the rotation 1-part: [[1, 1], [-1, 1]], det 2
    const BasicOperator rot = lap2_with({term({1, 0}, lit(0.0) - coord(1)), term({0, 1}, coord(0))});
    CHECK(char_matrix_det(rot, id, w, eta).real() == Approx(2.0));

    // eta scaling: with zero off-diagonal the determinant scales by t^(mq)
    const double t = 1.7;
    const Complex d1 = char_matrix_det(laplacian(2), id, w, eta);
    const Complex dt = char_matrix_det(laplacian(2), id, w, t * eta);
    CHECK(std::abs(dt - std::pow(t, 4) * d1) < 1e-12 * std::abs(dt));

    CHECK_THROWS_AS(char_matrix_det(laplacian(2), id, w, pt({0.0, 0.0})), ZeroCovector);
    CHECK_THROWS_AS(char_matrix_det(laplacian(2), id, pt({3.0, 3.0}), eta), DomainError);
}

TEST_CASE("zero-order parts cancel across commuting maps") {
    const Box dom = Box::cube(2, 0.3);
    // equal constants cancel exactly
    const BasicOperator pc = lap2_with({term({0, 0}, lit(2.5))});
    const LocalMap tr = translation_map(dom, pt({0.1, 0.0}), "O", "O");
    CHECK(zero_order_cancellation(pc, pc, tr, 7) == 0.0);

    // a0 = y1 under a translation by (c, 0): residual |c|
    const BasicOperator py = lap2_with({term({0, 0}, coord(0))});
    CHECK(zero_order_cancellation(py, py, tr, 7) == Approx(0.1));

    // a0 = y1^2 + y2^2 is rotation invariant
    const BasicOperator pr = lap2_with({term({0, 0}, pow(coord(0), 2) + pow(coord(1), 2))});
    const LocalMap rot = linear_map(dom, rotation2(0.8), "O", "O");
    CHECK(zero_order_cancellation(pr, pr, rot, 9) < 1e-14);
}

TEST_CASE("coordinate-change rule for the 1-part: linear maps are exact") {
    const std::array<Expression, 2> a = {lit(0.0) - coord(1), coord(0)};
    const LocalMap rot = linear_map(Box::cube(2, 0.5), rotation2(0.9), "O", "O");
    // second derivatives of a linear map vanish, so the Hessian term is 0
    CHECK(verify_coordinate_change_rule(a, rot, pt({0.2, -0.1})) < 1e-9);
}

TEST_CASE("coordinate-change rule on the quadratic example") {
    // phi(y, z) = (y + z^2, z) with a = (-z, y) at (0.3, 0.2)
    const Box dom = Box::cube(2, 0.5);
    const LocalMap phi = make_quadratic_change(1.0, 0.0, Matrix::Identity(2, 2), dom);
    const std::array<Expression, 2> a = {lit(0.0) - coord(1), coord(0)};
    CHECK(verify_coordinate_change_rule(a, phi, pt({0.3, 0.2})) < 1e-5);

    CHECK_THROWS_AS(make_quadratic_change(0.0, 0.0, Matrix::Zero(2, 2), dom), SingularJacobian);
}

TEST_CASE("no nonsingular linear-quadratic change triangularizes a = (-y2, y1) at the origin") {
    const std::array<Expression, 2> a = {lit(0.0) - coord(1), coord(0)};
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vector origin = pt({0.0, 0.0});
    int tried = 0;
    while (tried < 1000) {
        Matrix l(2, 2);
        l << u(rng), u(rng), u(rng), u(rng);
        if (std::abs(l.determinant()) < 0.2) continue;
        ++tried;
        std::vector<Expression> fwd = {
            simplify(lit(l(0, 0)) * coord(0) + lit(l(0, 1)) * coord(1) +
                     lit(u(rng)) * pow(coord(0), 2) + lit(u(rng)) * coord(0) * coord(1) +
                     lit(u(rng)) * pow(coord(1), 2)),
            simplify(lit(l(1, 0)) * coord(0) + lit(l(1, 1)) * coord(1) +
                     lit(u(rng)) * pow(coord(0), 2) + lit(u(rng)) * coord(0) * coord(1) +
                     lit(u(rng)) * pow(coord(1), 2))};
        const Matrix b = one_part_after_change(a, fwd, origin);
        REQUIRE(std::min(std::abs(b(0, 1)), std::abs(b(1, 0))) > 1e-4);
    }
}

TEST_CASE("complex coefficients flow through application and symbols") {
    // P = d^2/dy1^2 + i d^2/dy2^2 + i y1 (zero-order imaginary part)
    OperatorTerm t20 = term({2, 0}, lit(1.0));
    OperatorTerm t02 = term({0, 2}, lit(0.0));
    t02.im = lit(1.0);
    OperatorTerm t00 = term({0, 0}, lit(0.0));
    t00.im = coord(0);
    const BasicOperator p = BasicOperator::make(2, 2, {t20, t02, t00});
    CHECK_FALSE(p.is_real());

    // apply to f = y1^2 + y2^2: P f = 2 + 2i + i y1 (y1^2 + y2^2)
    const ComplexExpression pf = apply_operator(p, pow(coord(0), 2) + pow(coord(1), 2));
    const Vector y = pt({0.5, -1.0});
    const Complex v = pf.eval_at(y);
    CHECK(v.real() == Approx(2.0));
    CHECK(v.imag() == Approx(2.0 + 0.5 * 1.25));

    // the symbol xi1^2 + i xi2^2 never vanishes on the sphere
    const Complex s = principal_symbol(p, y, pt({1.0, 1.0}));
    CHECK(s.real() == Approx(1.0));
    CHECK(s.imag() == Approx(1.0));
    CHECK(check_transverse_ellipticity(p, Box::cube(2, 1.0), 5, 32).elliptic);

    // both symbol routes agree in the complex case too
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 50; ++i) {
        const Vector z = pt({0.5 * u(rng), 0.5 * u(rng)});
        const Vector xi = pt({u(rng), u(rng)});
        REQUIRE(std::abs(principal_symbol(p, z, xi) - principal_symbol_via_function(p, z, xi)) <
                1e-9);
    }

    // zero-order cancellation compares complex values
    const LocalMap tr = translation_map(Box::cube(2, 0.3), pt({0.1, 0.0}), "O", "O");
    CHECK(zero_order_cancellation(p, p, tr, 5) == Approx(0.1));

    // the triangularity check refuses complex 1-parts
    OperatorTerm t10 = term({1, 0}, lit(0.0));
    t10.im = lit(1.0);
    const BasicOperator pc = BasicOperator::make(2, 2, {term({2, 0}, lit(1.0)), t10});
    CHECK_THROWS_AS(one_part_matrix(pc, pt({0.0, 0.0})), ParameterOutOfRange);
}

TEST_CASE("symbol invariance residual for commuting pairs") {
    std::mt19937 rng(55);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    // rotations against the Laplacian
    const LocalMap rot = linear_map(Box::cube(2, 0.4), rotation2(1.1), "O", "O");
    const BasicOperator lap = laplacian(2);
    for (int i = 0; i < 200; ++i) {
        Vector y(2);
        y << 0.39 * u(rng), 0.39 * u(rng);
        const Vector z = rot.apply_unchecked(y);
        const Vector xi = pt({2.0 * u(rng), 2.0 * u(rng)});
        REQUIRE(symbol_invariance_residual(lap, lap, rot, z, xi) < 1e-9);
    }

    // translations against a constant-coefficient mixed operator
    const BasicOperator mixed = BasicOperator::make(
        2, 2, {term({2, 0}, lit(2.0)), term({1, 1}, lit(0.5)), term({0, 2}, lit(1.5))});
    const LocalMap tr = translation_map(Box::cube(2, 0.3), pt({0.12, -0.07}), "O", "O");
    for (int i = 0; i < 200; ++i) {
        Vector y(2);
        y << 0.29 * u(rng), 0.29 * u(rng);
        const Vector z = tr.apply_unchecked(y);
        const Vector xi = pt({2.0 * u(rng), 2.0 * u(rng)});
        REQUIRE(symbol_invariance_residual(mixed, mixed, tr, z, xi) < 1e-9);
    }

    // a scaling map does NOT preserve the symbol
    const Matrix two = 2.0 * Matrix::Identity(2, 2);
    const LocalMap scale = linear_map(Box::cube(2, 0.3), two, "O", "O");
    const Vector z = scale.apply_unchecked(pt({0.1, 0.1}));
    CHECK(symbol_invariance_residual(lap, lap, scale, z, pt({1.0, 0.0})) > 1.0);
}
