#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "xfid/errors.hpp"
#include "xfid/expr.hpp"

using namespace xfid;

namespace {

// x0 + exp(x3) + log(x0*x3) + x3/x0 over d=4 (features 0 and 3 used).
AdditiveModel four_effect_model() {
    AdditiveModel m;
    m.d = 4;
    m.effects.push_back(make_effect(leaf(0)));
    m.effects.push_back(make_effect(apply(OpCode::Exp, leaf(3))));
    m.effects.push_back(make_effect(apply(OpCode::Log, apply(OpCode::Mul, leaf(0), leaf(3)))));
    m.effects.push_back(make_effect(apply(OpCode::Div, leaf(3), leaf(0))));
    m.dummy_features = {1, 2};
    return m;
}

}  // namespace

TEST_CASE("leaf and simple operator evaluation") {
    const double x[] = {0.5, 0.0, 0.0, 0.25};
    CHECK(eval_expr(*leaf(0), x) == 0.5);
    CHECK(eval_expr(*apply(OpCode::Log, constant(1.0)), x) == 0.0);
    // division by zero is guarded with a non-finite marker, not a trap
    CHECK_FALSE(std::isfinite(eval_expr(*apply(OpCode::Div, leaf(3), leaf(1)), x)));
}

TEST_CASE("four-effect model evaluates to 2 + e at the unit point") {
    const AdditiveModel m = four_effect_model();
    const double x[] = {1.0, 0.0, 0.0, 1.0};
    CHECK(eval_model(m, x) == doctest::Approx(4.718282).epsilon(1e-6));

    // same model is non-finite when the log argument collapses to zero
    const double x2[] = {1.0, 0.0, 0.0, 0.0};
    CHECK_FALSE(std::isfinite(eval_model(m, x2)));
}

TEST_CASE("model evaluation is the exact ordered sum of its effects") {
    const AdditiveModel m = four_effect_model();
    const double x[] = {0.7, 0.0, 0.0, 0.9};
    double total = 0.0;
    for (const Effect& e : m.effects) total += eval_expr(*e.expr, x);
    CHECK(eval_model(m, x) == total);  // bitwise, fixed summation order
}

TEST_CASE("single-leaf model") {
    AdditiveModel m;
    m.d = 1;
    m.effects.push_back(make_effect(leaf(0)));
    const double x[] = {0.3};
    CHECK(eval_model(m, x) == 0.3);
}

TEST_CASE("operator vocabulary layout and weights") {
    int unary_nl = 0, binary_lin = 0, binary_nl = 0;
    for (const Operator& op : operator_table()) {
        if (op.arity == 1) {
            CHECK(op.nonlinear);
            ++unary_nl;
        } else if (op.nonlinear) {
            ++binary_nl;
        } else {
            ++binary_lin;
        }
    }
    CHECK(unary_nl == 19);
    CHECK(binary_lin == 3);  // mul, div, add
    CHECK(binary_nl == 2);   // min, max

    CHECK(operator_info(OpCode::Mul).weight == doctest::Approx(0.8));
    CHECK(operator_info(OpCode::Div).weight == doctest::Approx(0.2));
    CHECK(operator_info(OpCode::Add).weight == 0.0);  // never drawn
    CHECK(operator_info(OpCode::Min).weight == doctest::Approx(0.5));
    CHECK(operator_info(OpCode::Max).weight == doctest::Approx(0.5));
    CHECK(operator_info(OpCode::Log).weight == doctest::Approx(0.133));
    CHECK(operator_info(OpCode::Sinc).weight == doctest::Approx(0.015));

    // weights within each selection class are nonnegative
    for (const Operator& op : operator_table()) CHECK(op.weight >= 0.0);
}

TEST_CASE("domain guards return non-finite markers, never trap") {
    CHECK(apply_op(OpCode::Sinc, 0.0) == 1.0);  // removable singularity
    CHECK(apply_op(OpCode::Acot, 0.0) == doctest::Approx(std::numbers::pi / 2));
    CHECK_FALSE(std::isfinite(apply_op(OpCode::Sqrt, -1.0)));
    CHECK_FALSE(std::isfinite(apply_op(OpCode::Log, 0.0)));
    CHECK_FALSE(std::isfinite(apply_op(OpCode::Log, -2.0)));
    CHECK_FALSE(std::isfinite(apply_op(OpCode::Cot, 0.0)));
    CHECK_FALSE(std::isfinite(apply_op(OpCode::Csc, 0.0)));
    CHECK_FALSE(std::isfinite(apply_op(OpCode::Div, 1.0, 0.0)));
    CHECK(apply_op(OpCode::Min, 2.0, -3.0) == -3.0);
    CHECK(apply_op(OpCode::Max, 2.0, -3.0) == 2.0);
    CHECK(apply_op(OpCode::Cube, -2.0) == -8.0);
    CHECK(apply_op(OpCode::Square, -2.0) == 4.0);

    // closure: every operator at arbitrary finite args yields a real or a marker
    const double probes[] = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 100.0};
    for (const Operator& op : operator_table())
        for (double a : probes)
            for (double b : probes) {
                const double r = apply_op(op.code, a, b);
                (void)r;  // must not trap; value may be non-finite
            }
}

TEST_CASE("collect_features and effect invariants") {
    const ExprPtr e = apply(OpCode::Log, apply(OpCode::Mul, leaf(3), leaf(0)));
    const std::vector<int> feats = collect_features(*e);
    CHECK(feats == std::vector<int>{0, 3});
    const Effect eff = make_effect(e);
    CHECK(eff.features == std::vector<int>{0, 3});
}

TEST_CASE("validate_domain is a finiteness check over the sample set") {
    Matrix box(5, 1);
    box.at(0, 0) = -1.0;
    box.at(1, 0) = -0.5;
    box.at(2, 0) = 0.1;
    box.at(3, 0) = 0.5;
    box.at(4, 0) = 1.0;

    AdditiveModel sq;
    sq.d = 1;
    sq.effects.push_back(make_effect(apply(OpCode::Square, leaf(0))));
    CHECK(validate_domain(sq, box));

    AdditiveModel lg;
    lg.d = 1;
    lg.effects.push_back(make_effect(apply(OpCode::Log, leaf(0))));
    CHECK_FALSE(validate_domain(lg, box));  // log at x0 <= 0

    // ratio model: finite iff no sampled denominator is exactly zero
    AdditiveModel ratio;
    ratio.d = 2;
    ratio.effects.push_back(make_effect(apply(OpCode::Div, leaf(1), leaf(0))));
    ratio.dummy_features = {};
    Matrix s(3, 2);
    s.at(0, 0) = 0.2; s.at(0, 1) = 0.9;
    s.at(1, 0) = -0.3; s.at(1, 1) = 0.1;
    s.at(2, 0) = 0.7; s.at(2, 1) = -0.4;
    CHECK(validate_domain(ratio, s));
    s.at(1, 0) = 0.0;
    CHECK_FALSE(validate_domain(ratio, s));
}

TEST_CASE("model JSON round-trip is byte-stable") {
    const AdditiveModel m = four_effect_model();
    const std::string once = model_to_json(m);
    const AdditiveModel parsed = model_from_json(once);
    const std::string twice = model_to_json(parsed);
    CHECK(once == twice);
    CHECK(parsed.d == m.d);
    CHECK(parsed.effects.size() == m.effects.size());
    CHECK(parsed.dummy_features == m.dummy_features);

    const double x[] = {0.6, 0.0, 0.0, 0.8};
    CHECK(eval_model(parsed, x) == eval_model(m, x));
}

TEST_CASE("model JSON validation rejects malformed documents") {
    CHECK_THROWS_AS(model_from_json("{"), ConfigInvalid);
    CHECK_THROWS_AS(model_from_json(R"({"d": 2, "effects": []})"), ConfigInvalid);
    CHECK_THROWS_AS(
        model_from_json(
            R"({"d": 1, "dummy_features": [], "effects": [{"features": [0], "expr": ["nosuchop", ["leaf", 0]]}]})"),
        ConfigInvalid);
    CHECK_THROWS_AS(
        model_from_json(
            R"({"d": 1, "dummy_features": [], "effects": [{"features": [0], "expr": ["leaf", 5]}]})"),
        ConfigInvalid);
}
