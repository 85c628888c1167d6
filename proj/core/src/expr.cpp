#include "xfid/expr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "xfid/errors.hpp"

#include <nlohmann/json.hpp>

namespace xfid {

namespace {

constexpr std::array<Operator, 24> kOperators{{
    {OpCode::Cos, "cos", 1, true, 0.015},
    {OpCode::Cosh, "cosh", 1, true, 0.015},
    {OpCode::Sin, "sin", 1, true, 0.015},
    {OpCode::Sinh, "sinh", 1, true, 0.015},
    {OpCode::Asinh, "asinh", 1, true, 0.015},
    {OpCode::Tan, "tan", 1, true, 0.015},
    {OpCode::Tanh, "tanh", 1, true, 0.015},
    {OpCode::Atan, "atan", 1, true, 0.015},
    {OpCode::Cot, "cot", 1, true, 0.015},
    {OpCode::Acot, "acot", 1, true, 0.015},
    {OpCode::Csc, "csc", 1, true, 0.015},
    {OpCode::Sech, "sech", 1, true, 0.015},
    {OpCode::Sinc, "sinc", 1, true, 0.015},
    {OpCode::Abs, "abs", 1, true, 0.133},
    {OpCode::Sqrt, "sqrt", 1, true, 0.133},
    {OpCode::Square, "square", 1, true, 0.133},
    {OpCode::Cube, "cube", 1, true, 0.133},
    {OpCode::Exp, "exp", 1, true, 0.133},
    {OpCode::Log, "log", 1, true, 0.133},
    {OpCode::Mul, "mul", 2, false, 0.8},
    {OpCode::Div, "div", 2, false, 0.2},
    {OpCode::Add, "add", 2, false, 0.0},
    {OpCode::Min, "min", 2, true, 0.5},
    {OpCode::Max, "max", 2, true, 0.5},
}};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::span<const Operator> operator_table() { return kOperators; }

const Operator& operator_info(OpCode code) {
    return kOperators[static_cast<std::size_t>(code)];
}

const Operator* find_operator(std::string_view name) {
    for (const Operator& op : kOperators) {
        if (name == op.name) return &op;
    }
    return nullptr;
}

double apply_op(OpCode code, double a, double b) {
    switch (code) {
        case OpCode::Cos: return std::cos(a);
        case OpCode::Cosh: return std::cosh(a);
        case OpCode::Sin: return std::sin(a);
        case OpCode::Sinh: return std::sinh(a);
        case OpCode::Asinh: return std::asinh(a);
        case OpCode::Tan: return std::tan(a);
        case OpCode::Tanh: return std::tanh(a);
        case OpCode::Atan: return std::atan(a);
        case OpCode::Cot: {
            const double s = std::sin(a);
            return s == 0.0 ? kNaN : std::cos(a) / s;
        }
        case OpCode::Acot:
            // atan(1/x); finite everywhere, acot(0) = pi/2.
            return a == 0.0 ? std::atan(std::numeric_limits<double>::infinity())
                            : std::atan(1.0 / a);
        case OpCode::Csc: {
            const double s = std::sin(a);
            return s == 0.0 ? kNaN : 1.0 / s;
        }
        case OpCode::Sech: return 1.0 / std::cosh(a);
        case OpCode::Sinc: return a == 0.0 ? 1.0 : std::sin(a) / a;
        case OpCode::Abs: return std::fabs(a);
        case OpCode::Sqrt: return a < 0.0 ? kNaN : std::sqrt(a);
        case OpCode::Square: return a * a;
        case OpCode::Cube: return a * a * a;
        case OpCode::Exp: return std::exp(a);
        case OpCode::Log: return a > 0.0 ? std::log(a) : kNaN;
        case OpCode::Mul: return a * b;
        case OpCode::Div: return b == 0.0 ? kNaN : a / b;
        case OpCode::Add: return a + b;
        case OpCode::Min: return std::min(a, b);
        case OpCode::Max: return std::max(a, b);
    }
    return kNaN;
}

ExprPtr leaf(int feature) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Leaf;
    n->feature = feature;
    return n;
}

ExprPtr constant(double value) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Const;
    n->value = value;
    return n;
}

ExprPtr apply(OpCode op, ExprPtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Apply;
    n->op = op;
    n->children = {std::move(a)};
    return n;
}

ExprPtr apply(OpCode op, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Apply;
    n->op = op;
    n->children = {std::move(a), std::move(b)};
    return n;
}

double eval_expr(const ExprNode& node, std::span<const double> x) {
    switch (node.kind) {
        case ExprNode::Kind::Leaf: return x[static_cast<std::size_t>(node.feature)];
        case ExprNode::Kind::Const: return node.value;
        case ExprNode::Kind::Apply: {
            const double a = eval_expr(*node.children[0], x);
            if (node.children.size() == 1) return apply_op(node.op, a);
            const double b = eval_expr(*node.children[1], x);
            return apply_op(node.op, a, b);
        }
    }
    return kNaN;
}

namespace {

void collect_features_into(const ExprNode& node, std::set<int>& out) {
    if (node.kind == ExprNode::Kind::Leaf) {
        out.insert(node.feature);
        return;
    }
    for (const ExprPtr& c : node.children) collect_features_into(*c, out);
}

}  // namespace

std::vector<int> collect_features(const ExprNode& node) {
    std::set<int> s;
    collect_features_into(node, s);
    return {s.begin(), s.end()};
}

Effect make_effect(ExprPtr expr) {
    Effect e;
    e.features = collect_features(*expr);
    e.expr = std::move(expr);
    return e;
}

double eval_model(const AdditiveModel& model, std::span<const double> x) {
    double total = 0.0;
    for (const Effect& e : model.effects) total += eval_expr(*e.expr, x);
    return total;
}

bool validate_domain(const AdditiveModel& model, const Matrix& samples) {
    for (std::size_t r = 0; r < samples.rows(); ++r) {
        const auto row = samples.row(r);
        double total = 0.0;
        for (const Effect& e : model.effects) {
            const double v = eval_expr(*e.expr, row);
            if (!std::isfinite(v)) return false;
            total += v;
        }
        if (!std::isfinite(total)) return false;
    }
    return true;
}

namespace {

using json = nlohmann::ordered_json;

json expr_to_json(const ExprNode& node) {
    switch (node.kind) {
        case ExprNode::Kind::Leaf: return json::array({"leaf", node.feature});
        case ExprNode::Kind::Const: return json::array({"const", node.value});
        case ExprNode::Kind::Apply: {
            json arr = json::array({operator_info(node.op).name});
            for (const ExprPtr& c : node.children) arr.push_back(expr_to_json(*c));
            return arr;
        }
    }
    return {};
}

ExprPtr expr_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_string())
        throw ConfigInvalid("expr: expected prefix-notation array");
    const std::string head = j[0].get<std::string>();
    if (head == "leaf") {
        if (j.size() != 2 || !j[1].is_number_integer())
            throw ConfigInvalid("expr: leaf wants one integer feature index");
        return leaf(j[1].get<int>());
    }
    if (head == "const") {
        if (j.size() != 2 || !j[1].is_number())
            throw ConfigInvalid("expr: const wants one number");
        return constant(j[1].get<double>());
    }
    const Operator* op = find_operator(head);
    if (op == nullptr) throw ConfigInvalid("expr: unknown operator '" + head + "'");
    if (static_cast<int>(j.size()) != op->arity + 1)
        throw ConfigInvalid("expr: operator '" + head + "' wants " +
                            std::to_string(op->arity) + " children");
    if (op->arity == 1) return apply(op->code, expr_from_json(j[1]));
    return apply(op->code, expr_from_json(j[1]), expr_from_json(j[2]));
}

}  // namespace

std::string model_to_json(const AdditiveModel& model) {
    json j;
    j["d"] = model.d;
    j["dummy_features"] = model.dummy_features;
    json effects = json::array();
    for (const Effect& e : model.effects) {
        json je;
        je["features"] = e.features;
        je["expr"] = expr_to_json(*e.expr);
        effects.push_back(std::move(je));
    }
    j["effects"] = std::move(effects);
    return j.dump();
}

AdditiveModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigInvalid(std::string("model JSON parse error: ") + e.what());
    }
    if (!j.contains("d") || !j["d"].is_number_integer())
        throw ConfigInvalid("model JSON: missing integer field 'd'");
    if (!j.contains("effects") || !j["effects"].is_array())
        throw ConfigInvalid("model JSON: missing array field 'effects'");
    AdditiveModel m;
    m.d = j["d"].get<int>();
    if (j.contains("dummy_features"))
        m.dummy_features = j["dummy_features"].get<std::vector<int>>();
    for (const json& je : j["effects"]) {
        if (!je.contains("expr")) throw ConfigInvalid("model JSON: effect missing 'expr'");
        Effect e = make_effect(expr_from_json(je["expr"]));
        if (e.features.empty())
            throw ConfigInvalid("model JSON: effect uses no features");
        for (int f : e.features)
            if (f < 0 || f >= m.d)
                throw ConfigInvalid("model JSON: feature index out of range in 'expr'");
        if (je.contains("features") &&
            je["features"].get<std::vector<int>>() != e.features)
            throw ConfigInvalid("model JSON: 'features' does not match leaves of 'expr'");
        m.effects.push_back(std::move(e));
    }
    if (m.effects.empty()) throw ConfigInvalid("model JSON: model has no effects");
    return m;
}

}  // namespace xfid
