#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xfid/matrix.hpp"

namespace xfid {

enum class OpCode {
    // unary, nonlinear
    Cos,
    Cosh,
    Sin,
    Sinh,
    Asinh,
    Tan,
    Tanh,
    Atan,
    Cot,
    Acot,
    Csc,
    Sech,
    Sinc,
    Abs,
    Sqrt,
    Square,
    Cube,
    Exp,
    Log,
    // binary, linear
    Mul,
    Div,
    Add,
    // binary, nonlinear
    Min,
    Max,
};

struct Operator {
    OpCode code;
    const char* name;
    int arity;  // 1 or 2
    bool nonlinear;
    double weight;  // selection mass within its class; 0 means never drawn
};

/// The full operator vocabulary.
std::span<const Operator> operator_table();

const Operator& operator_info(OpCode code);

/// Lookup by serialized name; nullptr if unknown.
const Operator* find_operator(std::string_view name);

/// Apply an operator to finite arguments. Domain violations yield NaN/Inf
/// (non-finite marker), never a trap.
double apply_op(OpCode code, double a, double b = 0.0);

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Leaf, Const, Apply };

    Kind kind = Kind::Leaf;
    int feature = -1;   // Leaf
    double value = 0.0; // Const
    OpCode op{};        // Apply
    std::vector<ExprPtr> children;
};

ExprPtr leaf(int feature);
ExprPtr constant(double value);
ExprPtr apply(OpCode op, ExprPtr a);
ExprPtr apply(OpCode op, ExprPtr a, ExprPtr b);

double eval_expr(const ExprNode& node, std::span<const double> x);

/// Sorted, deduplicated feature indices appearing as leaves.
std::vector<int> collect_features(const ExprNode& node);

/// One additive term: a feature subset and the expression over it.
struct Effect {
    std::vector<int> features;  // sorted, equals leaf set of expr
    ExprPtr expr;
};

Effect make_effect(ExprPtr expr);

struct AdditiveModel {
    int d = 0;
    std::vector<Effect> effects;
    std::vector<int> dummy_features;  // sorted
};

/// Sum of per-effect values in ascending effect order (fixed order keeps
/// reproducibility bit-exact). Non-finite terms propagate.
double eval_model(const AdditiveModel& model, std::span<const double> x);

/// True iff every effect and the model total are finite at every sample row.
bool validate_domain(const AdditiveModel& model, const Matrix& samples);

/// Model (de)serialization. The JSON layout uses prefix-notation arrays for
/// expressions, e.g. ["log", ["mul", ["leaf", 0], ["leaf", 3]]]. Writing is
/// canonical: parse -> serialize round-trips byte-stably.
std::string model_to_json(const AdditiveModel& model);
AdditiveModel model_from_json(const std::string& text);

}  // namespace xfid
