#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

// Minimal arithmetic expression grammar over x, y: numbers, + - * / ^,
// parentheses, the constant pi, and the functions sin, cos, exp, abs, min,
// max. Used for g(x), gamma(x), p(x) and denoise p-maps in run configs.

namespace mos {

struct expression_error : std::runtime_error {
    explicit expression_error(const std::string& msg) : std::runtime_error(msg) {}
};

class Expression {
  public:
    Expression() = default;

    static Expression parse(const std::string& text) {
        Parser p(text);
        Expression e;
        e.source_ = text;
        e.root_ = p.parse_expr();
        p.expect_end();
        return e;
    }

    double eval(double x, double y = 0.0) const {
        if (!root_) throw expression_error("empty expression");
        return eval_node(*root_, x, y);
    }

    const std::string& source() const { return source_; }
    bool empty() const { return !root_; }

    /// True when the expression does not reference x or y.
    bool constant() const { return root_ && !uses_vars(*root_); }

  private:
    enum class Op { num, var_x, var_y, add, sub, mul, div, pow, neg, sin, cos, exp, abs, min, max };

    struct Node {
        Op op = Op::num;
        double value = 0.0;
        std::shared_ptr<Node> a, b;
    };
    using NodePtr = std::shared_ptr<Node>;

    std::string source_;
    NodePtr root_;

    static bool uses_vars(const Node& n) {
        if (n.op == Op::var_x || n.op == Op::var_y) return true;
        if (n.a && uses_vars(*n.a)) return true;
        return n.b && uses_vars(*n.b);
    }

    static double eval_node(const Node& n, double x, double y) {
        switch (n.op) {
            case Op::num: return n.value;
            case Op::var_x: return x;
            case Op::var_y: return y;
            case Op::add: return eval_node(*n.a, x, y) + eval_node(*n.b, x, y);
            case Op::sub: return eval_node(*n.a, x, y) - eval_node(*n.b, x, y);
            case Op::mul: return eval_node(*n.a, x, y) * eval_node(*n.b, x, y);
            case Op::div: return eval_node(*n.a, x, y) / eval_node(*n.b, x, y);
            case Op::pow: return std::pow(eval_node(*n.a, x, y), eval_node(*n.b, x, y));
            case Op::neg: return -eval_node(*n.a, x, y);
            case Op::sin: return std::sin(eval_node(*n.a, x, y));
            case Op::cos: return std::cos(eval_node(*n.a, x, y));
            case Op::exp: return std::exp(eval_node(*n.a, x, y));
            case Op::abs: return std::abs(eval_node(*n.a, x, y));
            case Op::min: return std::min(eval_node(*n.a, x, y), eval_node(*n.b, x, y));
            case Op::max: return std::max(eval_node(*n.a, x, y), eval_node(*n.b, x, y));
        }
        return 0.0;
    }

    class Parser {
      public:
        explicit Parser(const std::string& s) : s_(s) {}

        NodePtr parse_expr() {
            NodePtr lhs = parse_term();
            for (;;) {
                skip_ws();
                if (consume('+'))
                    lhs = make(Op::add, lhs, parse_term());
                else if (consume('-'))
                    lhs = make(Op::sub, lhs, parse_term());
                else
                    return lhs;
            }
        }

        void expect_end() {
            skip_ws();
            if (pos_ != s_.size())
                throw expression_error("unexpected trailing input at '" + s_.substr(pos_) + "'");
        }

      private:
        const std::string& s_;
        std::size_t pos_ = 0;

        static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
            auto n = std::make_shared<Node>();
            n->op = op;
            n->a = std::move(a);
            n->b = std::move(b);
            n->value = v;
            return n;
        }

        NodePtr parse_term() {
            NodePtr lhs = parse_factor();
            for (;;) {
                skip_ws();
                if (consume('*'))
                    lhs = make(Op::mul, lhs, parse_factor());
                else if (consume('/'))
                    lhs = make(Op::div, lhs, parse_factor());
                else
                    return lhs;
            }
        }

        // '^' is right-associative and binds tighter than unary minus, so
        // -x^2 reads as -(x^2).
        NodePtr parse_factor() {
            skip_ws();
            if (consume('-')) return make(Op::neg, parse_factor());
            NodePtr base = parse_primary();
            skip_ws();
            if (consume('^')) return make(Op::pow, base, parse_factor());
            return base;
        }

        NodePtr parse_primary() {
            skip_ws();
            if (pos_ >= s_.size()) throw expression_error("unexpected end of expression");
            const char c = s_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (consume('(')) {
                NodePtr e = parse_expr();
                require(')');
                return e;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
            throw expression_error(std::string("unexpected character '") + c + "'");
        }

        NodePtr parse_number() {
            std::size_t used = 0;
            double val;
            try {
                val = std::stod(s_.substr(pos_), &used);
            } catch (const std::exception&) {
                throw expression_error("bad number at '" + s_.substr(pos_) + "'");
            }
            pos_ += used;
            return make(Op::num, nullptr, nullptr, val);
        }

        NodePtr parse_ident() {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x") return make(Op::var_x);
            if (name == "y") return make(Op::var_y);
            if (name == "pi") return make(Op::num, nullptr, nullptr, 3.14159265358979323846);

            Op op;
            int arity = 1;
            if (name == "sin") op = Op::sin;
            else if (name == "cos") op = Op::cos;
            else if (name == "exp") op = Op::exp;
            else if (name == "abs") op = Op::abs;
            else if (name == "min") { op = Op::min; arity = 2; }
            else if (name == "max") { op = Op::max; arity = 2; }
            else throw expression_error("unknown identifier '" + name + "'");

            require('(');
            NodePtr a = parse_expr();
            NodePtr b;
            if (arity == 2) {
                require(',');
                b = parse_expr();
            }
            require(')');
            return make(op, a, b);
        }

        void skip_ws() {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        bool consume(char c) {
            if (pos_ < s_.size() && s_[pos_] == c) {
                ++pos_;
                return true;
            }
            return false;
        }
        void require(char c) {
            skip_ws();
            if (!consume(c))
                throw expression_error(std::string("expected '") + c + "' in expression");
        }
    };
};

}  // namespace mos
