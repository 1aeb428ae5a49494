#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "sislab/error.hpp"

namespace sislab {

/// A compiled arithmetic expression in the cell-centre coordinates x and y.
///
/// Grammar:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | primary
///   primary := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
///   func    := 'sin' | 'cos' | 'exp'
class Expression {
public:
    static Expression parse(std::string_view text) {
        Expression e;
        Parser p{text, 0, e.nodes_};
        e.root_ = p.parse_expr();
        p.skip_ws();
        if (p.pos != text.size())
            throw ParseError("unexpected '" + std::string(1, text[p.pos]) + "' at position " +
                                 std::to_string(p.pos),
                             p.pos);
        e.source_ = std::string(text);
        return e;
    }

    double operator()(double x, double y = 0.0) const { return eval(root_, x, y); }

    const std::string& source() const noexcept { return source_; }

private:
    enum class Op { Num, X, Y, Neg, Add, Sub, Mul, Div, Sin, Cos, Exp };
    struct Node {
        Op op;
        double value = 0.0;
        int lhs = -1;
        int rhs = -1;
    };

    struct Parser {
        std::string_view s;
        std::size_t pos;
        std::vector<Node>& nodes;

        int push(Node n) {
            nodes.push_back(n);
            return static_cast<int>(nodes.size()) - 1;
        }
        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        [[noreturn]] void fail(const std::string& msg) const {
            throw ParseError(msg + " at position " + std::to_string(pos), pos);
        }
        bool eat(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        int parse_expr() {
            int lhs = parse_term();
            for (;;) {
                if (eat('+'))
                    lhs = push({Op::Add, 0.0, lhs, parse_term()});
                else if (eat('-'))
                    lhs = push({Op::Sub, 0.0, lhs, parse_term()});
                else
                    return lhs;
            }
        }
        int parse_term() {
            int lhs = parse_unary();
            for (;;) {
                if (eat('*'))
                    lhs = push({Op::Mul, 0.0, lhs, parse_unary()});
                else if (eat('/'))
                    lhs = push({Op::Div, 0.0, lhs, parse_unary()});
                else
                    return lhs;
            }
        }
        int parse_unary() {
            if (eat('-')) return push({Op::Neg, 0.0, parse_unary(), -1});
            if (eat('+')) return parse_unary();
            return parse_primary();
        }
        int parse_primary() {
            skip_ws();
            if (pos >= s.size()) fail("unexpected end of expression");
            const char c = s[pos];
            if (c == '(') {
                ++pos;
                const int inner = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
            fail("unexpected '" + std::string(1, c) + "'");
        }
        int parse_number() {
            const std::string tail(s.substr(pos));
            char* end = nullptr;
            const double v = std::strtod(tail.c_str(), &end);
            if (end == tail.c_str()) fail("malformed number");
            pos += static_cast<std::size_t>(end - tail.c_str());
            return push({Op::Num, v});
        }
        int parse_name() {
            const std::size_t start = pos;
            while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
            const std::string_view name = s.substr(start, pos - start);
            if (name == "x") return push({Op::X});
            if (name == "y") return push({Op::Y});
            if (name == "pi") return push({Op::Num, std::numbers::pi});
            Op fn;
            if (name == "sin")
                fn = Op::Sin;
            else if (name == "cos")
                fn = Op::Cos;
            else if (name == "exp")
                fn = Op::Exp;
            else {
                pos = start;
                fail("unknown identifier '" + std::string(name) + "'");
            }
            if (!eat('(')) fail("expected '(' after function name");
            const int arg = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return push({fn, 0.0, arg});
        }
    };

    double eval(int k, double x, double y) const {
        const Node& n = nodes_[static_cast<std::size_t>(k)];
        switch (n.op) {
            case Op::Num: return n.value;
            case Op::X: return x;
            case Op::Y: return y;
            case Op::Neg: return -eval(n.lhs, x, y);
            case Op::Add: return eval(n.lhs, x, y) + eval(n.rhs, x, y);
            case Op::Sub: return eval(n.lhs, x, y) - eval(n.rhs, x, y);
            case Op::Mul: return eval(n.lhs, x, y) * eval(n.rhs, x, y);
            case Op::Div: return eval(n.lhs, x, y) / eval(n.rhs, x, y);
            case Op::Sin: return std::sin(eval(n.lhs, x, y));
            case Op::Cos: return std::cos(eval(n.lhs, x, y));
            case Op::Exp: return std::exp(eval(n.lhs, x, y));
        }
        return 0.0;
    }

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string source_;
};

}  // namespace sislab
