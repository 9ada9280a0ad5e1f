#include "polycycle/expr.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "polycycle/errors.hpp"

namespace polycycle {

namespace {

struct Token {
    enum class Type { number, ident, op, end };
    Type type;
    std::string text;
    int line, column;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        const int l = line, cl = col;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && s[j] == '.') {
                ++j;
                const size_t frac = j;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
                if (j == frac) throw ParseError("expected digits after '.'", l, cl + static_cast<int>(j - i));
            }
            out.push_back({Token::Type::number, s.substr(i, j - i), l, cl});
            advance(j - i);
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Token::Type::ident, s.substr(i, j - i), l, cl});
            advance(j - i);
        } else if (std::string("+-*/^()").find(c) != std::string::npos) {
            out.push_back({Token::Type::op, std::string(1, c), l, cl});
            advance(1);
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
        }
    }
    out.push_back({Token::Type::end, "", line, col});
    return out;
}

// cpp_int reads a leading zero as an octal prefix.
boost::multiprecision::cpp_int decimal_int(std::string d) {
    d.erase(0, std::min(d.find_first_not_of('0'), d.size() - 1));
    return boost::multiprecision::cpp_int(d);
}

Rational parse_decimal(const std::string& text) {
    const auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(decimal_int(text));
    boost::multiprecision::cpp_int den = 1;
    for (size_t k = dot + 1; k < text.size(); ++k) den *= 10;
    return Rational(decimal_int(text.substr(0, dot) + text.substr(dot + 1)), den);
}

bool is_integer_text(const std::string& t) { return t.find('.') == std::string::npos; }

ExprPtr make(ExprNode::Kind k, ExprPtr l = nullptr, ExprPtr r = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

class Parser {
public:
    Parser(std::vector<Token> toks, std::set<std::string> scope)
        : toks_(std::move(toks)), scope_(std::move(scope)) {}

    ExprPtr parse() {
        ExprPtr e = expr();
        if (peek().type != Token::Type::end) fail("unexpected '" + peek().text + "'");
        return e;
    }

private:
    const Token& peek(size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    bool is_op(const char* op, size_t ahead = 0) const {
        return peek(ahead).type == Token::Type::op && peek(ahead).text == op;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        throw ParseError(t.type == Token::Type::end ? msg + " (at end of input)" : msg, t.line, t.column);
    }

    ExprPtr expr() {
        ExprPtr e = term();
        while (is_op("+") || is_op("-")) {
            const auto k = peek().text == "+" ? ExprNode::Kind::add : ExprNode::Kind::sub;
            ++pos_;
            e = make(k, e, term());
        }
        return e;
    }

    ExprPtr term() {
        ExprPtr e = factor();
        while (is_op("*") || is_op("/")) {
            const auto k = peek().text == "*" ? ExprNode::Kind::mul : ExprNode::Kind::div;
            ++pos_;
            e = make(k, e, factor());
        }
        return e;
    }

    ExprPtr factor() {
        if (is_op("-")) {
            ++pos_;
            return make(ExprNode::Kind::neg, factor());
        }
        const bool literal = peek().type == Token::Type::number;
        ExprPtr b = base();
        if (is_op("^")) {
            if (literal) fail("'^' is not allowed on a numeric literal base");
            ++pos_;
            const Token& t = peek();
            if (t.type != Token::Type::number || !is_integer_text(t.text))
                fail("exponent must be a nonnegative integer literal");
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::pow;
            n->lhs = b;
            const auto value = decimal_int(t.text);
            if (value > 64) fail("exponent too large");
            n->exponent = value.convert_to<unsigned>();
            ++pos_;
            return n;
        }
        return b;
    }

    ExprPtr base() {
        const Token& t = peek();
        if (t.type == Token::Type::number) {
            // a/b is one literal unless the number is itself a divisor (x/2/3 stays left-associative).
            const bool after_slash = pos_ > 0 && toks_[pos_ - 1].type == Token::Type::op &&
                                     toks_[pos_ - 1].text == "/";
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::number;
            n->value = parse_decimal(t.text);
            ++pos_;
            if (!after_slash && is_integer_text(t.text) && is_op("/") &&
                peek(1).type == Token::Type::number && is_integer_text(peek(1).text) && !is_op("^", 2)) {
                const Token& d = peek(1);
                const auto den = decimal_int(d.text);
                if (den == 0) throw ParseError("zero denominator in rational literal", d.line, d.column);
                n->value /= Rational(den);
                pos_ += 2;
            }
            return n;
        }
        if (t.type == Token::Type::ident) {
            if (!scope_.count(t.text)) fail("undeclared identifier '" + t.text + "'");
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::ident;
            n->name = t.text;
            ++pos_;
            return n;
        }
        if (is_op("(")) {
            ++pos_;
            ExprPtr e = expr();
            if (!is_op(")")) fail("expected ')'");
            ++pos_;
            return e;
        }
        fail(t.type == Token::Type::end ? "expected an operand" : "unexpected '" + t.text + "'");
    }

    std::vector<Token> toks_;
    std::set<std::string> scope_;
    size_t pos_ = 0;
};

void collect(const ExprPtr& n, const std::set<std::string>& params, std::set<std::string>& out) {
    if (!n) return;
    if (n->kind == ExprNode::Kind::ident && params.count(n->name)) out.insert(n->name);
    collect(n->lhs, params, out);
    collect(n->rhs, params, out);
}

std::string print_node(const ExprPtr& n) {
    using K = ExprNode::Kind;
    switch (n->kind) {
        case K::number: {
            const auto num = boost::multiprecision::numerator(n->value);
            const auto den = boost::multiprecision::denominator(n->value);
            if (den == 1) return num.str();
            return "(" + num.str() + "/" + den.str() + ")";
        }
        case K::ident: return n->name;
        case K::neg: return "(-" + print_node(n->lhs) + ")";
        case K::add: return "(" + print_node(n->lhs) + " + " + print_node(n->rhs) + ")";
        case K::sub: return "(" + print_node(n->lhs) + " - " + print_node(n->rhs) + ")";
        case K::mul: return "(" + print_node(n->lhs) + " * " + print_node(n->rhs) + ")";
        case K::div: return "(" + print_node(n->lhs) + " / " + print_node(n->rhs) + ")";
        case K::pow: {
            std::string b = print_node(n->lhs);
            if (n->lhs->kind == K::number && b.front() != '(') b = "(" + b + ")";
            return "(" + b + "^" + std::to_string(n->exponent) + ")";
        }
    }
    return {};
}

BivariatePolynomial eval_node(const ExprPtr& n, const Expression& e, const Binding& binding) {
    using K = ExprNode::Kind;
    switch (n->kind) {
        case K::number: return BivariatePolynomial(n->value.convert_to<double>());
        case K::ident: {
            const auto& vars = e.variables();
            if (!vars.empty() && n->name == vars[0]) return BivariatePolynomial::x();
            if (vars.size() > 1 && n->name == vars[1]) return BivariatePolynomial::y();
            auto it = binding.find(n->name);
            if (it == binding.end()) throw ModelError("unbound parameter '" + n->name + "'");
            return BivariatePolynomial(it->second);
        }
        case K::neg: return -eval_node(n->lhs, e, binding);
        case K::add: return eval_node(n->lhs, e, binding) + eval_node(n->rhs, e, binding);
        case K::sub: return eval_node(n->lhs, e, binding) - eval_node(n->rhs, e, binding);
        case K::mul: return eval_node(n->lhs, e, binding) * eval_node(n->rhs, e, binding);
        case K::div: {
            const BivariatePolynomial d = eval_node(n->rhs, e, binding);
            if (!d.is_constant()) throw ModelError("division by a non-constant polynomial");
            if (d.constant_term() == 0.0) throw ModelError("division by zero");
            return eval_node(n->lhs, e, binding) * (1.0 / d.constant_term());
        }
        case K::pow: return eval_node(n->lhs, e, binding).pow(n->exponent);
    }
    return {};
}

}  // namespace

std::vector<std::string> Expression::free_parameters() const {
    std::set<std::string> out;
    collect(root_, std::set<std::string>(params_.begin(), params_.end()), out);
    return {out.begin(), out.end()};
}

Expression parse_expression(const std::string& text, const std::vector<std::string>& params,
                            const std::vector<std::string>& vars) {
    if (vars.size() > 2) throw UsageError("at most two polynomial variables");
    std::set<std::string> scope(params.begin(), params.end());
    scope.insert(vars.begin(), vars.end());
    Parser p(tokenize(text), scope);
    return Expression(p.parse(), vars, params);
}

std::string print(const Expression& e) { return print_node(e.root()); }

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprNode::Kind::number: return a->value == b->value;
        case ExprNode::Kind::ident: return a->name == b->name;
        case ExprNode::Kind::pow: return a->exponent == b->exponent && structurally_equal(a->lhs, b->lhs);
        default: return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    }
}

BivariatePolynomial instantiate(const Expression& e, const Binding& binding) {
    return eval_node(e.root(), e, binding);
}

double evaluate_constant(const Expression& e, const Binding& binding) {
    const BivariatePolynomial p = instantiate(e, binding);
    if (!p.is_constant()) throw ModelError("expression is not constant");
    return p.constant_term();
}

}  // namespace polycycle
