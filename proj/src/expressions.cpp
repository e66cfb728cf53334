#include "gmfg/expressions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>
#include <tuple>

#include "gmfg/errors.hpp"

namespace gmfg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

enum class TokKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    TokKind kind;
    double number = 0.0;
    std::string ident;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token next() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
        current_.pos = i_;
        if (i_ >= text_.size()) {
            current_.kind = TokKind::End;
            return;
        }
        const char c = text_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t end = 0;
            current_.kind = TokKind::Number;
            current_.number = std::stod(text_.substr(i_), &end);
            i_ += end;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_')) {
                ++j;
            }
            current_.kind = TokKind::Ident;
            current_.ident = text_.substr(i_, j - i_);
            i_ = j;
            return;
        }
        switch (c) {
            case '+': current_.kind = TokKind::Plus; break;
            case '-': current_.kind = TokKind::Minus; break;
            case '*': current_.kind = TokKind::Star; break;
            case '/': current_.kind = TokKind::Slash; break;
            case '^': current_.kind = TokKind::Caret; break;
            case '(': current_.kind = TokKind::LParen; break;
            case ')': current_.kind = TokKind::RParen; break;
            default:
                throw InvalidInput("expression: unexpected character '" + std::string(1, c) +
                                   "' at position " + std::to_string(i_));
        }
        ++i_;
    }

    const std::string& text_;
    std::size_t i_ = 0;
    Token current_;
};

// ---------------------------------------------------------------------------
// Symbolic values the parser manipulates. An expression node is either a
// polynomial-times-trig sum (Poly) or, inside sin/cos arguments, a linear
// form a*x + b*y + c with numeric coefficients.
// ---------------------------------------------------------------------------

using Terms = std::vector<ExprTerm>;

Terms mul_terms(const Terms& a, const Terms& b) {
    Terms out;
    out.reserve(a.size() * b.size());
    for (const auto& ta : a) {
        for (const auto& tb : b) {
            ExprTerm t;
            t.coef = ta.coef * tb.coef;
            t.pow_t = ta.pow_t + tb.pow_t;
            t.pow_alpha = ta.pow_alpha + tb.pow_alpha;
            t.pow_beta = ta.pow_beta + tb.pow_beta;
            t.trigs = ta.trigs;
            t.trigs.insert(t.trigs.end(), tb.trigs.begin(), tb.trigs.end());
            out.push_back(std::move(t));
        }
    }
    return out;
}

Terms add_terms(Terms a, const Terms& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

Terms scale_terms(Terms a, double s) {
    for (auto& t : a) t.coef *= s;
    return a;
}

std::optional<double> as_constant(const Terms& terms) {
    double sum = 0.0;
    for (const auto& t : terms) {
        if (t.pow_t != 0 || t.pow_alpha != 0 || t.pow_beta != 0 || !t.trigs.empty()) {
            return std::nullopt;
        }
        sum += t.coef;
    }
    return sum;
}

struct LinForm {
    double cx = 0.0;
    double cy = 0.0;
    double c0 = 0.0;
};

class Parser {
public:
    Parser(const std::string& text, const std::vector<Var>& allowed)
        : lexer_(text), allowed_(allowed) {}

    Terms run() {
        Terms result = parse_expr();
        if (lexer_.peek().kind != TokKind::End) {
            throw InvalidInput("expression: trailing input at position " +
                               std::to_string(lexer_.peek().pos));
        }
        return result;
    }

private:
    bool allowed(Var v) const {
        return std::find(allowed_.begin(), allowed_.end(), v) != allowed_.end();
    }

    [[noreturn]] void fail(const std::string& msg, std::size_t pos) const {
        throw InvalidInput("expression: " + msg + " at position " + std::to_string(pos));
    }

    Terms parse_expr() {
        Terms acc;
        bool negate = false;
        if (lexer_.peek().kind == TokKind::Minus) {
            lexer_.next();
            negate = true;
        } else if (lexer_.peek().kind == TokKind::Plus) {
            lexer_.next();
        }
        acc = parse_term();
        if (negate) acc = scale_terms(std::move(acc), -1.0);
        while (lexer_.peek().kind == TokKind::Plus || lexer_.peek().kind == TokKind::Minus) {
            const bool minus = lexer_.next().kind == TokKind::Minus;
            Terms rhs = parse_term();
            if (minus) rhs = scale_terms(std::move(rhs), -1.0);
            acc = add_terms(std::move(acc), rhs);
        }
        return acc;
    }

    Terms parse_term() {
        Terms acc = parse_power();
        while (lexer_.peek().kind == TokKind::Star || lexer_.peek().kind == TokKind::Slash) {
            const Token op = lexer_.next();
            Terms rhs = parse_power();
            if (op.kind == TokKind::Star) {
                acc = mul_terms(acc, rhs);
            } else {
                const auto denom = as_constant(rhs);
                if (!denom) fail("division only by numeric constants", op.pos);
                if (*denom == 0.0) fail("division by zero", op.pos);
                acc = scale_terms(std::move(acc), 1.0 / *denom);
            }
        }
        return acc;
    }

    Terms parse_power() {
        Terms base = parse_primary();
        if (lexer_.peek().kind == TokKind::Caret) {
            const Token op = lexer_.next();
            const Token e = lexer_.next();
            if (e.kind != TokKind::Number || e.number != std::floor(e.number) || e.number < 0 ||
                e.number > 8) {
                fail("exponent must be an integer in [0, 8]", op.pos);
            }
            const int p = static_cast<int>(e.number);
            Terms acc{ExprTerm{1.0, 0, 0, 0, {}}};
            for (int i = 0; i < p; ++i) acc = mul_terms(acc, base);
            return acc;
        }
        return base;
    }

    Terms parse_primary() {
        const Token tok = lexer_.next();
        switch (tok.kind) {
            case TokKind::Number:
                return {ExprTerm{tok.number, 0, 0, 0, {}}};
            case TokKind::LParen: {
                Terms inner = parse_expr();
                expect(TokKind::RParen, "expected ')'");
                return inner;
            }
            case TokKind::Minus:
                return scale_terms(parse_primary(), -1.0);
            case TokKind::Ident:
                return parse_ident(tok);
            default:
                fail("unexpected token", tok.pos);
        }
    }

    Terms parse_ident(const Token& tok) {
        const std::string& name = tok.ident;
        if (name == "pi") return {ExprTerm{std::numbers::pi, 0, 0, 0, {}}};
        if (name == "t" || name == "alpha" || name == "beta") {
            const Var v = name == "t" ? Var::T : (name == "alpha" ? Var::Alpha : Var::Beta);
            if (!allowed(v)) fail("variable '" + name + "' not allowed here", tok.pos);
            ExprTerm term{1.0, 0, 0, 0, {}};
            if (v == Var::T) term.pow_t = 1;
            if (v == Var::Alpha) term.pow_alpha = 1;
            if (v == Var::Beta) term.pow_beta = 1;
            return {term};
        }
        if (name == "x" || name == "y") {
            fail("'" + name + "' may only appear inside sin(...) or cos(...)", tok.pos);
        }
        if (name == "sin" || name == "cos") {
            expect(TokKind::LParen, "expected '(' after " + name);
            const LinForm arg = parse_linform();
            expect(TokKind::RParen, "expected ')'");
            TrigFactor trig;
            trig.is_sin = (name == "sin");
            trig.kx = to_wavenumber(arg.cx, tok.pos);
            trig.ky = to_wavenumber(arg.cy, tok.pos);
            trig.phase = arg.c0;
            if (trig.kx != 0 && !allowed(Var::X)) fail("variable 'x' not allowed here", tok.pos);
            if (trig.ky != 0 && !allowed(Var::Y)) fail("variable 'y' not allowed here", tok.pos);
            return {ExprTerm{1.0, 0, 0, 0, {trig}}};
        }
        fail("unknown identifier '" + name + "'", tok.pos);
    }

    int to_wavenumber(double coeff, std::size_t pos) const {
        const double k = coeff / two_pi;
        const double rounded = std::round(k);
        if (std::abs(k - rounded) > 1e-9) {
            fail("trig argument must use integer multiples of 2*pi*x (or *y) to stay periodic",
                 pos);
        }
        return static_cast<int>(rounded);
    }

    // Linear form in x and y with numeric coefficients; used for trig args.
    LinForm parse_linform() {
        LinForm acc = parse_lin_term();
        while (lexer_.peek().kind == TokKind::Plus || lexer_.peek().kind == TokKind::Minus) {
            const bool minus = lexer_.next().kind == TokKind::Minus;
            LinForm rhs = parse_lin_term();
            const double s = minus ? -1.0 : 1.0;
            acc.cx += s * rhs.cx;
            acc.cy += s * rhs.cy;
            acc.c0 += s * rhs.c0;
        }
        return acc;
    }

    LinForm parse_lin_term() {
        LinForm acc = parse_lin_factor();
        while (lexer_.peek().kind == TokKind::Star || lexer_.peek().kind == TokKind::Slash) {
            const Token op = lexer_.next();
            LinForm rhs = parse_lin_factor();
            const bool acc_const = acc.cx == 0.0 && acc.cy == 0.0;
            const bool rhs_const = rhs.cx == 0.0 && rhs.cy == 0.0;
            if (op.kind == TokKind::Star) {
                if (!acc_const && !rhs_const) {
                    fail("trig argument must be linear in x and y", op.pos);
                }
                if (acc_const) std::swap(acc, rhs);
                acc.cx *= rhs.c0;
                acc.cy *= rhs.c0;
                acc.c0 *= rhs.c0;
            } else {
                if (!rhs_const || rhs.c0 == 0.0) fail("bad division in trig argument", op.pos);
                acc.cx /= rhs.c0;
                acc.cy /= rhs.c0;
                acc.c0 /= rhs.c0;
            }
        }
        return acc;
    }

    LinForm parse_lin_factor() {
        const Token tok = lexer_.next();
        switch (tok.kind) {
            case TokKind::Number:
                return {0.0, 0.0, tok.number};
            case TokKind::Minus: {
                LinForm f = parse_lin_factor();
                f.cx = -f.cx;
                f.cy = -f.cy;
                f.c0 = -f.c0;
                return f;
            }
            case TokKind::LParen: {
                LinForm f = parse_linform();
                expect(TokKind::RParen, "expected ')'");
                return f;
            }
            case TokKind::Ident:
                if (tok.ident == "x") return {1.0, 0.0, 0.0};
                if (tok.ident == "y") return {0.0, 1.0, 0.0};
                if (tok.ident == "pi") return {0.0, 0.0, std::numbers::pi};
                fail("only x, y, pi and numbers may appear inside trig arguments", tok.pos);
            default:
                fail("unexpected token in trig argument", tok.pos);
        }
    }

    void expect(TokKind kind, const std::string& msg) {
        const Token tok = lexer_.next();
        if (tok.kind != kind) fail(msg, tok.pos);
    }

    Lexer lexer_;
    std::vector<Var> allowed_;
};

// Canonical sum-of-products form: trig factors sorted within each term, like
// terms merged, zero terms dropped.
std::vector<ExprTerm> normalize(std::vector<ExprTerm> terms) {
    auto trig_key = [](const TrigFactor& t) {
        return std::tuple<int, int, int, double>(t.is_sin ? 1 : 0, t.kx, t.ky, t.phase);
    };
    for (auto& term : terms) {
        std::sort(term.trigs.begin(), term.trigs.end(),
                  [&](const TrigFactor& a, const TrigFactor& b) { return trig_key(a) < trig_key(b); });
    }
    auto term_key = [&](const ExprTerm& t) {
        std::vector<std::tuple<int, int, int, double>> trigs;
        trigs.reserve(t.trigs.size());
        for (const auto& f : t.trigs) trigs.push_back(trig_key(f));
        return std::tuple(t.pow_t, t.pow_alpha, t.pow_beta, trigs);
    };
    std::sort(terms.begin(), terms.end(),
              [&](const ExprTerm& a, const ExprTerm& b) { return term_key(a) < term_key(b); });
    std::vector<ExprTerm> merged;
    for (auto& term : terms) {
        if (!merged.empty() && term_key(merged.back()) == term_key(term)) {
            merged.back().coef += term.coef;
        } else {
            merged.push_back(std::move(term));
        }
    }
    std::erase_if(merged, [](const ExprTerm& t) { return t.coef == 0.0; });
    return merged;
}

double eval_term(const ExprTerm& term, const VarValues& v) {
    double value = term.coef;
    for (int i = 0; i < term.pow_t; ++i) value *= v.t;
    for (int i = 0; i < term.pow_alpha; ++i) value *= v.alpha;
    for (int i = 0; i < term.pow_beta; ++i) value *= v.beta;
    for (const auto& trig : term.trigs) {
        const double arg = two_pi * (trig.kx * v.x + trig.ky * v.y) + trig.phase;
        value *= trig.is_sin ? std::sin(arg) : std::cos(arg);
    }
    return value;
}

} // namespace

Expression Expression::parse(const std::string& text, const std::vector<Var>& allowed) {
    Parser parser(text, allowed);
    Expression e;
    e.terms_ = normalize(parser.run());
    return e;
}

Expression Expression::constant(double value) {
    Expression e;
    if (value != 0.0) e.terms_.push_back(ExprTerm{value, 0, 0, 0, {}});
    return e;
}

double Expression::eval(const VarValues& v) const {
    double sum = 0.0;
    for (const auto& term : terms_) sum += eval_term(term, v);
    return sum;
}

Expression Expression::deriv_t() const {
    Expression out;
    for (const auto& term : terms_) {
        if (term.pow_t == 0) continue;
        ExprTerm d = term;
        d.coef *= term.pow_t;
        d.pow_t -= 1;
        out.terms_.push_back(std::move(d));
    }
    out.terms_ = normalize(std::move(out.terms_));
    return out;
}

Expression Expression::deriv_spatial(bool wrt_x) const {
    Expression out;
    for (const auto& term : terms_) {
        for (std::size_t j = 0; j < term.trigs.size(); ++j) {
            const TrigFactor& trig = term.trigs[j];
            const int k = wrt_x ? trig.kx : trig.ky;
            if (k == 0) continue;
            ExprTerm d = term;
            TrigFactor& replaced = d.trigs[j];
            if (trig.is_sin) {
                replaced.is_sin = false;  // sin' = cos
                d.coef *= two_pi * k;
            } else {
                replaced.is_sin = true;  // cos' = -sin
                d.coef *= -two_pi * k;
            }
            if (d.coef != 0.0) out.terms_.push_back(std::move(d));
        }
    }
    out.terms_ = normalize(std::move(out.terms_));
    return out;
}

Expression Expression::deriv_x() const { return deriv_spatial(true); }

Expression Expression::deriv_y() const { return deriv_spatial(false); }

bool Expression::uses(Var v) const {
    for (const auto& term : terms_) {
        switch (v) {
            case Var::T:
                if (term.pow_t > 0) return true;
                break;
            case Var::Alpha:
                if (term.pow_alpha > 0) return true;
                break;
            case Var::Beta:
                if (term.pow_beta > 0) return true;
                break;
            case Var::X:
                for (const auto& trig : term.trigs) {
                    if (trig.kx != 0) return true;
                }
                break;
            case Var::Y:
                for (const auto& trig : term.trigs) {
                    if (trig.ky != 0) return true;
                }
                break;
        }
    }
    return false;
}

double Expression::sup_bound(double horizon) const {
    double sum = 0.0;
    for (const auto& term : terms_) {
        double factor = std::abs(term.coef);
        for (int i = 0; i < term.pow_t; ++i) factor *= std::max(horizon, 1e-300);
        sum += factor;
    }
    return sum;
}

} // namespace gmfg
