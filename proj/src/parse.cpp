#include "qrlab/parse.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "qrlab/error.hpp"

namespace qrlab {

namespace {

enum class Tok {
    end, ident, number, imag_number,  // 2i, 3.5i
    plus, minus, star, slash, caret,
    lparen, rparen, comma, semicolon,
    le, lt, ge, gt, arrow, colon, eq,
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    double value = 0.0;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return cur_; }

    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

    struct State {
        size_t pos;
        int line, col;
        Token cur;
    };
    State save() const { return {pos_, line_, col_, cur_}; }
    void restore(const State& s) {
        pos_ = s.pos;
        line_ = s.line;
        col_ = s.col;
        cur_ = s.cur;
    }

    [[noreturn]] void error(const std::string& msg, const Token& at) const {
        std::ostringstream os;
        os << "parse error at line " << at.line << ", col " << at.col << ": " << msg;
        if (!at.text.empty()) os << " (near '" << at.text << "')";
        fail(ErrorCode::parse_error, os.str());
    }

private:
    void advance() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {  // comment to end of line
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++line_;
                col_ = 1;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++col_;
                ++pos_;
            } else {
                break;
            }
        }
        cur_ = Token{};
        cur_.line = line_;
        cur_.col = col_;
        if (pos_ >= src_.size()) {
            cur_.kind = Tok::end;
            return;
        }
        char c = src_[pos_];
        auto one = [&](Tok k) {
            cur_.kind = k;
            cur_.text = std::string(1, c);
            ++pos_;
            ++col_;
        };
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
                ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                size_t e = pos_ + 1;
                if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
                if (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) {
                    pos_ = e;
                    while (pos_ < src_.size() &&
                           std::isdigit(static_cast<unsigned char>(src_[pos_])))
                        ++pos_;
                }
            }
            cur_.text = src_.substr(start, pos_ - start);
            cur_.value = std::strtod(cur_.text.c_str(), nullptr);
            cur_.kind = Tok::number;
            if (pos_ < src_.size() && src_[pos_] == 'i' &&
                (pos_ + 1 >= src_.size() ||
                 !(std::isalnum(static_cast<unsigned char>(src_[pos_ + 1])) ||
                   src_[pos_ + 1] == '_'))) {
                cur_.kind = Tok::imag_number;
                ++pos_;
            }
            col_ += int(pos_ - start);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                          src_[pos_] == '_'))
                ++pos_;
            cur_.text = src_.substr(start, pos_ - start);
            cur_.kind = Tok::ident;
            col_ += int(pos_ - start);
            return;
        }
        switch (c) {
            case '+': one(Tok::plus); return;
            case '-':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
                    cur_.kind = Tok::arrow;
                    cur_.text = "->";
                    pos_ += 2;
                    col_ += 2;
                    return;
                }
                one(Tok::minus);
                return;
            case '*': one(Tok::star); return;
            case '/': one(Tok::slash); return;
            case '^': one(Tok::caret); return;
            case '(': one(Tok::lparen); return;
            case ')': one(Tok::rparen); return;
            case ',': one(Tok::comma); return;
            case ';': one(Tok::semicolon); return;
            case ':': one(Tok::colon); return;
            case '=': one(Tok::eq); return;
            case '<':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
                    cur_.kind = Tok::le;
                    cur_.text = "<=";
                    pos_ += 2;
                    col_ += 2;
                } else {
                    one(Tok::lt);
                }
                return;
            case '>':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
                    cur_.kind = Tok::ge;
                    cur_.text = ">=";
                    pos_ += 2;
                    col_ += 2;
                } else {
                    one(Tok::gt);
                }
                return;
            default: {
                cur_.text = std::string(1, c);
                error("unexpected character", cur_);
            }
        }
    }

    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token cur_;
};

bool is_function(const std::string& s) {
    return s == "re" || s == "im" || s == "abs" || s == "conj" || s == "sqrt" || s == "exp";
}

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    PiecewiseMap parse_map() {
        std::string name = "map";
        ParamEnv params;
        Domain domain;
        bool reflect = false;
        std::vector<Piece> pieces;
        while (lex_.peek().kind != Tok::end) {
            Token t = lex_.peek();
            if (t.kind != Tok::ident) lex_.error("expected a header or piece keyword", t);
            if (t.text == "name") {
                lex_.take();
                expect(Tok::colon, "':'");
                Token n = lex_.take();
                if (n.kind != Tok::ident) lex_.error("expected map name", n);
                name = n.text;
            } else if (t.text == "param") {
                lex_.take();
                Token n = lex_.take();
                if (n.kind != Tok::ident) lex_.error("expected parameter name", n);
                if (n.text == "z" || n.text == "i" || n.text == "true" || is_function(n.text))
                    lex_.error("reserved word used as parameter name", n);
                expect(Tok::eq, "'='");
                params[n.text] = parse_signed_real();
            } else if (t.text == "domain") {
                lex_.take();
                expect(Tok::colon, "':'");
                domain = parse_domain();
            } else if (t.text == "reflect") {
                lex_.take();
                expect(Tok::colon, "':'");
                Token n = lex_.take();
                bool ok = n.kind == Tok::ident && n.text == "x";
                if (ok && lex_.peek().kind == Tok::minus) {
                    lex_.take();
                    Token a = lex_.take();
                    ok = a.kind == Tok::ident && a.text == "axis";
                } else {
                    ok = false;
                }
                if (!ok) lex_.error("expected 'x-axis'", n);
                reflect = true;
            } else if (t.text == "piece") {
                lex_.take();
                expect(Tok::colon, "':'");
                Guard g = parse_guard();
                expect(Tok::arrow, "'->'");
                ExprPtr e = parse_expr();
                pieces.push_back(Piece{std::move(g), std::move(e)});
            } else {
                lex_.error("unknown keyword", t);
            }
        }
        if (pieces.empty())
            fail(ErrorCode::parse_error, "parse error: map has no pieces");
        validate_guards(pieces);
        return PiecewiseMap(std::move(name), std::move(params), std::move(domain), reflect,
                            std::move(pieces));
    }

    ExprPtr parse_expr() { return parse_sum(); }

private:
    void expect(Tok k, const char* what) {
        Token t = lex_.take();
        if (t.kind != k) lex_.error(std::string("expected ") + what, t);
    }

    double parse_signed_real() {
        bool neg = false;
        if (lex_.peek().kind == Tok::minus) {
            lex_.take();
            neg = true;
        } else if (lex_.peek().kind == Tok::plus) {
            lex_.take();
        }
        Token t = lex_.take();
        if (t.kind != Tok::number) lex_.error("expected a real number", t);
        return neg ? -t.value : t.value;
    }

    cplx parse_complex_literal() {
        // a, bi, a+bi, a-bi with optional leading sign
        double re = 0.0, im = 0.0;
        bool neg = false;
        if (lex_.peek().kind == Tok::minus) {
            lex_.take();
            neg = true;
        }
        Token t = lex_.take();
        if (t.kind == Tok::imag_number) {
            im = neg ? -t.value : t.value;
            return cplx(0.0, im);
        }
        if (t.kind == Tok::ident && t.text == "i") return cplx(0.0, neg ? -1.0 : 1.0);
        if (t.kind != Tok::number) lex_.error("expected a complex literal", t);
        re = neg ? -t.value : t.value;
        if (lex_.peek().kind == Tok::plus || lex_.peek().kind == Tok::minus) {
            bool ineg = lex_.take().kind == Tok::minus;
            Token u = lex_.take();
            if (u.kind == Tok::imag_number)
                im = ineg ? -u.value : u.value;
            else if (u.kind == Tok::ident && u.text == "i")
                im = ineg ? -1.0 : 1.0;
            else
                lex_.error("expected imaginary part", u);
        }
        return cplx(re, im);
    }

    Domain parse_domain() {
        Token t = lex_.take();
        if (t.kind != Tok::ident) lex_.error("expected a domain kind", t);
        Domain d;
        if (t.text == "plane") {
            d.kind = Domain::Kind::plane;
        } else if (t.text == "disk") {
            d.kind = Domain::Kind::disk;
            expect(Tok::lparen, "'('");
            d.center = parse_complex_literal();
            expect(Tok::comma, "','");
            d.radius = parse_signed_real();
            expect(Tok::rparen, "')'");
            if (d.radius <= 0.0) fail(ErrorCode::parse_error, "disk radius must be positive");
        } else if (t.text == "halfplane") {
            d.kind = Domain::Kind::halfplane;
            expect(Tok::lparen, "'('");
            d.normal = parse_complex_literal();
            expect(Tok::rparen, "')'");
            if (d.normal == cplx(0.0, 0.0))
                fail(ErrorCode::parse_error, "halfplane direction must be nonzero");
        } else if (t.text == "polygon") {
            d.kind = Domain::Kind::polygon;
            expect(Tok::lparen, "'('");
            d.vertices.push_back(parse_complex_literal());
            while (lex_.peek().kind == Tok::semicolon) {
                lex_.take();
                d.vertices.push_back(parse_complex_literal());
            }
            expect(Tok::rparen, "')'");
            if (d.vertices.size() < 3)
                fail(ErrorCode::parse_error, "polygon needs at least 3 vertices");
        } else {
            lex_.error("unknown domain kind", t);
        }
        return d;
    }

    // guard := andexpr ('or' andexpr)*
    Guard parse_guard() {
        Guard g = parse_guard_and();
        if (lex_.peek().kind == Tok::ident && lex_.peek().text == "or") {
            Guard d;
            d.kind = Guard::Kind::disj;
            d.children.push_back(std::move(g));
            while (lex_.peek().kind == Tok::ident && lex_.peek().text == "or") {
                lex_.take();
                d.children.push_back(parse_guard_and());
            }
            return d;
        }
        return g;
    }

    Guard parse_guard_and() {
        Guard g = parse_guard_atom();
        if (lex_.peek().kind == Tok::ident && lex_.peek().text == "and") {
            Guard c;
            c.kind = Guard::Kind::conj;
            c.children.push_back(std::move(g));
            while (lex_.peek().kind == Tok::ident && lex_.peek().text == "and") {
                lex_.take();
                c.children.push_back(parse_guard_atom());
            }
            return c;
        }
        return g;
    }

    Guard parse_guard_atom() {
        Token t = lex_.peek();
        if (t.kind == Tok::ident && t.text == "true") {
            lex_.take();
            Guard g;
            g.kind = Guard::Kind::always;
            return g;
        }
        if (t.kind == Tok::ident && t.text == "not") {
            lex_.take();
            Guard g;
            g.kind = Guard::Kind::neg;
            g.children.push_back(parse_guard_atom());
            return g;
        }
        // '(' may open a nested guard or a parenthesized expression operand.
        // Try the guard reading first and backtrack if it does not pan out.
        if (t.kind == Tok::lparen) {
            Lexer::State mark = lex_.save();
            try {
                lex_.take();
                Guard inner = parse_guard();
                expect(Tok::rparen, "')'");
                Tok after = lex_.peek().kind;
                bool continues_expr = after == Tok::plus || after == Tok::minus ||
                                      after == Tok::star || after == Tok::slash ||
                                      after == Tok::caret || after == Tok::le ||
                                      after == Tok::lt || after == Tok::ge || after == Tok::gt;
                if (!continues_expr) return inner;
            } catch (const Error&) {
            }
            lex_.restore(mark);
        }
        Guard g;
        g.kind = Guard::Kind::cmp;
        ExprPtr lhs = parse_expr();
        Token op = lex_.take();
        switch (op.kind) {
            case Tok::le: g.cmp.rel = Rel::le; break;
            case Tok::lt: g.cmp.rel = Rel::lt; break;
            case Tok::ge: g.cmp.rel = Rel::ge; break;
            case Tok::gt: g.cmp.rel = Rel::gt; break;
            default: lex_.error("expected a comparison operator", op);
        }
        g.cmp.lhs = std::move(lhs);
        g.cmp.rhs = parse_expr();
        return g;
    }

    ExprPtr parse_sum() {
        ExprPtr e = parse_term();
        for (;;) {
            Tok k = lex_.peek().kind;
            if (k == Tok::plus) {
                lex_.take();
                e = Expr::binary(ExprKind::add, e, parse_term());
            } else if (k == Tok::minus) {
                lex_.take();
                e = Expr::binary(ExprKind::sub, e, parse_term());
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_unary();
        for (;;) {
            Tok k = lex_.peek().kind;
            if (k == Tok::star) {
                lex_.take();
                e = Expr::binary(ExprKind::mul, e, parse_unary());
            } else if (k == Tok::slash) {
                lex_.take();
                e = Expr::binary(ExprKind::div, e, parse_unary());
            } else {
                return e;
            }
        }
    }

    ExprPtr parse_unary() {
        if (lex_.peek().kind == Tok::minus) {
            lex_.take();
            return Expr::unary(ExprKind::neg, parse_unary());
        }
        if (lex_.peek().kind == Tok::plus) {
            lex_.take();
            return parse_unary();
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        while (lex_.peek().kind == Tok::caret) {
            lex_.take();
            bool neg = false;
            if (lex_.peek().kind == Tok::minus) {
                lex_.take();
                neg = true;
            }
            Token t = lex_.take();
            if (t.kind != Tok::number || t.value != double(int(t.value)))
                lex_.error("exponent must be an integer literal", t);
            base = Expr::pow(base, neg ? -int(t.value) : int(t.value));
        }
        return base;
    }

    ExprPtr parse_atom() {
        Token t = lex_.take();
        switch (t.kind) {
            case Tok::number: return Expr::literal(cplx(t.value, 0.0));
            case Tok::imag_number: return Expr::literal(cplx(0.0, t.value));
            case Tok::lparen: {
                ExprPtr e = parse_expr();
                expect(Tok::rparen, "')'");
                return e;
            }
            case Tok::ident: {
                if (t.text == "z") return Expr::variable();
                if (t.text == "i") return Expr::literal(cplx(0.0, 1.0));
                if (is_function(t.text)) {
                    expect(Tok::lparen, "'('");
                    ExprPtr arg = parse_expr();
                    expect(Tok::rparen, "')'");
                    ExprKind k = t.text == "re" ? ExprKind::re
                                 : t.text == "im" ? ExprKind::im
                                 : t.text == "abs" ? ExprKind::abs
                                 : t.text == "conj" ? ExprKind::conj
                                 : t.text == "sqrt" ? ExprKind::sqrt
                                                    : ExprKind::exp;
                    return Expr::unary(k, arg);
                }
                return Expr::param(t.text);
            }
            default: lex_.error("expected an expression", t);
        }
    }

    void validate_guards(const std::vector<Piece>& pieces) {
        for (const Piece& p : pieces) {
            std::vector<const Guard*> stack{&p.guard};
            while (!stack.empty()) {
                const Guard* g = stack.back();
                stack.pop_back();
                if (g->kind == Guard::Kind::cmp) {
                    if (!is_real_valued(*g->cmp.lhs) || !is_real_valued(*g->cmp.rhs))
                        fail(ErrorCode::non_real_guard,
                             "guard comparison between complex-valued expressions");
                }
                for (const Guard& c : g->children) stack.push_back(&c);
            }
        }
    }

    Lexer lex_;
};

} // namespace

PiecewiseMap parse_map(const std::string& source) { return Parser(source).parse_map(); }

ExprPtr parse_expr(const std::string& source) { return Parser(source).parse_expr(); }

} // namespace qrlab
