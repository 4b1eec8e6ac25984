#pragma once

// Closed expression grammar for potentials and test functions:
//
//   expr   := term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := number | 'pi' | x<i> | y<i> | '(' expr ')'
//           | ('sin'|'cos'|'exp') '(' expr ')' | '-' factor
//
// Smoothness is automatic; 1-periodicity in every y-variable is enforced
// syntactically: a y-variable may appear only inside sin/cos whose argument
// is a product of numeric literals, pi, and that single y-variable, with the
// total coefficient an integer multiple of 2*pi. Printing is precedence-aware
// and numbers round-trip exactly, so parse(print(e)) == e structurally.

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "mfgh/common.hpp"
#include "mfgh/errors.hpp"

namespace mfgh {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { num, pi, var, add, sub, mul, neg, sin, cos, exp };
  Kind kind;
  double num = 0.0;      // kind == num
  char var_kind = 'x';   // kind == var: 'x' or 'y'
  int var_index = 1;     // kind == var: 1-based axis
  ExprPtr a, b;          // children (a only for unary)
};

inline ExprPtr make_num(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::num;
  e->num = v;
  return e;
}
inline ExprPtr make_pi() {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::pi;
  return e;
}
inline ExprPtr make_var(char vk, int idx) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::var;
  e->var_kind = vk;
  e->var_index = idx;
  return e;
}
inline ExprPtr make_unary(Expr::Kind k, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->a = std::move(a);
  return e;
}
inline ExprPtr make_binary(Expr::Kind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

inline bool expr_equal(const Expr& x, const Expr& y) {
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Expr::Kind::num: return x.num == y.num;
    case Expr::Kind::pi: return true;
    case Expr::Kind::var:
      return x.var_kind == y.var_kind && x.var_index == y.var_index;
    case Expr::Kind::neg:
    case Expr::Kind::sin:
    case Expr::Kind::cos:
    case Expr::Kind::exp:
      return expr_equal(*x.a, *y.a);
    default:
      return expr_equal(*x.a, *y.a) && expr_equal(*x.b, *y.b);
  }
}

inline double eval_expr(const Expr& e, const double* x, const double* y) {
  switch (e.kind) {
    case Expr::Kind::num: return e.num;
    case Expr::Kind::pi: return M_PI;
    case Expr::Kind::var:
      return e.var_kind == 'x' ? x[e.var_index - 1] : y[e.var_index - 1];
    case Expr::Kind::add: return eval_expr(*e.a, x, y) + eval_expr(*e.b, x, y);
    case Expr::Kind::sub: return eval_expr(*e.a, x, y) - eval_expr(*e.b, x, y);
    case Expr::Kind::mul: return eval_expr(*e.a, x, y) * eval_expr(*e.b, x, y);
    case Expr::Kind::neg: return -eval_expr(*e.a, x, y);
    case Expr::Kind::sin: return std::sin(eval_expr(*e.a, x, y));
    case Expr::Kind::cos: return std::cos(eval_expr(*e.a, x, y));
    case Expr::Kind::exp: return std::exp(eval_expr(*e.a, x, y));
  }
  return 0.0;
}

inline bool expr_uses_var(const Expr& e, char vk, int idx_or_any /* 0 = any */) {
  switch (e.kind) {
    case Expr::Kind::num:
    case Expr::Kind::pi:
      return false;
    case Expr::Kind::var:
      return e.var_kind == vk &&
             (idx_or_any == 0 || e.var_index == idx_or_any);
    case Expr::Kind::neg:
    case Expr::Kind::sin:
    case Expr::Kind::cos:
    case Expr::Kind::exp:
      return expr_uses_var(*e.a, vk, idx_or_any);
    default:
      return expr_uses_var(*e.a, vk, idx_or_any) ||
             expr_uses_var(*e.b, vk, idx_or_any);
  }
}

namespace detail {

struct Token {
  enum class Type { number, ident, plus, minus, star, lparen, rparen, end };
  Type type;
  double num = 0.0;
  std::string text;
  std::size_t pos = 0;
};

inline std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
      if (ec != std::errc{})
        fail(errc::syntax_error,
             "bad number at position " + std::to_string(i));
      t.type = Token::Type::number;
      t.num = v;
      i = static_cast<std::size_t>(p - s.data());
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j]))))
        ++j;
      t.type = Token::Type::ident;
      t.text = s.substr(i, j - i);
      i = j;
    } else {
      switch (c) {
        case '+': t.type = Token::Type::plus; break;
        case '-': t.type = Token::Type::minus; break;
        case '*': t.type = Token::Type::star; break;
        case '(': t.type = Token::Type::lparen; break;
        case ')': t.type = Token::Type::rparen; break;
        default:
          fail(errc::syntax_error, "unexpected character '" +
                                       std::string(1, c) + "' at position " +
                                       std::to_string(i));
      }
      ++i;
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.type = Token::Type::end;
  end.pos = s.size();
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  ExprPtr parse() {
    auto e = parse_expr();
    expect(Token::Type::end, "end of input");
    return e;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  void advance() { ++i_; }
  void expect(Token::Type t, const std::string& what) {
    if (cur().type != t)
      fail(errc::syntax_error, "expected " + what + " at position " +
                                   std::to_string(cur().pos));
    advance();
  }

  ExprPtr parse_expr() {
    auto e = parse_term();
    while (cur().type == Token::Type::plus ||
           cur().type == Token::Type::minus) {
      auto op = cur().type == Token::Type::plus ? Expr::Kind::add
                                                : Expr::Kind::sub;
      advance();
      e = make_binary(op, e, parse_term());
    }
    return e;
  }

  ExprPtr parse_term() {
    auto e = parse_factor();
    while (cur().type == Token::Type::star) {
      advance();
      e = make_binary(Expr::Kind::mul, e, parse_factor());
    }
    return e;
  }

  ExprPtr parse_factor() {
    const Token& t = cur();
    switch (t.type) {
      case Token::Type::number: {
        advance();
        return make_num(t.num);
      }
      case Token::Type::minus: {
        advance();
        return make_unary(Expr::Kind::neg, parse_factor());
      }
      case Token::Type::lparen: {
        advance();
        auto e = parse_expr();
        expect(Token::Type::rparen, "')'");
        return e;
      }
      case Token::Type::ident: {
        advance();
        if (t.text == "pi") return make_pi();
        if (t.text == "sin" || t.text == "cos" || t.text == "exp") {
          expect(Token::Type::lparen, "'(' after " + t.text);
          auto arg = parse_expr();
          expect(Token::Type::rparen, "')'");
          auto k = t.text == "sin"   ? Expr::Kind::sin
                   : t.text == "cos" ? Expr::Kind::cos
                                     : Expr::Kind::exp;
          return make_unary(k, arg);
        }
        if ((t.text[0] == 'x' || t.text[0] == 'y') && t.text.size() > 1) {
          int idx = 0;
          auto [p, ec] = std::from_chars(t.text.data() + 1,
                                         t.text.data() + t.text.size(), idx);
          if (ec == std::errc{} && p == t.text.data() + t.text.size() &&
              idx >= 1)
            return make_var(t.text[0], idx);
        }
        fail(errc::syntax_error,
             "unknown identifier '" + t.text + "' at position " +
                 std::to_string(t.pos) +
                 " (expected number, pi, x<i>, y<i>, sin, cos, exp)");
      }
      default:
        fail(errc::syntax_error,
             "expected a factor at position " + std::to_string(t.pos));
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

inline int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::add:
    case Expr::Kind::sub:
      return 1;
    case Expr::Kind::mul:
      return 2;
    case Expr::Kind::neg:
      return 3;
    default:
      return 4;
  }
}

inline void print_expr(const Expr& e, std::string& out, int parent_prec) {
  const int prec = precedence(e.kind);
  const bool parens = prec < parent_prec;
  if (parens) out += '(';
  switch (e.kind) {
    case Expr::Kind::num: out += format_double(e.num); break;
    case Expr::Kind::pi: out += "pi"; break;
    case Expr::Kind::var:
      out += e.var_kind;
      out += std::to_string(e.var_index);
      break;
    case Expr::Kind::add:
      print_expr(*e.a, out, prec);
      out += " + ";
      print_expr(*e.b, out, prec);
      break;
    case Expr::Kind::sub:
      print_expr(*e.a, out, prec);
      out += " - ";
      print_expr(*e.b, out, prec + 1);  // right child binds tighter
      break;
    case Expr::Kind::mul:
      print_expr(*e.a, out, prec);
      out += "*";
      print_expr(*e.b, out, prec);
      break;
    case Expr::Kind::neg:
      out += "-";
      print_expr(*e.a, out, prec + 1);
      break;
    case Expr::Kind::sin:
    case Expr::Kind::cos:
    case Expr::Kind::exp:
      out += e.kind == Expr::Kind::sin   ? "sin"
             : e.kind == Expr::Kind::cos ? "cos"
                                         : "exp";
      out += '(';
      print_expr(*e.a, out, 0);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

// Flatten a product chain into numeric coefficient * pi^npi * optional single
// y-variable. Returns false if anything else appears.
struct TrigArgShape {
  double coeff = 1.0;
  int pi_count = 0;
  int y_index = 0;  // 0 = none
  bool ok = true;
};

inline void flatten_trig_arg(const Expr& e, TrigArgShape& s) {
  if (!s.ok) return;
  switch (e.kind) {
    case Expr::Kind::num: s.coeff *= e.num; return;
    case Expr::Kind::pi: s.pi_count += 1; return;
    case Expr::Kind::var:
      if (e.var_kind == 'y' && s.y_index == 0) {
        s.y_index = e.var_index;
      } else {
        s.ok = false;  // x inside, or a second y factor
      }
      return;
    case Expr::Kind::mul:
      flatten_trig_arg(*e.a, s);
      flatten_trig_arg(*e.b, s);
      return;
    case Expr::Kind::neg:
      s.coeff = -s.coeff;
      flatten_trig_arg(*e.a, s);
      return;
    default:
      s.ok = false;
      return;
  }
}

// A trig argument containing y must reduce to 2*pi*k*y_i with integer k != 0.
inline void check_trig_arg_periodic(const Expr& arg) {
  TrigArgShape s;
  flatten_trig_arg(arg, s);
  if (!s.ok || s.y_index == 0)
    fail(errc::periodicity_violation,
         "y-variables may appear only inside sin/cos of 2*pi*k*y<i> with "
         "integer k");
  double total = s.coeff;
  for (int i = 0; i < s.pi_count; ++i) total *= M_PI;
  const double k = total / kTwoPi;
  const double kr = std::round(k);
  if (!(std::abs(k - kr) <= 1e-9 && std::abs(kr) >= 1.0))
    fail(errc::periodicity_violation,
         "trig argument with y" + std::to_string(s.y_index) +
             " is not an integer multiple of 2*pi*y" +
             std::to_string(s.y_index));
}

inline void check_periodicity(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::num:
    case Expr::Kind::pi:
      return;
    case Expr::Kind::var:
      if (e.var_kind == 'y')
        fail(errc::periodicity_violation,
             "bare y" + std::to_string(e.var_index) +
                 " breaks periodicity; wrap it as sin/cos(2*pi*k*y" +
                 std::to_string(e.var_index) + ")");
      return;
    case Expr::Kind::sin:
    case Expr::Kind::cos:
      if (expr_uses_var(*e.a, 'y', 0)) {
        check_trig_arg_periodic(*e.a);
        return;  // argument fully validated
      }
      check_periodicity(*e.a);
      return;
    case Expr::Kind::neg:
    case Expr::Kind::exp:
      check_periodicity(*e.a);
      return;
    default:
      check_periodicity(*e.a);
      check_periodicity(*e.b);
      return;
  }
}

inline void check_dimensions(const Expr& e, int d) {
  switch (e.kind) {
    case Expr::Kind::num:
    case Expr::Kind::pi:
      return;
    case Expr::Kind::var:
      if (e.var_index < 1 || e.var_index > d)
        fail(errc::dimension_error,
             std::string(1, e.var_kind) + std::to_string(e.var_index) +
                 " out of range for dimension " + std::to_string(d));
      return;
    case Expr::Kind::neg:
    case Expr::Kind::sin:
    case Expr::Kind::cos:
    case Expr::Kind::exp:
      check_dimensions(*e.a, d);
      return;
    default:
      check_dimensions(*e.a, d);
      check_dimensions(*e.b, d);
      return;
  }
}

}  // namespace detail

// Parse one expression; validates variable indices against d and the
// syntactic y-periodicity rule.
inline ExprPtr parse_expr_checked(const std::string& text, int d) {
  detail::Parser p(text);
  auto e = p.parse();
  detail::check_periodicity(*e);
  detail::check_dimensions(*e, d);
  return e;
}

inline std::string print_expr(const Expr& e) {
  std::string out;
  detail::print_expr(e, out, 0);
  return out;
}

}  // namespace mfgh
