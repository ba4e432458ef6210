#include "core/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rdstab {

namespace {

double poly_eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

double poly_deriv(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 1;) v = v * x + c[i] * static_cast<double>(i);
  return v;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) throw std::invalid_argument("empty number in list: '" + s + "'");
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("bad number '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

std::vector<double> parse_poly(const std::string& s) {
  auto t = trim(s);
  if (t.rfind("poly(", 0) != 0 || t.back() != ')')
    throw std::invalid_argument("expected poly(...), got '" + s + "'");
  return parse_number_list(t.substr(5, t.size() - 6));
}

}  // namespace

Coefficient Coefficient::constant(double c) { return Coefficient(c); }

Coefficient Coefficient::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("empty polynomial");
  Coefficient f(0.0);
  f.pieces_ = {std::move(coeffs)};
  return f;
}

Coefficient Coefficient::piecewise(std::vector<double> breaks,
                                   std::vector<std::vector<double>> pieces) {
  if (pieces.size() != breaks.size() + 1)
    throw std::invalid_argument("piecewise: need one more piece than breakpoints");
  if (!std::is_sorted(breaks.begin(), breaks.end()))
    throw std::invalid_argument("piecewise: breakpoints must increase");
  for (double b : breaks)
    if (!(b > 0.0 && b < 1.0))
      throw std::invalid_argument("piecewise: breakpoints must lie in (0,1)");
  Coefficient f(0.0);
  f.breaks_ = std::move(breaks);
  f.pieces_ = std::move(pieces);
  // the operator coefficients must be continuous; reject jumps
  for (std::size_t i = 0; i < f.breaks_.size(); ++i) {
    double b = f.breaks_[i];
    double lo = poly_eval(f.pieces_[i], b);
    double hi = poly_eval(f.pieces_[i + 1], b);
    if (std::abs(lo - hi) > 1e-10 * (1.0 + std::abs(lo)))
      throw std::invalid_argument("piecewise coefficient discontinuous at breakpoint");
  }
  return f;
}

Coefficient Coefficient::parse(const std::string& text) {
  auto t = trim(text);
  if (t.rfind("poly(", 0) == 0) return polynomial(parse_poly(t));
  if (t.rfind("pw(", 0) == 0) {
    if (t.back() != ')') throw std::invalid_argument("unterminated pw(...)");
    std::string body = t.substr(3, t.size() - 4);
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char ch : body) {
      if (ch == '(') depth++;
      if (ch == ')') depth--;
      if (ch == ';' && depth == 0) {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    if (parts.size() < 3) throw std::invalid_argument("pw needs breaks and >=2 pieces");
    auto breaks = parse_number_list(parts[0]);
    std::vector<std::vector<double>> pieces;
    for (std::size_t i = 1; i < parts.size(); ++i) pieces.push_back(parse_poly(parts[i]));
    return piecewise(std::move(breaks), std::move(pieces));
  }
  std::size_t pos = 0;
  double v = std::stod(t, &pos);
  if (pos != t.size()) throw std::invalid_argument("bad coefficient '" + text + "'");
  return constant(v);
}

const std::vector<double>& Coefficient::piece_at(double x) const {
  std::size_t i = std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin();
  return pieces_[i];
}

double Coefficient::operator()(double x) const { return poly_eval(piece_at(x), x); }

double Coefficient::deriv(double x) const { return poly_deriv(piece_at(x), x); }

bool Coefficient::is_constant() const {
  for (const auto& p : pieces_)
    for (std::size_t i = 1; i < p.size(); ++i)
      if (p[i] != 0.0) return false;
  for (std::size_t i = 1; i < pieces_.size(); ++i)
    if (pieces_[i][0] != pieces_[0][0]) return false;
  return true;
}

double Coefficient::constant_value() const { return pieces_[0][0]; }

double Coefficient::min_value(int samples) const {
  if (is_constant()) return constant_value();
  double m = (*this)(0.0);
  for (int i = 1; i < samples; ++i) m = std::min(m, (*this)(double(i) / (samples - 1)));
  return m;
}

double Coefficient::max_value(int samples) const {
  if (is_constant()) return constant_value();
  double m = (*this)(0.0);
  for (int i = 1; i < samples; ++i) m = std::max(m, (*this)(double(i) / (samples - 1)));
  return m;
}

Coefficient Coefficient::shifted(double c) const {
  Coefficient f = *this;
  for (auto& p : f.pieces_) p[0] += c;
  return f;
}

std::string Coefficient::to_string() const {
  std::ostringstream os;
  os.precision(17);
  if (is_constant()) {
    os << constant_value();
    return os.str();
  }
  auto emit_poly = [&os](const std::vector<double>& p) {
    os << "poly(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    os << ")";
  };
  if (breaks_.empty()) {
    emit_poly(pieces_[0]);
    return os.str();
  }
  os << "pw(";
  for (std::size_t i = 0; i < breaks_.size(); ++i) os << (i ? "," : "") << breaks_[i];
  for (const auto& p : pieces_) {
    os << ";";
    emit_poly(p);
  }
  os << ")";
  return os.str();
}

}  // namespace rdstab
