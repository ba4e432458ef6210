#pragma once

#include <string>
#include <vector>

namespace rdstab {

// Scalar coefficient function on [0,1]: a constant, a polynomial in x, or a
// piecewise polynomial with continuity validated at the breakpoints.
// Text forms accepted by parse():
//   "1.0"
//   "poly(c0, c1, c2, ...)"            c0 + c1 x + c2 x^2 + ...
//   "pw(b1, ..., bk; poly(...); ...)"  k breakpoints in (0,1), k+1 pieces
class Coefficient {
 public:
  Coefficient() : Coefficient(0.0) {}
  static Coefficient constant(double c);
  static Coefficient polynomial(std::vector<double> coeffs);
  static Coefficient piecewise(std::vector<double> breaks,
                               std::vector<std::vector<double>> pieces);
  static Coefficient parse(const std::string& text);

  double operator()(double x) const;
  double deriv(double x) const;

  bool is_constant() const;
  double constant_value() const;  // valid only if is_constant()

  // sampled extrema over [0,1] (exact for constants and affine pieces,
  // dense sampling otherwise)
  double min_value(int samples = 8193) const;
  double max_value(int samples = 8193) const;

  Coefficient shifted(double c) const;  // this + c

  std::string to_string() const;

 private:
  explicit Coefficient(double c) : breaks_{}, pieces_{{c}} {}
  std::vector<double> breaks_;                 // interior breakpoints, increasing
  std::vector<std::vector<double>> pieces_;    // per-piece polynomial coefficients
  const std::vector<double>& piece_at(double x) const;
};

}  // namespace rdstab
