#pragma once

// Conjugating sequences g_n = outer (u(s_n) diag(a_n, 1/a_n), (alpha_n, beta_n))
// whose parameters are finite power-law sums, and their exact asymptotics.

#include "chabauty/catalog.hpp"

#include <json.hpp>

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace chabauty {

struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d = 1);

  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  [[nodiscard]] std::string to_string() const;

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator-(Rational a) { return {-a.num, a.den}; }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);
};

enum class LimitKind { Finite, PosInf, NegInf, None };

struct Limit {
  LimitKind kind = LimitKind::None;
  double value = 0;

  static Limit finite(double v) { return {LimitKind::Finite, v}; }
  static Limit none() { return {}; }

  [[nodiscard]] bool is_finite() const { return kind == LimitKind::Finite; }
  [[nodiscard]] bool is_infinite() const { return kind == LimitKind::PosInf || kind == LimitKind::NegInf; }
  [[nodiscard]] bool is_zero(double tol = 1e-12) const { return is_finite() && std::abs(value) <= tol; }
  /// Finite value, or +-infinity.
  [[nodiscard]] double extended() const;
  [[nodiscard]] std::string to_string() const;
};

/// sum_i c_i n^{p_i} with rational exponents, stored by decreasing exponent.
class PowerSum {
 public:
  using Terms = std::map<Rational, double, std::greater<>>;

  PowerSum() = default;
  static PowerSum constant(double c);
  static PowerSum monomial(double c, Rational p);

  /// Parses e.g. "n^2 - 3 n + 1/n", "2*n^(1/2)", "-0.5 n^(-3/2)".
  static PowerSum parse(std::string_view text);
  /// Accepts a number, a string for parse(), or a list of {coef, power} terms.
  static PowerSum from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;

  [[nodiscard]] const Terms& terms() const { return terms_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  [[nodiscard]] bool is_constant() const;
  [[nodiscard]] double eval(double n) const;
  /// Leading exponent and coefficient; requires !is_zero().
  [[nodiscard]] std::pair<Rational, double> leading() const;
  [[nodiscard]] Limit limit() const;
  [[nodiscard]] std::string to_string() const;

  friend PowerSum operator+(const PowerSum& a, const PowerSum& b);
  friend PowerSum operator-(const PowerSum& a, const PowerSum& b);
  friend PowerSum operator*(const PowerSum& a, const PowerSum& b);
  friend PowerSum operator*(double c, const PowerSum& a);

  /// Asymptotic expansion of a / b down to exponent `floor`; nullopt if b = 0.
  static std::optional<PowerSum> divide(const PowerSum& a, const PowerSum& b,
                                        Rational floor = Rational(-4));

 private:
  void compact(double scale);
  Terms terms_;
};

/// Limits of the parameters and of the ratios used by the case analyses.
struct AsymptoticProfile {
  Limit a, s, alpha, beta;
  bool a_is_one = false;    // a_n == 1 identically
  bool s_is_zero = false;   // s_n == 0 identically
  bool s_is_constant = false;
  bool v_is_zero = false;   // alpha_n == beta_n == 0 identically
  bool v_diverges = false;
  Limit alpha_over_beta, beta_over_alpha, s_over_beta, beta_over_s, beta2_over_alpha;
  Limit d;        // lim (2 s_n - alpha_n / beta_n)
  Limit d_prime;  // lim (alpha_n / s_n - 2 beta_n)
  Limit slope;    // lim -beta_n / (alpha_n - 2 s_n beta_n)
  /// Limiting direction angle phi of v_n, with v_n / |v_n| -> (cos phi, sin phi),
  /// when v_n diverges.
  std::optional<double> v_angle;

  [[nodiscard]] nlohmann::json to_json() const;
};

struct SequenceSpec {
  std::string name;
  std::string theorem;  // "1.5" .. "1.9", or empty
  std::string label;    // free-form case label
  SubgroupDescriptor base;
  PowerSum a = PowerSum::constant(1);
  PowerSum s;
  PowerSum alpha;
  PowerSum beta;
  Element outer;

  /// g_n = outer (u(s_n) diag(a_n, 1/a_n), (alpha_n, beta_n)).
  [[nodiscard]] Element conjugator_at(double n) const;
  [[nodiscard]] SubgroupDescriptor conjugate_at(double n) const;

  /// Throws std::invalid_argument when a_n is not positive on n >= 1.
  void validate() const;

  static SequenceSpec from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

AsymptoticProfile extract_profile(const SequenceSpec& s);

}  // namespace chabauty
