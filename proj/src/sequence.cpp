#include "chabauty/sequence.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace chabauty {

// ---------------------------------------------------------------------------
// Rational

Rational::Rational(long long n, long long d) : num(n), den(d) {
  if (d == 0) throw std::invalid_argument("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
Rational operator-(Rational a, Rational b) { return a + (-b); }

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  return a.num * b.den <=> b.num * a.den;
}

std::string Rational::to_string() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

// ---------------------------------------------------------------------------
// Limit

double Limit::extended() const {
  switch (kind) {
    case LimitKind::Finite: return value;
    case LimitKind::PosInf: return kInfinity;
    case LimitKind::NegInf: return -kInfinity;
    case LimitKind::None: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string Limit::to_string() const {
  switch (kind) {
    case LimitKind::Finite: {
      std::ostringstream os;
      os << value;
      return os.str();
    }
    case LimitKind::PosInf: return "inf";
    case LimitKind::NegInf: return "-inf";
    case LimitKind::None: break;
  }
  return "none";
}

// ---------------------------------------------------------------------------
// PowerSum

namespace {

constexpr double kRelDrop = 1e-12;

double max_abs(const PowerSum::Terms& t) {
  double m = 0;
  for (const auto& [p, c] : t) m = std::max(m, std::abs(c));
  return m;
}

PowerSum truncated(const PowerSum& x, Rational floor) {
  PowerSum out;
  for (const auto& [p, c] : x.terms())
    if (p >= floor) out = out + PowerSum::monomial(c, p);
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view t) : t_(t) {}

  PowerSum parse() {
    PowerSum out;
    skip();
    if (at_end()) fail("empty expression");
    double sign = 1;
    if (peek() == '+' || peek() == '-') sign = get() == '-' ? -1 : 1;
    out = out + sign * term();
    for (skip(); !at_end(); skip()) {
      const char c = get();
      if (c != '+' && c != '-') fail(std::string("unexpected '") + c + "'");
      out = out + (c == '-' ? -1.0 : 1.0) * term();
    }
    return out;
  }

 private:
  PowerSum term() {
    skip();
    if (at_end()) fail("missing term");
    if (peek() == 'n') return PowerSum::monomial(1, npow());
    if (!is_number_start()) fail(std::string("unexpected '") + peek() + "'");
    const double coef = number();
    skip();
    if (!at_end() && peek() == '*') {
      get();
      skip();
      if (at_end() || peek() != 'n') fail("expected n after '*'");
      return PowerSum::monomial(coef, npow());
    }
    if (!at_end() && peek() == '/') {
      get();
      skip();
      if (at_end() || peek() != 'n') fail("only n powers may appear in a denominator");
      return PowerSum::monomial(coef, -npow());
    }
    if (!at_end() && peek() == 'n') return PowerSum::monomial(coef, npow());
    return PowerSum::constant(coef);
  }

  Rational npow() {
    get();  // 'n'
    skip();
    if (at_end() || peek() != '^') return Rational(1);
    get();
    skip();
    if (!at_end() && peek() == '(') {
      get();
      const Rational r = rational();
      skip();
      if (at_end() || get() != ')') fail("expected ')'");
      return r;
    }
    return rational();
  }

  Rational rational() {
    skip();
    long long sign = 1;
    if (!at_end() && (peek() == '-' || peek() == '+')) sign = get() == '-' ? -1 : 1;
    Rational r = decimal();
    skip();
    if (!at_end() && peek() == '/') {
      get();
      const Rational d = decimal();
      if (d.num == 0) fail("zero denominator in exponent");
      r = Rational(r.num * d.den, r.den * d.num);
    }
    return Rational(sign * r.num, r.den);
  }

  /// Exact rational value of a plain decimal literal.
  Rational decimal() {
    skip();
    long long num = 0, den = 1;
    bool any = false;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
      num = num * 10 + (get() - '0');
      any = true;
    }
    if (!at_end() && peek() == '.') {
      get();
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        num = num * 10 + (get() - '0');
        den *= 10;
        any = true;
      }
    }
    if (!any) fail("expected a number in exponent");
    if (den > 1'000'000'000LL) fail("exponent has too many digits");
    return Rational(num, den);
  }

  double number() {
    std::size_t used = 0;
    const std::string rest(t_.substr(pos_));
    double v = 0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("bad number");
    }
    pos_ += used;
    if (!std::isfinite(v)) fail("non-finite coefficient");
    return v;
  }

  bool is_number_start() const {
    const char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
  }
  void skip() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(t_[pos_]))) ++pos_;
  }
  [[nodiscard]] bool at_end() const { return pos_ >= t_.size(); }
  [[nodiscard]] char peek() const { return t_[pos_]; }
  char get() { return t_[pos_++]; }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("power-law expression \"" + std::string(t_) + "\": " + what);
  }

  std::string_view t_;
  std::size_t pos_ = 0;
};

Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    return PowerSum::parse("n^(" + s + ")").leading().first;
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer())
    return Rational(j[0].get<long long>(), j[1].get<long long>());
  if (j.is_number()) {
    // Exact only for short decimals; route through the decimal parser.
    std::ostringstream os;
    os.precision(12);
    os << j.get<double>();
    return PowerSum::parse("n^(" + os.str() + ")").leading().first;
  }
  throw std::invalid_argument("power must be an integer, \"p/q\" string or [p, q]");
}

}  // namespace

PowerSum PowerSum::constant(double c) { return monomial(c, Rational(0)); }

PowerSum PowerSum::monomial(double c, Rational p) {
  PowerSum out;
  if (c != 0) out.terms_[p] = c;
  return out;
}

void PowerSum::compact(double scale) {
  const double tol = kRelDrop * scale;
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= tol) it = terms_.erase(it);
    else ++it;
  }
}

PowerSum operator+(const PowerSum& a, const PowerSum& b) {
  PowerSum out = a;
  for (const auto& [p, c] : b.terms_) out.terms_[p] += c;
  out.compact(std::max(max_abs(a.terms_), max_abs(b.terms_)));
  return out;
}

PowerSum operator-(const PowerSum& a, const PowerSum& b) { return a + (-1.0) * b; }

PowerSum operator*(double c, const PowerSum& a) {
  PowerSum out;
  if (c == 0) return out;
  for (const auto& [p, x] : a.terms_) out.terms_[p] = c * x;
  return out;
}

PowerSum operator*(const PowerSum& a, const PowerSum& b) {
  PowerSum out;
  double scale = 0;
  for (const auto& [p, x] : a.terms_)
    for (const auto& [q, y] : b.terms_) {
      out.terms_[p + q] += x * y;
      scale = std::max(scale, std::abs(x * y));
    }
  out.compact(scale);
  return out;
}

std::optional<PowerSum> PowerSum::divide(const PowerSum& a, const PowerSum& b, Rational floor) {
  if (b.is_zero()) return std::nullopt;
  if (a.is_zero()) return PowerSum{};
  const auto [p0, b0] = b.leading();
  const Rational pa = a.leading().first;
  // b = b0 n^p0 (1 + x) with x built from the lower-order terms.
  PowerSum x;
  for (const auto& [p, c] : b.terms_)
    if (p != p0) x = x + monomial(c / b0, p - p0);
  const Rational series_floor = floor - pa + p0;
  PowerSum series = constant(1), power = constant(1);
  for (int k = 0; k < 256 && !x.is_zero(); ++k) {
    power = truncated((-1.0) * (power * x), series_floor);
    if (power.is_zero()) break;
    series = series + power;
  }
  return truncated(a * series * monomial(1 / b0, -p0), floor);
}

bool PowerSum::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Rational(0));
}

double PowerSum::eval(double n) const {
  double v = 0;
  for (const auto& [p, c] : terms_) v += c * std::pow(n, p.value());
  return v;
}

std::pair<Rational, double> PowerSum::leading() const {
  if (terms_.empty()) throw std::logic_error("PowerSum::leading of zero");
  return *terms_.begin();
}

Limit PowerSum::limit() const {
  if (terms_.empty()) return Limit::finite(0);
  const auto [p, c] = leading();
  if (p > Rational(0)) return {c > 0 ? LimitKind::PosInf : LimitKind::NegInf, 0};
  if (p == Rational(0)) return Limit::finite(c);
  return Limit::finite(0);
}

std::string PowerSum::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto& [p, c] : terms_) {
    const double mag = first ? c : std::abs(c);
    if (!first) os << (c < 0 ? " - " : " + ");
    first = false;
    if (p == Rational(0)) {
      os << mag;
      continue;
    }
    if (mag == -1) os << '-';
    else if (mag != 1) os << mag << '*';
    os << 'n';
    if (p != Rational(1)) os << "^(" << p.to_string() << ')';
  }
  return os.str();
}

PowerSum PowerSum::parse(std::string_view text) { return Parser(text).parse(); }

PowerSum PowerSum::from_json(const nlohmann::json& j) {
  if (j.is_number()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite constant");
    return constant(v);
  }
  if (j.is_string()) return parse(j.get<std::string>());
  if (j.is_array()) {
    PowerSum out;
    for (const auto& t : j) {
      if (!t.is_object() || !t.contains("coef") || !t.contains("power"))
        throw std::invalid_argument("power-law term needs coef and power");
      if (!t.at("coef").is_number()) throw std::invalid_argument("coef must be a number");
      out = out + monomial(t.at("coef").get<double>(), rational_from_json(t.at("power")));
    }
    return out;
  }
  throw std::invalid_argument("expression must be a number, a string or a list of terms");
}

nlohmann::json PowerSum::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [p, c] : terms_) out.push_back({{"coef", c}, {"power", p.to_string()}});
  return out;
}

// ---------------------------------------------------------------------------
// SequenceSpec

Element SequenceSpec::conjugator_at(double n) const {
  const double an = a.eval(n);
  const Element g{Mat2<double>(upper_unipotent(s.eval(n)) * diagonal(an)),
                  Vec2<double>(alpha.eval(n), beta.eval(n))};
  return mul(outer, g);
}

SubgroupDescriptor SequenceSpec::conjugate_at(double n) const {
  return conjugate_descriptor(base, conjugator_at(n));
}

void SequenceSpec::validate() const {
  if (a.is_zero() || a.leading().second <= 0)
    throw std::invalid_argument("a_n must be positive for all n >= 1");
  for (int n = 1; n <= 1000; ++n)
    if (!(a.eval(n) > 0)) throw std::invalid_argument("a_n must be positive for all n >= 1");
}

SequenceSpec SequenceSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("sequence spec must be a JSON object");
  if (!j.contains("base")) throw std::invalid_argument("sequence spec needs a base subgroup");
  SequenceSpec s;
  s.name = j.value("name", std::string());
  s.theorem = j.value("theorem", std::string());
  s.label = j.value("case", std::string());
  s.base = descriptor_from_json(j.at("base"));
  if (j.contains("a")) s.a = PowerSum::from_json(j.at("a"));
  if (j.contains("s")) s.s = PowerSum::from_json(j.at("s"));
  if (j.contains("alpha")) s.alpha = PowerSum::from_json(j.at("alpha"));
  if (j.contains("beta")) s.beta = PowerSum::from_json(j.at("beta"));
  if (j.contains("outer")) s.outer = element_from_json(j.at("outer"));
  s.validate();
  return s;
}

nlohmann::json SequenceSpec::to_json() const {
  nlohmann::json j = {{"name", name},
                      {"theorem", theorem},
                      {"case", label},
                      {"base", chabauty::to_json(base)},
                      {"a", a.to_string()},
                      {"s", s.to_string()},
                      {"alpha", alpha.to_string()},
                      {"beta", beta.to_string()},
                      {"outer", element_to_json(outer)}};
  return j;
}

// ---------------------------------------------------------------------------
// Profiles

namespace {

Limit ratio_limit(const PowerSum& num, const PowerSum& den) {
  const auto q = PowerSum::divide(num, den);
  return q ? q->limit() : Limit::none();
}

nlohmann::json limit_json(const Limit& l) {
  if (l.is_finite()) return l.value;
  return l.to_string();
}

}  // namespace

AsymptoticProfile extract_profile(const SequenceSpec& sp) {
  AsymptoticProfile p;
  p.a = sp.a.limit();
  p.s = sp.s.limit();
  p.alpha = sp.alpha.limit();
  p.beta = sp.beta.limit();
  p.a_is_one = sp.a.is_constant() && !sp.a.is_zero() && sp.a.leading().second == 1.0;
  p.s_is_zero = sp.s.is_zero();
  p.s_is_constant = sp.s.is_constant();
  p.v_is_zero = sp.alpha.is_zero() && sp.beta.is_zero();
  p.v_diverges = p.alpha.is_infinite() || p.beta.is_infinite();
  p.alpha_over_beta = ratio_limit(sp.alpha, sp.beta);
  p.beta_over_alpha = ratio_limit(sp.beta, sp.alpha);
  p.s_over_beta = ratio_limit(sp.s, sp.beta);
  p.beta_over_s = ratio_limit(sp.beta, sp.s);
  p.beta2_over_alpha = ratio_limit(sp.beta * sp.beta, sp.alpha);
  if (const auto q = PowerSum::divide(sp.alpha, sp.beta)) p.d = (2.0 * sp.s - *q).limit();
  if (const auto q = PowerSum::divide(sp.alpha, sp.s)) p.d_prime = (*q - 2.0 * sp.beta).limit();
  p.slope = ratio_limit(-1.0 * sp.beta, sp.alpha - 2.0 * sp.s * sp.beta);
  if (p.v_diverges) {
    const Rational pa = sp.alpha.is_zero() ? Rational(-1000000) : sp.alpha.leading().first;
    const Rational pb = sp.beta.is_zero() ? Rational(-1000000) : sp.beta.leading().first;
    const Rational top = std::max(pa, pb);
    const double x = pa == top ? sp.alpha.leading().second : 0.0;
    const double y = pb == top ? sp.beta.leading().second : 0.0;
    p.v_angle = std::atan2(y, x);
  }
  return p;
}

nlohmann::json AsymptoticProfile::to_json() const {
  nlohmann::json j = {{"a", limit_json(a)},
                      {"s", limit_json(s)},
                      {"alpha", limit_json(alpha)},
                      {"beta", limit_json(beta)},
                      {"a_is_one", a_is_one},
                      {"s_is_zero", s_is_zero},
                      {"s_is_constant", s_is_constant},
                      {"v_is_zero", v_is_zero},
                      {"v_diverges", v_diverges},
                      {"alpha_over_beta", limit_json(alpha_over_beta)},
                      {"beta_over_alpha", limit_json(beta_over_alpha)},
                      {"s_over_beta", limit_json(s_over_beta)},
                      {"beta_over_s", limit_json(beta_over_s)},
                      {"beta2_over_alpha", limit_json(beta2_over_alpha)},
                      {"d", limit_json(d)},
                      {"d_prime", limit_json(d_prime)},
                      {"slope", limit_json(slope)}};
  if (v_angle) j["v_angle"] = *v_angle;
  return j;
}

}  // namespace chabauty
