#include "polyjoin/dynamics.hpp"
#include "polyjoin/summation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace polyjoin {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const u128 kGolden128 = parse_hex_u128("0x9e3779b97f4a7c15f39cc0605cedc834");
const UInt256 kGolden256 =
    parse_hex_u256("0x9e3779b97f4a7c15f39cc0605cedc8341082276bf3a27251f86c6a11d0c18e95");

void check_width(int width) {
  if (width < 8 || width > 128) throw std::invalid_argument("fixed-point width must be in [8, 128]");
}

/// r / 2^width as a double in [0, 1).
double fraction_of(u128 r, int width) {
  if (width >= 64) return std::ldexp(static_cast<double>(static_cast<std::uint64_t>(r >> (width - 64))), -64);
  return std::ldexp(static_cast<double>(static_cast<std::uint64_t>(r)), -width);
}

double eval_trig_fixed(const TrigPoly& p, u128 v, int width) {
  const u128 mask = low_mask(width);
  double acc = p.constant;
  for (const auto& t : p.terms) {
    const u128 kv = (static_cast<u128>(static_cast<i128>(t.frequency)) * v) & mask;
    acc += t.coefficient * std::cos(kTwoPi * (fraction_of(kv, width) + t.phase));
  }
  return acc;
}

i128 offset_index(const Integer& offset) {
  i128 out;
  if (!fits_i128(offset, out)) throw Error("bit-stream offset outside the signed 128-bit index range");
  return out;
}

/// First `width` bits of the point's binary expansion (with the rotation
/// phase added), as an integer whose MSB is the first bit.
std::uint64_t stream_window(const SystemSpec& sys, const StreamPoint& p, int width) {
  const i128 index = offset_index(p.offset);
  if (p.phase == 0) return read_bits(p.seed, index, width, sys.prf());
  const auto& circle = std::get<CircleBitstream>(sys.kind());
  const UInt256 sum = read_u256(p.seed, index, sys.prf()) + p.phase;
  const int lookahead = circle.lookahead;
  const UInt256 look = (sum << width) >> (256 - lookahead);
  const UInt256 ones = (UInt256(1) << lookahead) - 1;
  if (look == ones) {
    throw CarryUnresolved("rotate: " + std::to_string(lookahead) + " lookahead bits all equal 1");
  }
  return static_cast<std::uint64_t>(sum >> (256 - width));
}

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<u128>(a) * b) % m);
}

std::uint64_t step_mod(std::int64_t step, std::uint64_t m) {
  const i128 r = static_cast<i128>(step) % static_cast<i128>(m);
  return static_cast<std::uint64_t>(r < 0 ? r + m : r);
}

}  // namespace

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Main: return "main";
    case Action::Rotate: return "rotate";
    case Action::Double: return "double";
  }
  return "main";
}

Action parse_action(std::string_view name) {
  if (name == "main") return Action::Main;
  if (name == "rotate") return Action::Rotate;
  if (name == "double") return Action::Double;
  throw std::invalid_argument("unknown action '" + std::string(name) + "'");
}

u128 golden_alpha(int width) {
  check_width(width);
  return (kGolden128 >> (128 - width)) | 1;
}

UInt256 golden_alpha_256() { return kGolden256 | 1; }

Integer rotate_limit() { return Integer(1) << 180; }

SystemSpec SystemSpec::cyclic(std::uint64_t modulus, std::int64_t step) {
  if (modulus == 0) throw std::invalid_argument("cyclic modulus must be positive");
  return SystemSpec(CyclicRotation{modulus, step});
}

SystemSpec SystemSpec::torus(int width, std::optional<u128> alpha) {
  check_width(width);
  return SystemSpec(TorusRotation{alpha ? (*alpha & low_mask(width)) : golden_alpha(width), width});
}

SystemSpec SystemSpec::skew(int width, std::optional<u128> alpha) {
  check_width(width);
  return SystemSpec(SkewProduct{alpha ? (*alpha & low_mask(width)) : golden_alpha(width), width});
}

SystemSpec SystemSpec::bernoulli() { return SystemSpec(BernoulliShift{}); }

SystemSpec SystemSpec::circle_bitstream(int lookahead, std::optional<UInt256> alpha) {
  if (lookahead < 16 || lookahead > 192) throw std::invalid_argument("lookahead must be in [16, 192]");
  return SystemSpec(CircleBitstream{alpha ? *alpha : golden_alpha_256(), lookahead});
}

std::string_view SystemSpec::kind_name() const {
  return std::visit(overloaded{
                        [](const CyclicRotation&) { return std::string_view("CyclicRotation"); },
                        [](const TorusRotation&) { return std::string_view("TorusRotation"); },
                        [](const SkewProduct&) { return std::string_view("SkewProduct"); },
                        [](const BernoulliShift&) { return std::string_view("BernoulliShift"); },
                        [](const CircleBitstream&) { return std::string_view("CircleBitstream"); },
                    },
                    kind_);
}

std::vector<Action> SystemSpec::actions() const {
  if (std::holds_alternative<CircleBitstream>(kind_)) return {Action::Main, Action::Rotate, Action::Double};
  return {Action::Main};
}

bool SystemSpec::has_action(Action a) const {
  const auto acts = actions();
  return std::find(acts.begin(), acts.end(), a) != acts.end();
}

Action SystemSpec::resolve(Action a) const {
  if (!has_action(a)) {
    throw UnsupportedAction(std::string(kind_name()) + " has no action '" + std::string(action_name(a)) + "'");
  }
  if (a == Action::Main && std::holds_alternative<CircleBitstream>(kind_)) return Action::Double;
  return a;
}

bool SystemSpec::is_ergodic() const {
  return std::visit(overloaded{
                        [](const CyclicRotation& c) {
                          const std::uint64_t a = step_mod(c.step, c.modulus);
                          return gcd_u64(a, c.modulus) == 1 || c.modulus == 1;
                        },
                        [](const TorusRotation& t) { return (t.alpha & 1) == 1; },
                        [](const SkewProduct& s) { return (s.alpha & 1) == 1; },
                        [](const BernoulliShift&) { return true; },
                        [](const CircleBitstream&) { return true; },
                    },
                    kind_);
}

bool SystemSpec::is_weakly_mixing(Action a) const {
  if (!has_action(a)) return false;
  if (std::holds_alternative<BernoulliShift>(kind_)) return true;
  if (std::holds_alternative<CircleBitstream>(kind_)) return resolve(a) == Action::Double;
  return false;
}

bool SystemSpec::is_invertible(Action a) const {
  if (!has_action(a)) return false;
  return !(std::holds_alternative<CircleBitstream>(kind_) && resolve(a) == Action::Double);
}

std::string SystemSpec::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const CyclicRotation& c) { os << "CyclicRotation(m=" << c.modulus << ", a=" << c.step << ")"; },
                 [&](const TorusRotation& t) {
                   os << "TorusRotation(W=" << t.width << ", alpha=" << to_hex(t.alpha, t.width) << ")";
                 },
                 [&](const SkewProduct& s) {
                   os << "SkewProduct(W=" << s.width << ", alpha=" << to_hex(s.alpha, s.width) << ")";
                 },
                 [&](const BernoulliShift&) { os << "BernoulliShift()"; },
                 [&](const CircleBitstream& c) {
                   os << "CircleBitstream(lookahead=" << c.lookahead << ", alpha=" << to_hex(c.alpha) << ")";
                 },
             },
             kind_);
  return os.str();
}

std::string describe(const Point& p) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const CyclicPoint& c) { os << "residue " << c.residue; },
                 [&](const TorusPoint& t) { os << "x=" << to_hex(t.x); },
                 [&](const SkewPoint& s) { os << "x=" << to_hex(s.x) << ", y=" << to_hex(s.y); },
                 [&](const StreamPoint& s) {
                   os << "seed=" << s.seed << ", offset=" << s.offset;
                   if (s.phase != 0) os << ", phase=" << to_hex(s.phase);
                 },
             },
             p);
  return os.str();
}

// --- observables -----------------------------------------------------------

Observable Observable::constant(double c) { return Observable(TrigPoly{c, {}, 0}); }

Observable Observable::cosine(std::int64_t frequency, double coefficient, int coordinate) {
  return trig(TrigPoly{0.0, {TrigTerm{frequency, coefficient, 0.0}}, coordinate});
}

Observable Observable::trig(TrigPoly p) {
  for (const auto& t : p.terms) {
    if (t.frequency == 0) throw std::invalid_argument("trig term frequency must be nonzero");
  }
  if (p.coordinate < 0 || p.coordinate > 1) throw std::invalid_argument("trig coordinate must be 0 or 1");
  return Observable(std::move(p));
}

Observable Observable::indicator(std::vector<std::uint64_t> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return Observable(IndicatorSet{std::move(members)});
}

Observable Observable::bitword(int width, std::vector<double> table) {
  if (width < 1 || width > 20) throw std::invalid_argument("bitword width must be in [1, 20]");
  if (table.size() != (std::size_t{1} << width)) {
    throw std::invalid_argument("bitword table must have 2^width entries");
  }
  return Observable(BitWord{width, std::move(table)});
}

double Observable::sup_norm() const {
  return std::visit(overloaded{
                        [](const TrigPoly& p) {
                          double s = std::abs(p.constant);
                          for (const auto& t : p.terms) s += std::abs(t.coefficient);
                          return s;
                        },
                        [](const IndicatorSet& s) { return s.members.empty() ? 0.0 : 1.0; },
                        [](const BitWord& b) {
                          double s = 0.0;
                          for (double v : b.table) s = std::max(s, std::abs(v));
                          return s;
                        },
                    },
                    v_);
}

bool Observable::is_constant_one() const {
  const auto* p = std::get_if<TrigPoly>(&v_);
  return p != nullptr && p->terms.empty() && p->constant == 1.0;
}

Observable Observable::scaled(double c) const {
  return std::visit(overloaded{
                        [&](const TrigPoly& p) {
                          TrigPoly q = p;
                          q.constant *= c;
                          for (auto& t : q.terms) t.coefficient *= c;
                          return Observable(std::move(q));
                        },
                        [&](const IndicatorSet&) -> Observable {
                          throw std::invalid_argument("indicator observables cannot be scaled");
                        },
                        [&](const BitWord& b) {
                          BitWord q = b;
                          for (auto& v : q.table) v *= c;
                          return Observable(std::move(q));
                        },
                    },
                    v_);
}

std::string Observable::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const TrigPoly& p) {
                   os << "trig(c0=" << p.constant;
                   for (const auto& t : p.terms) {
                     os << ", " << t.coefficient << "*cos(2pi*(" << t.frequency << "v";
                     if (t.phase != 0.0) os << "+" << t.phase;
                     os << "))";
                   }
                   if (p.coordinate != 0) os << ", coord=" << p.coordinate;
                   os << ")";
                 },
                 [&](const IndicatorSet& s) {
                   os << "indicator{";
                   for (std::size_t i = 0; i < s.members.size(); ++i) os << (i ? "," : "") << s.members[i];
                   os << "}";
                 },
                 [&](const BitWord& b) { os << "bitword(w=" << b.width << ")"; },
             },
             v_);
  return os.str();
}

bool indicator_contains(const IndicatorSet& s, std::uint64_t residue) {
  return std::binary_search(s.members.begin(), s.members.end(), residue);
}

// --- validation --------------------------------------------------------------

void check_point(const SystemSpec& sys, const Point& x) {
  const bool ok = std::visit(
      overloaded{
          [&](const CyclicRotation& c) {
            const auto* p = std::get_if<CyclicPoint>(&x);
            return p != nullptr && p->residue < c.modulus;
          },
          [&](const TorusRotation& t) {
            const auto* p = std::get_if<TorusPoint>(&x);
            return p != nullptr && (p->x & ~low_mask(t.width)) == 0;
          },
          [&](const SkewProduct& s) {
            const auto* p = std::get_if<SkewPoint>(&x);
            return p != nullptr && (p->x & ~low_mask(s.width)) == 0 && (p->y & ~low_mask(s.width)) == 0;
          },
          [&](const BernoulliShift&) {
            const auto* p = std::get_if<StreamPoint>(&x);
            return p != nullptr && p->phase == 0;
          },
          [&](const CircleBitstream&) { return std::holds_alternative<StreamPoint>(x); },
      },
      sys.kind());
  if (!ok) throw PointMismatch("point (" + describe(x) + ") is not a point of " + sys.describe());
}

void check_observable(const SystemSpec& sys, const Observable& f) {
  auto fail = [&](const std::string& why) {
    throw IncompatibleObservable(f.describe() + " on " + sys.describe() + ": " + why);
  };
  std::visit(overloaded{
                 [&](const TrigPoly& p) {
                   if (p.terms.empty()) return;  // constants live everywhere
                   if (sys.is_cyclic()) fail("trig polynomials need a circle coordinate");
                   const int coords = std::holds_alternative<SkewProduct>(sys.kind()) ? 2 : 1;
                   if (p.coordinate >= coords) fail("coordinate out of range");
                 },
                 [&](const IndicatorSet& s) {
                   const auto* c = std::get_if<CyclicRotation>(&sys.kind());
                   if (c == nullptr) fail("indicator sets need a cyclic system");
                   if (!s.members.empty() && s.members.back() >= c->modulus) fail("residue out of range");
                 },
                 [&](const BitWord& b) {
                   if (!sys.is_bitstream()) fail("bit words need a bit-stream system");
                   if (const auto* c = std::get_if<CircleBitstream>(&sys.kind())) {
                     if (b.width + c->lookahead > 256) fail("width + lookahead exceeds 256 bits");
                   }
                 },
             },
             f.value());
}

// --- dynamics ------------------------------------------------------------------

Point iterate(const SystemSpec& sys, Action action, const Point& x, const Integer& n) {
  const Action act = sys.resolve(action);
  check_point(sys, x);
  if (n == 0) return x;
  return std::visit(
      overloaded{
          [&](const CyclicRotation& c) -> Point {
            const auto& p = std::get<CyclicPoint>(x);
            const std::uint64_t m = c.modulus;
            const std::uint64_t shift = mul_mod(step_mod(c.step, m), mod_u64(n, m), m);
            std::uint64_t r = p.residue + shift;
            if (r >= m || r < p.residue) r -= m;
            return CyclicPoint{r};
          },
          [&](const TorusRotation& t) -> Point {
            const auto& p = std::get<TorusPoint>(x);
            return TorusPoint{(p.x + low_u128(n) * t.alpha) & low_mask(t.width)};
          },
          [&](const SkewProduct& s) -> Point {
            // T^n(x, y) = (x + n alpha, y + n x + C(n, 2) alpha).
            const auto& p = std::get<SkewPoint>(x);
            const u128 mask = low_mask(s.width);
            const u128 nn = low_u128(n);
            u128 c2;
            i128 small;
            if (fits_i128(n, small) && small > -(i128(1) << 62) && small < (i128(1) << 62)) {
              c2 = static_cast<u128>(small * (small - 1) / 2);
            } else {
              c2 = low_u128(n * (n - 1) / 2);
            }
            return SkewPoint{(p.x + nn * s.alpha) & mask, (p.y + nn * p.x + c2 * s.alpha) & mask};
          },
          [&](const BernoulliShift&) -> Point {
            const auto& p = std::get<StreamPoint>(x);
            return StreamPoint{p.seed, p.offset + n, p.phase};
          },
          [&](const CircleBitstream& c) -> Point {
            const auto& p = std::get<StreamPoint>(x);
            if (act == Action::Double) {
              if (n < 0) throw UnsupportedAction("CircleBitstream 'double' cannot run backwards");
              // 2^n (s + phase) = (2^n s mod 1) + (2^n phase mod 1).
              const UInt256 phase = n >= 256 ? UInt256(0) : UInt256(p.phase << static_cast<unsigned>(n));
              return StreamPoint{p.seed, p.offset + n, phase};
            }
            if (abs(n) > rotate_limit()) throw UnsupportedAction("CircleBitstream 'rotate' exponent exceeds 2^180");
            return StreamPoint{p.seed, p.offset, p.phase + low_u256(n) * c.alpha};
          },
      },
      sys.kind());
}

double observe(const SystemSpec& sys, const Observable& f, const Point& x) {
  return std::visit(
      overloaded{
          [&](const TrigPoly& p) -> double {
            if (p.terms.empty()) return p.constant;
            return std::visit(
                overloaded{
                    [&](const TorusPoint& t) {
                      const auto& sysk = std::get<TorusRotation>(sys.kind());
                      return eval_trig_fixed(p, t.x, sysk.width);
                    },
                    [&](const SkewPoint& s) {
                      const auto& sysk = std::get<SkewProduct>(sys.kind());
                      return eval_trig_fixed(p, p.coordinate == 0 ? s.x : s.y, sysk.width);
                    },
                    [&](const StreamPoint& s) {
                      return eval_trig_fixed(p, stream_window(sys, s, 64), 64);
                    },
                    [&](const CyclicPoint&) -> double {
                      throw IncompatibleObservable("trig polynomial on a cyclic point");
                    },
                },
                x);
          },
          [&](const IndicatorSet& s) -> double {
            const auto* c = std::get_if<CyclicPoint>(&x);
            if (c == nullptr) throw IncompatibleObservable("indicator set on a non-cyclic point");
            return indicator_contains(s, c->residue) ? 1.0 : 0.0;
          },
          [&](const BitWord& b) -> double {
            const auto* s = std::get_if<StreamPoint>(&x);
            if (s == nullptr) throw IncompatibleObservable("bit word on a non-stream point");
            return b.table[static_cast<std::size_t>(stream_window(sys, *s, b.width))];
          },
      },
      f.value());
}

Point sample(const SystemSpec& sys, std::uint64_t seed) {
  const auto& prf = sys.prf();
  auto word = [&](int k) { return prf_word(seed, k, prf); };
  auto wide = [&](int k) { return (static_cast<u128>(word(k)) << 64) | word(k + 1); };
  return std::visit(overloaded{
                        [&](const CyclicRotation& c) -> Point {
                          return CyclicPoint{static_cast<std::uint64_t>((static_cast<u128>(word(0)) * c.modulus) >> 64)};
                        },
                        [&](const TorusRotation& t) -> Point { return TorusPoint{wide(0) & low_mask(t.width)}; },
                        [&](const SkewProduct& s) -> Point {
                          return SkewPoint{wide(0) & low_mask(s.width), wide(2) & low_mask(s.width)};
                        },
                        [&](const BernoulliShift&) -> Point { return StreamPoint{seed, Integer(0), UInt256(0)}; },
                        [&](const CircleBitstream&) -> Point { return StreamPoint{seed, Integer(0), UInt256(0)}; },
                    },
                    sys.kind());
}

IntegralValue integral(const SystemSpec& sys, const Observable& f) {
  check_observable(sys, f);
  IntegralValue out;
  out.exact = true;
  std::visit(overloaded{
                 [&](const TrigPoly& p) {
                   double v = p.constant;
                   int width = 0;
                   if (const auto* t = std::get_if<TorusRotation>(&sys.kind())) width = t->width;
                   if (const auto* s = std::get_if<SkewProduct>(&sys.kind())) width = s->width;
                   // On Z/2^W a frequency divisible by 2^W is constant.
                   for (const auto& term : p.terms) {
                     if (width > 0 && width < 64 && term.frequency % (std::int64_t{1} << width) == 0) {
                       v += term.coefficient * std::cos(kTwoPi * term.phase);
                     }
                   }
                   out.value = v;
                 },
                 [&](const IndicatorSet& s) {
                   const auto& c = std::get<CyclicRotation>(sys.kind());
                   out.rational = Rational(static_cast<long long>(s.members.size())) /
                                  Rational(Integer(c.modulus));
                   out.value = to_double(*out.rational);
                 },
                 [&](const BitWord& b) {
                   double s = 0.0;
                   for (double v : b.table) s += v;
                   out.value = s / static_cast<double>(b.table.size());
                 },
             },
             f.value());
  return out;
}

IntegralValue integral_mc(const SystemSpec& sys, const std::function<double(const Point&)>& fn,
                          std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("integral_mc needs at least two samples");
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double v = fn(sample(sys, derive_seed(seed, i)));
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  IntegralValue out;
  out.value = mean;
  out.exact = false;
  out.std_error = std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
  return out;
}

double moment(const SystemSpec& sys, const Observable& f, int r) {
  if (r < 1) throw std::invalid_argument("moment order must be >= 1");
  check_observable(sys, f);
  return std::visit(overloaded{
                        [&](const TrigPoly& p) {
                          if (p.terms.empty()) return std::pow(p.constant, r);
                          std::int64_t kmax = 0;
                          for (const auto& t : p.terms) kmax = std::max(kmax, std::abs(t.frequency));
                          // Equispaced rule, exact for trig polynomials of degree < points.
                          const std::int64_t points = 2 * r * kmax + 1;
                          CompensatedSum acc;
                          for (std::int64_t i = 0; i < points; ++i) {
                            const double v = static_cast<double>(i) / static_cast<double>(points);
                            double val = p.constant;
                            for (const auto& t : p.terms)
                              val += t.coefficient * std::cos(kTwoPi * (static_cast<double>(t.frequency) * v + t.phase));
                            acc.add(std::pow(val, r));
                          }
                          return acc.value() / static_cast<double>(points);
                        },
                        [&](const IndicatorSet&) { return integral(sys, f).value; },
                        [&](const BitWord& b) {
                          double s = 0.0;
                          for (double v : b.table) s += std::pow(v, r);
                          return s / static_cast<double>(b.table.size());
                        },
                    },
                    f.value());
}

Observable precompose(const SystemSpec& sys, const Observable& f, const Integer& n) {
  check_observable(sys, f);
  if (f.is_constant_one()) return f;
  return std::visit(
      overloaded{
          [&](const IndicatorSet& s) -> Observable {
            const auto& c = std::get<CyclicRotation>(sys.kind());
            const std::uint64_t m = c.modulus;
            const std::uint64_t shift = mul_mod(step_mod(c.step, m), mod_u64(n, m), m);
            std::vector<std::uint64_t> out;
            for (auto r : s.members) out.push_back((r + m - shift) % m);
            return Observable::indicator(std::move(out));
          },
          [&](const TrigPoly& p) -> Observable {
            TrigPoly q = p;
            if (const auto* t = std::get_if<TorusRotation>(&sys.kind())) {
              for (auto& term : q.terms) {
                const u128 shift = (static_cast<u128>(static_cast<i128>(term.frequency)) * low_u128(n) * t->alpha) &
                                   low_mask(t->width);
                term.phase = std::fmod(term.phase + fraction_of(shift, t->width), 1.0);
              }
              return Observable::trig(std::move(q));
            }
            if (const auto* s = std::get_if<SkewProduct>(&sys.kind()); s != nullptr && p.coordinate == 0) {
              for (auto& term : q.terms) {
                const u128 shift = (static_cast<u128>(static_cast<i128>(term.frequency)) * low_u128(n) * s->alpha) &
                                   low_mask(s->width);
                term.phase = std::fmod(term.phase + fraction_of(shift, s->width), 1.0);
              }
              return Observable::trig(std::move(q));
            }
            if (std::holds_alternative<CircleBitstream>(sys.kind()) && n >= 0 && n < 40) {
              const auto factor = std::int64_t{1} << static_cast<int>(n);
              for (auto& term : q.terms) term.frequency *= factor;
              return Observable::trig(std::move(q));
            }
            throw IncompatibleObservable("cannot precompose " + f.describe() + " on " + sys.describe());
          },
          [&](const BitWord&) -> Observable {
            throw IncompatibleObservable("cannot precompose a bit word");
          },
      },
      f.value());
}

}  // namespace polyjoin

namespace polyjoin {

namespace {

// c e(w0 u + w1 v + phase); the conjugate term is always present too, so
// only real parts are summed.
struct Exponential {
  double coef;
  Integer w0;
  Integer w1;
  double phase;
};

template <class W>
struct Expo {
  double coef;
  W w0;
  W w1;
  double phase;
};

constexpr std::size_t kMaxCombinations = 1u << 20;

template <class W>
double sum_combinations(const std::vector<std::vector<Expo<W>>>& factors, const W& modulus, bool reduce) {
  double total = 0.0;
  auto rec = [&](auto&& self, std::size_t i, double coef, const W& w0, const W& w1, double phase) -> void {
    if (i == factors.size()) {
      const bool zero = reduce ? (w0 % modulus == 0 && w1 % modulus == 0) : (w0 == 0 && w1 == 0);
      if (zero) total += coef * std::cos(kTwoPi * phase);
      return;
    }
    for (const auto& e : factors[i]) self(self, i + 1, coef * e.coef, w0 + e.w0, w1 + e.w1, phase + e.phase);
  };
  rec(rec, 0, 1.0, W(0), W(0), 0.0);
  return total;
}

double alpha_phase(const Integer& mult, u128 alpha, int width) {
  const u128 r = (low_u128(mult) * alpha) & low_mask(width);
  return fraction_of(r, width);
}

}  // namespace

std::optional<double> shifted_product_integral(const SystemSpec& sys, const Observable& f,
                                               const std::vector<Integer>& shifts) {
  check_observable(sys, f);
  if (const auto* set = std::get_if<IndicatorSet>(&f.value())) {
    const auto& c = std::get<CyclicRotation>(sys.kind());
    const std::uint64_t m = c.modulus;
    std::vector<std::uint64_t> off;
    for (const auto& s : shifts) off.push_back(mul_mod(step_mod(c.step, m), mod_u64(s, m), m));
    std::uint64_t count = 0;
    for (std::uint64_t x : set->members) {
      bool all = true;
      for (std::size_t k = 0; k < off.size() && all; ++k) all = indicator_contains(*set, (x + off[k]) % m);
      count += all ? 1 : 0;
    }
    return static_cast<double>(count) / static_cast<double>(m);
  }
  const auto* p = std::get_if<TrigPoly>(&f.value());
  if (p == nullptr) return std::nullopt;
  if (p->terms.empty()) return std::pow(p->constant, static_cast<double>(shifts.size()));

  int width = 0;  // 0: the true circle, frequencies must cancel exactly
  bool doubling = false;
  u128 alpha = 0;
  bool skew = false;
  std::visit(overloaded{
                 [&](const TorusRotation& t) { width = t.width, alpha = t.alpha; },
                 [&](const SkewProduct& s) { width = s.width, alpha = s.alpha, skew = true; },
                 [&](const CircleBitstream&) { doubling = true; },
                 [&](const BernoulliShift&) { doubling = true; },
                 [&](const CyclicRotation&) {},
             },
             sys.kind());

  std::size_t combos = 1;
  std::vector<std::vector<Exponential>> factors;
  for (const auto& s : shifts) {
    if (doubling && s < 0) throw UnsupportedAction("doubling cannot run backwards");
    std::vector<Exponential> ex;
    if (p->constant != 0.0) ex.push_back({p->constant, Integer(0), Integer(0), 0.0});
    for (const auto& t : p->terms) {
      const Integer k(t.frequency);
      Exponential e{t.coefficient / 2.0, k, Integer(0), t.phase};
      if (doubling) {
        e.w0 = k << static_cast<unsigned>(s);
      } else if (skew && p->coordinate == 1) {
        // e(k y) o T^s = e(k (y + s x + C(s,2) alpha))
        e.w0 = k * s;
        e.w1 = k;
        e.phase += alpha_phase(k * binomial(s, 2), alpha, width);
      } else {
        e.phase += alpha_phase(k * s, alpha, width);
      }
      e.phase = e.phase - std::floor(e.phase);
      Exponential conj{e.coef, -e.w0, -e.w1, 1.0 - e.phase};
      ex.push_back(e);
      ex.push_back(conj);
    }
    combos *= ex.size();
    if (combos > kMaxCombinations) return std::nullopt;
    factors.push_back(std::move(ex));
  }

  const bool reduce = width > 0;
  Integer max_w = 0;
  for (const auto& fac : factors) {
    for (const auto& e : fac) {
      if (abs(e.w0) > max_w) max_w = abs(e.w0);
      if (abs(e.w1) > max_w) max_w = abs(e.w1);
    }
  }
  // Frequency sums below 2^120 in magnitude vanish mod 2^W (W >= 120) only
  // when they vanish outright.
  if (max_w * factors.size() < (Integer(1) << 120)) {
    std::vector<std::vector<Expo<i128>>> small;
    for (const auto& fac : factors) {
      std::vector<Expo<i128>> v;
      for (const auto& e : fac) {
        v.push_back({e.coef, static_cast<i128>(low_u128(e.w0)), static_cast<i128>(low_u128(e.w1)), e.phase});
      }
      small.push_back(std::move(v));
    }
    const bool small_mod = reduce && width < 120;
    const i128 modulus = small_mod ? (i128(1) << width) : i128(1);
    return sum_combinations(small, modulus, small_mod);
  }
  std::vector<std::vector<Expo<Integer>>> big;
  for (const auto& fac : factors) {
    std::vector<Expo<Integer>> v;
    for (const auto& e : fac) v.push_back({e.coef, e.w0, e.w1, e.phase});
    big.push_back(std::move(v));
  }
  const Integer modulus = reduce ? (Integer(1) << width) : Integer(1);
  return sum_combinations(big, modulus, reduce);
}

}  // namespace polyjoin
