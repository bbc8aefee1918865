#pragma once

// Concrete measure-preserving systems with closed-form n-th iterates, and
// the observables evaluated on their points.
//
//   CyclicRotation   x -> x + a            on Z/m
//   TorusRotation    x -> x + alpha        on Z/2^W (W-bit fixed point circle)
//   SkewProduct      (x, y) -> (x + alpha, y + x) on (Z/2^W)^2
//   BernoulliShift   two-sided full shift on {0,1}^Z, points (seed, offset)
//   CircleBitstream  the circle as binary expansions; "double" is x -> 2x,
//                    "rotate" is x -> x + alpha with a 256-bit alpha

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "polyjoin/errors.hpp"
#include "polyjoin/integer.hpp"
#include "polyjoin/prf.hpp"

namespace polyjoin {

enum class Action { Main, Rotate, Double };

std::string_view action_name(Action a);
Action parse_action(std::string_view name);

struct CyclicRotation {
  std::uint64_t modulus;
  std::int64_t step;
};

struct TorusRotation {
  u128 alpha;
  int width;
};

struct SkewProduct {
  u128 alpha;
  int width;
};

struct BernoulliShift {};

struct CircleBitstream {
  UInt256 alpha;
  int lookahead;
};

using SystemKind = std::variant<CyclicRotation, TorusRotation, SkewProduct, BernoulliShift, CircleBitstream>;

/// Golden rotation (sqrt(5) - 1) / 2 truncated to `width` bits, lowest bit
/// forced to 1 so the finite rotation is a single cycle.
u128 golden_alpha(int width = 128);
UInt256 golden_alpha_256();

/// Largest |n| accepted by the "rotate" action.
Integer rotate_limit();

class SystemSpec {
 public:
  static SystemSpec cyclic(std::uint64_t modulus, std::int64_t step = 1);
  static SystemSpec torus(int width = 128, std::optional<u128> alpha = std::nullopt);
  static SystemSpec skew(int width = 128, std::optional<u128> alpha = std::nullopt);
  static SystemSpec bernoulli();
  static SystemSpec circle_bitstream(int lookahead = 64, std::optional<UInt256> alpha = std::nullopt);

  const SystemKind& kind() const { return kind_; }
  std::string_view kind_name() const;
  std::vector<Action> actions() const;
  bool has_action(Action a) const;
  /// Main resolves to the system's default action.
  Action resolve(Action a) const;

  bool is_cyclic() const { return std::holds_alternative<CyclicRotation>(kind_); }
  bool is_bitstream() const {
    return std::holds_alternative<BernoulliShift>(kind_) || std::holds_alternative<CircleBitstream>(kind_);
  }
  bool is_ergodic() const;
  bool is_weakly_mixing(Action a) const;
  /// Negative exponents allowed for this action.
  bool is_invertible(Action a) const;

  const PrfConstants& prf() const { return prf_; }
  /// Only for negative-control experiments.
  void set_prf(const PrfConstants& c) { prf_ = c; }

  std::string describe() const;

 private:
  explicit SystemSpec(SystemKind k) : kind_(k) {}
  SystemKind kind_;
  PrfConstants prf_{};
};

struct CyclicPoint {
  std::uint64_t residue;
  friend bool operator==(const CyclicPoint&, const CyclicPoint&) = default;
};

struct TorusPoint {
  u128 x;
  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

struct SkewPoint {
  u128 x;
  u128 y;
  friend bool operator==(const SkewPoint&, const SkewPoint&) = default;
};

/// Bit-stream point: the stream of `seed` read from `offset`, plus (circle
/// systems only) an exact 256-bit rotation phase added to it mod 1.
struct StreamPoint {
  std::uint64_t seed;
  Integer offset;
  UInt256 phase;
  friend bool operator==(const StreamPoint&, const StreamPoint&) = default;
};

using Point = std::variant<CyclicPoint, TorusPoint, SkewPoint, StreamPoint>;

std::string describe(const Point& p);

struct TrigTerm {
  std::int64_t frequency;
  double coefficient;
  double phase = 0.0;  // in turns
};

/// c0 + sum_k c_k cos(2 pi (k v + phase_k)) on a circle coordinate v.
struct TrigPoly {
  double constant = 0.0;
  std::vector<TrigTerm> terms;
  int coordinate = 0;
};

/// Indicator of a residue set, cyclic systems only.
struct IndicatorSet {
  std::vector<std::uint64_t> members;  // sorted, unique
};

/// table[bits [offset, offset + width)], bit-stream systems only.
struct BitWord {
  int width;
  std::vector<double> table;
};

class Observable {
 public:
  using Variant = std::variant<TrigPoly, IndicatorSet, BitWord>;

  static Observable constant(double c);
  static Observable cosine(std::int64_t frequency = 1, double coefficient = 1.0, int coordinate = 0);
  static Observable trig(TrigPoly p);
  static Observable indicator(std::vector<std::uint64_t> members);
  static Observable bitword(int width, std::vector<double> table);

  const Variant& value() const { return v_; }
  double sup_norm() const;
  bool is_constant_one() const;
  /// c * f; indicator sets cannot be scaled.
  Observable scaled(double c) const;
  std::string describe() const;

 private:
  explicit Observable(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Throws PointMismatch unless x is a valid point of sys.
void check_point(const SystemSpec& sys, const Point& x);
/// Throws IncompatibleObservable unless f can be evaluated on sys.
void check_observable(const SystemSpec& sys, const Observable& f);

/// T_action^n(x).
Point iterate(const SystemSpec& sys, Action action, const Point& x, const Integer& n);

double observe(const SystemSpec& sys, const Observable& f, const Point& x);

/// Deterministic mu-distributed point.
Point sample(const SystemSpec& sys, std::uint64_t seed);

struct IntegralValue {
  double value = 0.0;
  bool exact = false;
  std::optional<double> std_error;
  std::optional<Rational> rational;  // indicator sets on cyclic systems
};

IntegralValue integral(const SystemSpec& sys, const Observable& f);

/// Monte Carlo mean of fn over `samples` points drawn with derived seeds.
IntegralValue integral_mc(const SystemSpec& sys, const std::function<double(const Point&)>& fn,
                          std::size_t samples, std::uint64_t seed);

/// Exact int f^r dmu for r >= 1.
double moment(const SystemSpec& sys, const Observable& f, int r);

/// g with g(x) = f(T^n x), when the observable class allows it (indicator
/// sets on cyclic systems, trig polynomials on the rotation coordinate).
Observable precompose(const SystemSpec& sys, const Observable& f, const Integer& n);

/// int prod_s f(T^s x) dmu for the main action, when it has a closed form:
/// indicators on Z/m, trig polynomials on rotation, skew and doubling
/// coordinates. nullopt otherwise.
std::optional<double> shifted_product_integral(const SystemSpec& sys, const Observable& f,
                                               const std::vector<Integer>& shifts);

/// Exact value of an indicator observable at a cyclic residue.
bool indicator_contains(const IndicatorSet& s, std::uint64_t residue);

}  // namespace polyjoin
