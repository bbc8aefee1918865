#include "polyjoin/systems.hpp"

#include <sstream>

#include "polyjoin/dynamics.hpp"
#include "polyjoin/prf.hpp"
#include "polyjoin/records.hpp"

namespace polyjoin::app {

namespace {

struct Entry {
  const char* config_kind;
  SystemSpec system;
  const char* observables;
  const char* note;
};

}  // namespace

std::string list_systems() {
  const Entry entries[] = {
      {"cyclic", SystemSpec::cyclic(12), "constant, indicator", "x -> x + a mod m"},
      {"torus", SystemSpec::torus(), "constant, cosine, trig", "x -> x + alpha mod 2^W"},
      {"skew", SystemSpec::skew(), "constant, cosine, trig (coordinate 0 or 1)", "(x, y) -> (x + alpha, y + x)"},
      {"bernoulli", SystemSpec::bernoulli(), "constant, bitword", "two-sided shift on PRF bit streams"},
      {"circle", SystemSpec::circle_bitstream(), "constant, cosine, trig, bitword",
       "binary expansion of a circle point; rotate adds alpha, double shifts"},
  };
  std::ostringstream os;
  os << "systems:\n";
  for (const auto& e : entries) {
    os << "  " << e.system.kind_name() << " (kind: " << e.config_kind << ")\n";
    os << "    map: " << e.note << "\n";
    os << "    actions:";
    for (Action a : e.system.actions()) {
      os << " \"" << action_name(a) << "\"";
      if (a == Action::Main && e.system.actions().size() > 1) os << " (= \"" << action_name(e.system.resolve(a)) << "\")";
    }
    os << "\n";
    os << "    observables: " << e.observables << "\n";
    os << "    default: " << e.system.describe() << "\n";
  }
  os << "observable classes: constant, cosine, trig, indicator, bitword\n";
  os << "constants:\n";
  os << "  alpha_128: " << to_hex(golden_alpha(128), 128) << "\n";
  os << "  alpha_64: " << to_hex(golden_alpha(64), 64) << "\n";
  os << "  alpha_256: " << to_hex(golden_alpha_256()) << "\n";
  os << "  prf.seed_offset: " << hex64(kPublishedPrf.seed_offset) << "\n";
  os << "  prf.lo_offset: " << hex64(kPublishedPrf.lo_offset) << "\n";
  os << "  prf.hi_offset: " << hex64(kPublishedPrf.hi_offset) << "\n";
  os << "  prf.mul1: " << hex64(kPublishedPrf.mul1) << "\n";
  os << "  prf.mul2: " << hex64(kPublishedPrf.mul2) << "\n";
  os << "  digest: " << constants_digest() << "\n";
  return os.str();
}

}  // namespace polyjoin::app
