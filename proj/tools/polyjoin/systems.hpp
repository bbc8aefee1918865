#pragma once

#include <string>

namespace polyjoin::app {

/// Text for `polyjoin list-systems`: kinds, actions, observable classes and
/// default constants, in a fixed order.
std::string list_systems();

}  // namespace polyjoin::app
