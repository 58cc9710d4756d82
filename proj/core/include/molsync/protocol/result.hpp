#pragma once

#include <boost/outcome.hpp>

namespace molsync {

namespace outcome = boost::outcome_v2;

// Value-or-typed-error. Accessing the wrong side terminates.
template <class T, class E>
using Result = outcome::result<T, E, outcome::policy::terminate>;

}  // namespace molsync
