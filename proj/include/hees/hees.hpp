#pragma once

#include "hees/adaptation.hpp"
#include "hees/diagnostics.hpp"
#include "hees/errors.hpp"
#include "hees/harness.hpp"
#include "hees/linalg.hpp"
#include "hees/objectives.hpp"
#include "hees/rng.hpp"
#include "hees/sampling.hpp"
#include "hees/strategies.hpp"

namespace hees {
inline constexpr const char* kVersion = "0.1.0";
}
