#pragma once

#include "qls/bloch_oracle.hpp"
#include "qls/core_model.hpp"
#include "qls/linear_solvers.hpp"
#include "qls/nonlinear_array.hpp"
#include "qls/nonlinear_single.hpp"
#include "qls/presets.hpp"
#include "qls/root_scan.hpp"
#include "qls/scattering_lattice.hpp"
#include "qls/sweep.hpp"
#include "qls/types.hpp"
#include "qls/wave.hpp"

namespace qls {
inline constexpr const char* kVersion = "0.1.0";
}
