#pragma once

#include "genet/config.hpp"
#include "genet/error.hpp"
#include "genet/graph.hpp"
#include "genet/model_selection.hpp"
#include "genet/numerics.hpp"
#include "genet/penalty.hpp"
#include "genet/solvers.hpp"
#include "genet/synthetic.hpp"
#include "genet/theory.hpp"

namespace genet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace genet
