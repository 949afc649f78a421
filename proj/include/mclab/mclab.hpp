#pragma once

#include "mclab/analysis.hpp"
#include "mclab/ball.hpp"
#include "mclab/cases.hpp"
#include "mclab/config.hpp"
#include "mclab/driver.hpp"
#include "mclab/error.hpp"
#include "mclab/families.hpp"
#include "mclab/grid.hpp"
#include "mclab/harness.hpp"
#include "mclab/invariants.hpp"
#include "mclab/kernels.hpp"
#include "mclab/parallel.hpp"
#include "mclab/pointwise.hpp"
#include "mclab/polyfit.hpp"
#include "mclab/seminorms.hpp"
