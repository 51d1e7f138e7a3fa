#pragma once

#include "vforest/baseline_poly.hpp"
#include "vforest/bitvec.hpp"
#include "vforest/cost_report.hpp"
#include "vforest/diag_matrix.hpp"
#include "vforest/fixed_point.hpp"
#include "vforest/forest.hpp"
#include "vforest/generators.hpp"
#include "vforest/kernels.hpp"
#include "vforest/manifest.hpp"
#include "vforest/props.hpp"
#include "vforest/runtime.hpp"
#include "vforest/staging.hpp"
#include "vforest/vm.hpp"
