#pragma once

#include "mcbound/bound_report.hpp"
#include "mcbound/bounds.hpp"
#include "mcbound/chain_json.hpp"
#include "mcbound/coupling.hpp"
#include "mcbound/eigen_bound.hpp"
#include "mcbound/errors.hpp"
#include "mcbound/finite_chain.hpp"
#include "mcbound/intervals.hpp"
#include "mcbound/kernels.hpp"
#include "mcbound/minorization.hpp"
#include "mcbound/presets.hpp"
#include "mcbound/quadrature.hpp"
#include "mcbound/random.hpp"
#include "mcbound/rational.hpp"
#include "mcbound/verification.hpp"
