#pragma once

#include "nodal_lab/biharmonic.hpp"
#include "nodal_lab/compare.hpp"
#include "nodal_lab/decomposition.hpp"
#include "nodal_lab/defaults.hpp"
#include "nodal_lab/doubling.hpp"
#include "nodal_lab/errors.hpp"
#include "nodal_lab/frequency.hpp"
#include "nodal_lab/geometry.hpp"
#include "nodal_lab/harmonic.hpp"
#include "nodal_lab/harness.hpp"
#include "nodal_lab/nodal.hpp"
#include "nodal_lab/parallel.hpp"
#include "nodal_lab/partition.hpp"
#include "nodal_lab/point.hpp"
#include "nodal_lab/polynomial.hpp"
#include "nodal_lab/region.hpp"
#include "nodal_lab/solver.hpp"
#include "nodal_lab/sup.hpp"
#include "nodal_lab/verify.hpp"
