#pragma once

// Critical-threshold solver suite for the Frank-Kamenetsky problem on a disk
// with partially insulated, periodically structured walls.

#include "fkdisk/analysis.hpp"
#include "fkdisk/continuation.hpp"
#include "fkdisk/field.hpp"
#include "fkdisk/fraction.hpp"
#include "fkdisk/geometry.hpp"
#include "fkdisk/io.hpp"
#include "fkdisk/newton.hpp"
#include "fkdisk/operators.hpp"
#include "fkdisk/solver.hpp"
#include "fkdisk/sweep.hpp"
