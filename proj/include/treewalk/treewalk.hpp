#pragma once

#include "treewalk/arith.hpp"
#include "treewalk/exact.hpp"
#include "treewalk/genfun.hpp"
#include "treewalk/model.hpp"
#include "treewalk/montecarlo.hpp"
#include "treewalk/output.hpp"
