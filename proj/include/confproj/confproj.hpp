#pragma once

#include "confproj/errors.hpp"
#include "confproj/jet.hpp"
#include "confproj/expr.hpp"
#include "confproj/symbolic.hpp"
#include "confproj/scenario.hpp"
#include "confproj/geometry.hpp"
#include "confproj/linalg.hpp"
#include "confproj/rng.hpp"
#include "confproj/compat.hpp"
#include "confproj/recover.hpp"
#include "confproj/cone.hpp"
#include "confproj/report.hpp"
