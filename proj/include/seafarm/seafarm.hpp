#pragma once

#include "seafarm/dynamics.hpp"
#include "seafarm/errors.hpp"
#include "seafarm/eval.hpp"
#include "seafarm/field.hpp"
#include "seafarm/field_io.hpp"
#include "seafarm/growth.hpp"
#include "seafarm/hj_solver.hpp"
#include "seafarm/mission.hpp"
#include "seafarm/policy.hpp"
#include "seafarm/scenario.hpp"
#include "seafarm/scenarios.hpp"
#include "seafarm/simulation.hpp"
#include "seafarm/value_io.hpp"
