#pragma once

#include "qlc0/circuit.hpp"
#include "qlc0/circuit_json.hpp"
#include "qlc0/config.hpp"
#include "qlc0/dense_operator.hpp"
#include "qlc0/dilation.hpp"
#include "qlc0/errors.hpp"
#include "qlc0/experiment.hpp"
#include "qlc0/learner.hpp"
#include "qlc0/lowdeg.hpp"
#include "qlc0/minimax.hpp"
#include "qlc0/pauli.hpp"
#include "qlc0/reduction.hpp"
#include "qlc0/shadows.hpp"
