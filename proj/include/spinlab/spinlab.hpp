#pragma once

#include "spinlab/types.hpp"
#include "spinlab/operators.hpp"
#include "spinlab/state.hpp"
#include "spinlab/eigenbasis.hpp"
#include "spinlab/evolve.hpp"
#include "spinlab/measure.hpp"
#include "spinlab/noise.hpp"
#include "spinlab/estimation.hpp"
#include "spinlab/protocol.hpp"
#include "spinlab/curves.hpp"
#include "spinlab/fixed_time.hpp"
#include "spinlab/rng.hpp"
#include "spinlab/threading.hpp"
#include "spinlab/table.hpp"
#include "spinlab/config.hpp"
#include "spinlab/runners.hpp"
