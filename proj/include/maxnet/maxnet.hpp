#pragma once

#include "maxnet/bounds.hpp"
#include "maxnet/data.hpp"
#include "maxnet/geometry.hpp"
#include "maxnet/hop_distance.hpp"
#include "maxnet/mac.hpp"
#include "maxnet/one_shot.hpp"
#include "maxnet/oracle.hpp"
#include "maxnet/pipelined.hpp"
#include "maxnet/rng.hpp"
#include "maxnet/trace.hpp"
