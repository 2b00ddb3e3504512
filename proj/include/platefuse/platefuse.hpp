#pragma once

#include "platefuse/assignment.hpp"
#include "platefuse/engine.hpp"
#include "platefuse/evaluate.hpp"
#include "platefuse/geometry.hpp"
#include "platefuse/layout.hpp"
#include "platefuse/simulate.hpp"
#include "platefuse/stream.hpp"
#include "platefuse/tracker.hpp"
