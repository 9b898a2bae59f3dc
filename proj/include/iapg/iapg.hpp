#pragma once

#include "iapg/inner_loop.hpp"
#include "iapg/linops.hpp"
#include "iapg/model_problems.hpp"
#include "iapg/outer_loop.hpp"
#include "iapg/prox.hpp"
