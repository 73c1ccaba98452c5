#pragma once

#include "singlecopy/asymptotics.hpp"
#include "singlecopy/entangle.hpp"
#include "singlecopy/error.hpp"
#include "singlecopy/io.hpp"
#include "singlecopy/lp.hpp"
#include "singlecopy/model.hpp"
#include "singlecopy/oracle.hpp"
#include "singlecopy/quadrature.hpp"
#include "singlecopy/toeplitz.hpp"
