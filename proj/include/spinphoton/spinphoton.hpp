#pragma once

#include "calibrate.hpp"
#include "device.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "io.hpp"
#include "lindblad.hpp"
#include "model.hpp"
#include "polarisation.hpp"
#include "simplex.hpp"
#include "tomography.hpp"
