#pragma once

#include "deepridge/numeric.hpp"
#include "deepridge/network.hpp"
#include "deepridge/norms.hpp"
#include "deepridge/rescale.hpp"
#include "deepridge/radon.hpp"
#include "deepridge/trainer.hpp"
#include "deepridge/io.hpp"
