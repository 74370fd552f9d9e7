#pragma once

#include "tcsim/cat.hpp"
#include "tcsim/errors.hpp"
#include "tcsim/exact.hpp"
#include "tcsim/fock.hpp"
#include "tcsim/hp_model.hpp"
#include "tcsim/parallel.hpp"
#include "tcsim/perturbation.hpp"
#include "tcsim/spin.hpp"
#include "tcsim/version.hpp"
