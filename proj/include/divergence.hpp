#pragma once

#include "divergence/baseline.hpp"
#include "divergence/chain.hpp"
#include "divergence/cli.hpp"
#include "divergence/crp.hpp"
#include "divergence/error.hpp"
#include "divergence/martingale.hpp"
#include "divergence/model_io.hpp"
#include "divergence/petrinet.hpp"
#include "divergence/pocs.hpp"
#include "divergence/polynomial.hpp"
#include "divergence/ppda.hpp"
#include "divergence/randomwalk.hpp"
#include "divergence/rational.hpp"
#include "divergence/solver.hpp"
