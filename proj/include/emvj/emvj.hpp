#pragma once

#include "emvj/backtest.hpp"
#include "emvj/config.hpp"
#include "emvj/data_io.hpp"
#include "emvj/equilibrium_policy.hpp"
#include "emvj/evaluation.hpp"
#include "emvj/levy_market.hpp"
#include "emvj/market.hpp"
#include "emvj/merton_mle.hpp"
#include "emvj/nelder_mead.hpp"
#include "emvj/oc_trainer.hpp"
#include "emvj/random.hpp"
