#pragma once

#include "skyrelay/rng.hpp"
#include "skyrelay/net_model.hpp"
#include "skyrelay/ledger.hpp"
#include "skyrelay/trust.hpp"
#include "skyrelay/screening.hpp"
#include "skyrelay/sim_env.hpp"
#include "skyrelay/mlp.hpp"
#include "skyrelay/policy.hpp"
#include "skyrelay/rollout.hpp"
#include "skyrelay/ppo.hpp"
#include "skyrelay/baselines.hpp"
#include "skyrelay/config.hpp"
#include "skyrelay/harness.hpp"
